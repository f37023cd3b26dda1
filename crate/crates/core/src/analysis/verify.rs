use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bilevel::{update_early_stop, CriteriaTracker, Criterion, EarlyStopState};
use crate::diffcore::{softmax_slice, Graph, Tensor};
use crate::par::{self, Exec};
use crate::regularizers::{alpha_loss_value, alpha_penalty_step, beta_decay_loss, AlphaVariant};
use crate::searchspace::ArchParams;

use super::{flooding_taylor_check, lipschitz_measure, theta_closed_form, theta_simulated, Quadratic, Quartic};

const SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    BetaGrad,
    Theta,
    Flooding,
    Criteria,
    Lipschitz,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::BetaGrad, Suite::Theta, Suite::Flooding, Suite::Criteria, Suite::Lipschitz];

    pub fn name(self) -> &'static str {
        match self {
            Suite::BetaGrad => "beta-grad",
            Suite::Theta => "theta",
            Suite::Flooding => "flooding",
            Suite::Criteria => "criteria",
            Suite::Lipschitz => "lipschitz",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest deviation or violation count seen, against `bound`.
    pub observed: f64,
    pub bound: f64,
}

impl Check {
    fn at_most(name: &'static str, observed: f64, bound: f64) -> Self {
        Self {
            name,
            passed: observed <= bound,
            observed,
            bound,
        }
    }

    fn below(name: &'static str, observed: f64, bound: f64) -> Self {
        Self {
            name,
            passed: observed < bound,
            observed,
            bound,
        }
    }

    fn holds(name: &'static str, ok: bool) -> Self {
        Self {
            name,
            passed: ok,
            observed: if ok { 0.0 } else { 1.0 },
            bound: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `∂L_Beta/∂α` for a batch of α matrices, as a plug-in so a broken
/// implementation can be substituted.
pub type BetaGradFn = dyn Fn(&Tensor) -> Tensor + Sync;

/// Reverse-mode gradient of the Beta-Decay loss.
pub fn autodiff_beta_grad(alpha: &Tensor) -> Tensor {
    let mut g = Graph::new();
    let a = g.alpha(alpha.clone());
    let l = beta_decay_loss(&mut g, a).expect("α is a matrix");
    g.backward(l).expect("scalar loss").wrt(a)
}

pub fn run_suite(suite: Suite, exec: Exec) -> SuiteReport {
    match suite {
        Suite::BetaGrad => beta_grad_suite(&autodiff_beta_grad, exec),
        Suite::Theta => theta_suite(exec),
        Suite::Flooding => flooding_suite(),
        Suite::Criteria => criteria_suite(),
        Suite::Lipschitz => lipschitz_suite(exec),
    }
}

fn trial_rng(suite: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ suite);
    rng.set_stream(trial as u64);
    rng
}

/// Max |a − b| over paired entries.
fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Gradient of the Beta-Decay loss against `softmax(α)/edges` (1e-10) and
/// central differences with `h = 1e-5` (1e-6 relative), over 100 random α
/// matrices up to 6×8.
pub fn beta_grad_suite(grad: &BetaGradFn, exec: Exec) -> SuiteReport {
    let trials = par::map_range(exec, 100, |t| {
        let mut rng = trial_rng(1, t);
        let rows = rng.random_range(1..=6usize);
        let cols = rng.random_range(1..=8usize);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-4.0..4.0)).collect();
        let alpha = Tensor::matrix(rows, cols, data).expect("shape");
        let g = grad(&alpha);
        if g.shape() != alpha.shape() {
            return (f64::INFINITY, f64::INFINITY);
        }
        let closed: Vec<f64> = alpha
            .rows()
            .flat_map(softmax_slice)
            .map(|v| v / rows as f64)
            .collect();
        let closed_err = max_abs(g.data(), &closed);

        let h = 1e-5;
        let value = |t: &Tensor| {
            alpha_loss_value(&ArchParams::from_tensor(t.clone()).expect("matrix"), AlphaVariant::BetaDecay)
                .expect("loss-term variant")
        };
        let mut fd_err: f64 = 0.0;
        for i in 0..alpha.len() {
            let mut plus = alpha.clone();
            plus.data_mut()[i] += h;
            let mut minus = alpha.clone();
            minus.data_mut()[i] -= h;
            let fd = (value(&plus) - value(&minus)) / (2.0 * h);
            fd_err = fd_err.max((g.data()[i] - fd).abs() / fd.abs().max(1.0));
        }
        (closed_err, fd_err)
    });
    let closed = trials.iter().map(|t| t.0).fold(0.0, f64::max);
    let fd = trials.iter().map(|t| t.1).fold(0.0, f64::max);
    SuiteReport {
        suite: Suite::BetaGrad,
        checks: vec![
            Check::at_most("gradient equals softmax/edges", closed, 1e-10),
            Check::at_most("gradient matches central differences", fd, 1e-6),
        ],
    }
}

fn random_row(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Closed-form θ against simulation for three regularizers, then the
/// Beta-Decay ordering conclusions; 1000 trials each.
pub fn theta_suite(exec: Exec) -> SuiteReport {
    let variants = [
        (AlphaVariant::BetaDecay, "beta-decay closed form equals simulation"),
        (AlphaVariant::L2AdamEmulated, "l2 closed form equals simulation"),
        (AlphaVariant::WeightDecay, "weight-decay closed form equals simulation"),
    ];
    let mut checks = Vec::new();
    for (vi, (variant, name)) in variants.into_iter().enumerate() {
        let devs = par::map_range(exec, 1000, |t| {
            let mut rng = trial_rng(10 + vi as u64, t);
            let len = rng.random_range(2..=8usize);
            let alpha = random_row(&mut rng, len, 3.0);
            let grad = random_row(&mut rng, len, 1.0);
            let eta = rng.random_range(0.01..1.0);
            let lambda_eta = rng.random_range(0.0..=2.0);
            let closed = theta_closed_form(&alpha, variant, lambda_eta / eta, eta, &grad).expect("valid input");
            let sim = theta_simulated(&alpha, variant, lambda_eta / eta, eta, &grad).expect("valid input");
            closed
                .iter()
                .zip(&sim)
                .map(|(c, s)| (c - s).abs() / s.abs())
                .fold(0.0, f64::max)
        });
        checks.push(Check::at_most(name, devs.into_iter().fold(0.0, f64::max), 1e-8));
    }

    let violations = par::map_range(exec, 1000, |t| {
        let mut rng = trial_rng(20, t);
        let len = rng.random_range(2..=8usize);
        let alpha = random_row(&mut rng, len, 3.0);
        let grad = random_row(&mut rng, len, 1.0);
        let eta = rng.random_range(0.01..1.0);
        let lambda_eta = rng.random_range(0.05..=2.0);
        let theta = theta_closed_form(&alpha, AlphaVariant::BetaDecay, lambda_eta / eta, eta, &grad).expect("valid");
        theta_ordering_violations(&alpha, &theta)
    });
    checks.push(Check::at_most(
        "beta-decay θ below 1 at max, above 1 at min, decreasing in α",
        violations.into_iter().sum::<usize>() as f64,
        0.0,
    ));
    SuiteReport {
        suite: Suite::Theta,
        checks,
    }
}

/// Count of broken ordering conclusions for one non-constant row.
pub fn theta_ordering_violations(alpha: &[f64], theta: &[f64]) -> usize {
    let mut idx: Vec<usize> = (0..alpha.len()).collect();
    idx.sort_by(|&a, &b| alpha[a].total_cmp(&alpha[b]));
    let (lo, hi) = (idx[0], idx[idx.len() - 1]);
    let mut bad = 0;
    if alpha[lo] == alpha[hi] {
        return 0;
    }
    if theta[hi] >= 1.0 {
        bad += 1;
    }
    if theta[lo] <= 1.0 {
        bad += 1;
    }
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if alpha[a] < alpha[b] && theta[a] <= theta[b] {
            bad += 1;
        }
    }
    bad
}

/// Flooding round trip: exact on a quadratic, third-order error on a quartic.
pub fn flooding_suite() -> SuiteReport {
    let mut checks = Vec::new();
    match flooding_taylor_check(&Quadratic, &[1.0], 0.1, 0.45) {
        Ok(r) => checks.push(Check::at_most("exact on ½w²", r.error, 1e-12)),
        Err(_) => checks.push(Check::holds("exact on ½w²", false)),
    }
    let errors: Vec<Option<f64>> = [0.1, 0.05, 0.025]
        .into_iter()
        .map(|eta| flooding_taylor_check(&Quartic, &[1.0], eta, 0.24).ok().map(|r| r.error))
        .collect();
    match errors.as_slice() {
        [Some(a), Some(b), Some(c)] => {
            let ratio = a / b;
            checks.push(Check {
                name: "¼w⁴ error ratio η=0.1 vs η=0.05 in [6, 10]",
                passed: (6.0..=10.0).contains(&ratio),
                observed: ratio,
                bound: 10.0,
            });
            checks.push(Check::holds("¼w⁴ error shrinks monotonically with η", a > b && b > c));
        }
        _ => checks.push(Check::holds("¼w⁴ phases alternate", false)),
    }
    SuiteReport {
        suite: Suite::Flooding,
        checks,
    }
}

/// Epochs at which c1, c2, c3 first fire for a scripted `m` sequence.
pub fn fire_epochs(counts: &[usize], total: usize) -> [Option<usize>; 3] {
    let mut t = CriteriaTracker::new(total);
    for (epoch, &m) in counts.iter().enumerate() {
        t.observe(epoch, m);
    }
    let f = t.fired();
    [f.c1, f.c2, f.c3]
}

pub fn criteria_suite() -> SuiteReport {
    let scripted = fire_epochs(&[0, 0, 1, 2, 3, 4, 6], 6) == [Some(2), Some(4), Some(6)];

    let mut together = EarlyStopState::new(6, 3, 1e-3);
    let mut first = Vec::new();
    for epoch in 0..10 {
        let v = (epoch.min(4)) as f64;
        let fired = update_early_stop(&mut together, &[v; 6]);
        if !fired.is_empty() {
            first = fired;
            break;
        }
    }
    let simultaneous = first == vec![Criterion::C1, Criterion::C2, Criterion::C3];

    let mut rising = EarlyStopState::new(6, 5, 1e-3);
    let quiet = (0..100).all(|e| update_early_stop(&mut rising, &[e as f64 * 0.01; 6]).is_empty());

    SuiteReport {
        suite: Suite::Criteria,
        checks: vec![
            Check::holds("sequence [0,0,1,2,3,4,6] fires c1/c2/c3 at 2/4/6", scripted),
            Check::holds("simultaneous plateau fires all criteria together", simultaneous),
            Check::holds("rising std never fires", quiet),
        ],
    }
}

/// Violations of the pure Beta-Decay step contract for one row and `λη ≤ 1`.
pub fn contraction_violations(alpha: &[f64], lambda_eta: f64) -> usize {
    let arch = ArchParams::from_rows(&[alpha.to_vec()]).expect("row");
    let zero = Tensor::zeros(&[1, alpha.len()]);
    let next = alpha_penalty_step(&arch, AlphaVariant::BetaDecay, lambda_eta, 1.0, &zero).expect("valid step");
    let after = next.row(0);
    let mut bad = 0;
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            if alpha[i] < alpha[j] {
                continue;
            }
            let (old, new) = (alpha[i] - alpha[j], after[i] - after[j]);
            let ok = if old == 0.0 { new == 0.0 } else { new >= 0.0 && new < old };
            if !ok {
                bad += 1;
            }
        }
    }
    let before = lipschitz_measure(&arch).per_edge[0];
    let now = lipschitz_measure(&next).per_edge[0];
    if now > before {
        bad += 1;
    }
    let (b0, b1) = (softmax_slice(alpha), softmax_slice(after));
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    if max(&b1) > max(&b0) || min(&b1) < min(&b0) {
        bad += 1;
    }
    bad
}

/// Pure Beta-Decay steps contract α gaps and shrink ‖β‖₂; 1000 trials.
pub fn lipschitz_suite(exec: Exec) -> SuiteReport {
    let violations = par::map_range(exec, 1000, |t| {
        let mut rng = trial_rng(30, t);
        let len = rng.random_range(2..=8usize);
        let alpha = random_row(&mut rng, len, 5.0);
        let lambda_eta = rng.random_range(0.01..=1.0);
        contraction_violations(&alpha, lambda_eta)
    });
    let uniform = lipschitz_measure(&ArchParams::zeros(1, 5)).per_edge[0];
    let mut hot = ArchParams::zeros(1, 5);
    hot.row_mut(0)[1] = 1e6;
    let one_hot = lipschitz_measure(&hot).per_edge[0];
    SuiteReport {
        suite: Suite::Lipschitz,
        checks: vec![
            Check::at_most(
                "pure beta-decay step keeps order, contracts gaps, shrinks ‖β‖",
                violations.into_iter().sum::<usize>() as f64,
                0.0,
            ),
            Check::below("uniform row measure is 1/√5", (uniform - 1.0 / 5f64.sqrt()).abs(), 1e-12),
            Check::below("one-hot row measure is 1", (one_hot - 1.0).abs(), 1e-12),
        ],
    }
}
