use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{edge_stats, EdgeStats};
use crate::diffcore::{Graph, Tensor};
use crate::oracle::{evaluate, Dataset, TabularBenchmark};
use crate::par::{self, Exec};
use crate::regularizers::{
    alpha_loss, alpha_loss_value, alpha_penalty_step, apply_weight_regularizer, smoothing_perturbation,
    AlphaVariant, StepDirection,
};
use crate::searchspace::{genotype_to_string, ArchParams, Genotype, OpSet, ShapeFingerprint, Supernet, SupernetSpec, NUM_EDGES};

use super::early_stop::{update_early_stop, EarlyStopState, FiredEpochs};
use super::partition::{partition_data, Partition};
use super::{BilevelError, Criterion, SearchConfig};

/// One epoch of a search.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub epoch: usize,
    /// Mean raw training loss over the epoch's weight steps.
    pub l_train: f64,
    /// Mean validation loss over the epoch's α steps.
    pub l_val: f64,
    /// Beta-Decay loss of α at the end of the epoch.
    pub l_beta: f64,
    pub m: usize,
    pub genotype: String,
    pub oracle_score: Option<f64>,
    pub edges: Vec<EdgeStats>,
}

/// One weight step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepLog {
    pub epoch: usize,
    pub step: usize,
    pub l_train: f64,
    pub l_val: f64,
    pub direction: StepDirection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchTrajectory {
    pub records: Vec<TrajectoryRecord>,
    pub steps: Vec<StepLog>,
    pub fired: FiredEpochs,
    /// Criterion that ended the search before the last epoch.
    pub stopped_by: Option<Criterion>,
}

/// What a run touched: the sampled indices and the supernet shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RunFingerprint {
    pub data: Partition,
    pub shape: ShapeFingerprint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub trajectory: SearchTrajectory,
    pub genotype: Genotype,
    pub genotype_string: String,
    pub arch: ArchParams,
    pub net: Supernet,
    pub fingerprint: RunFingerprint,
}

impl SearchOutcome {
    pub fn final_score(&self) -> Option<f64> {
        self.trajectory.records.last().and_then(|r| r.oracle_score)
    }
}

/// Supernet shape for a config and dataset.
pub fn supernet_spec(config: &SearchConfig, data: &Dataset) -> SupernetSpec {
    SupernetSpec {
        input_dim: data.input_dim(),
        width: config.proxy.channels,
        depth: config.proxy.layers,
        num_classes: data.num_classes,
        ops: OpSet::canonical(),
    }
}

/// Build the supernet from the config seed, start from uniform α and search.
pub fn run(config: &SearchConfig, data: &Dataset, oracle: Option<&TabularBenchmark>) -> Result<SearchOutcome, BilevelError> {
    config.validate()?;
    let net = Supernet::new(supernet_spec(config, data), config.seed)?;
    let arch = ArchParams::zeros(NUM_EDGES, net.ops().len());
    search(config, net, arch, data, oracle)
}

/// Independent runs, one per config, in input order.
pub fn sweep(
    configs: &[SearchConfig],
    data: &Dataset,
    oracle: Option<&TabularBenchmark>,
    exec: Exec,
) -> Vec<Result<SearchOutcome, BilevelError>> {
    par::map_slice(exec, configs, |c| run(c, data, oracle))
}

/// `batch`-sized window of `order` starting at `step · batch`, wrapping around.
fn batch_indices(order: &[usize], step: usize, batch: usize) -> Vec<usize> {
    let b = batch.min(order.len());
    (0..b).map(|j| order[(step * b + j) % order.len()]).collect()
}

/// Alternating first-order search.
///
/// Each epoch shuffles both partitions and runs
/// `max(⌈|w-set|/B⌉, ⌈|α-set|/B⌉)` iterations of one α step followed by one
/// weight step, the smaller partition wrapping around.
pub fn search(
    config: &SearchConfig,
    mut net: Supernet,
    mut arch: ArchParams,
    data: &Dataset,
    oracle: Option<&TabularBenchmark>,
) -> Result<SearchOutcome, BilevelError> {
    config.validate()?;
    let partition = partition_data(data.len(), config.proxy.data_fraction, config.split_fraction_w, config.seed)?;
    let fingerprint = RunFingerprint {
        data: partition.clone(),
        shape: net.fingerprint(),
    };

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(1);
    let mut smooth_rng = ChaCha8Rng::seed_from_u64(config.seed);
    smooth_rng.set_stream(2);

    let b = config.batch_size;
    let steps_per_epoch = partition.w.len().div_ceil(b).max(partition.alpha.len().div_ceil(b));
    let mut w_order = partition.w.clone();
    let mut a_order = partition.alpha.clone();

    let mut early = EarlyStopState::new(NUM_EDGES, config.early_stop.window, config.early_stop.tolerance);
    let mut records = Vec::new();
    let mut steps = Vec::new();
    let mut stopped_by = None;

    for epoch in 0..config.proxy.epochs {
        w_order.shuffle(&mut shuffle_rng);
        a_order.shuffle(&mut shuffle_rng);
        let lambda = config.alpha_reg.lambda_at(epoch);
        let (mut sum_train, mut sum_val) = (0.0, 0.0);

        for step in 0..steps_per_epoch {
            let (xa, ya) = data.select(&batch_indices(&a_order, step, b));
            let (l_val, next) = alpha_step(config, &net, &arch, lambda, &xa, &ya)?;
            arch = next;

            let (xw, yw) = data.select(&batch_indices(&w_order, step, b));
            let (l_train, direction) = weight_step(config, &mut net, &arch, &xw, &yw, &mut smooth_rng)?;

            sum_train += l_train;
            sum_val += l_val;
            steps.push(StepLog {
                epoch,
                step,
                l_train,
                l_val,
                direction,
            });
        }

        if !arch.tensor().all_finite() {
            return Err(BilevelError::Diverged { epoch });
        }
        let edges: Vec<EdgeStats> = arch.rows().map(edge_stats).collect();
        let stds: Vec<f64> = edges.iter().map(|s| s.std).collect();
        let newly = update_early_stop(&mut early, &stds);
        let genotype = arch.discretize()?;
        let oracle_score = oracle.map(|o| evaluate(o, &genotype)).transpose()?;
        records.push(TrajectoryRecord {
            epoch,
            l_train: sum_train / steps_per_epoch as f64,
            l_val: sum_val / steps_per_epoch as f64,
            l_beta: alpha_loss_value(&arch, AlphaVariant::BetaDecay).expect("loss-term variant"),
            m: early.m(),
            genotype: genotype_to_string(&genotype, net.ops())?,
            oracle_score,
            edges,
        });
        let c = config.early_stop.criterion;
        if c != Criterion::None && newly.contains(&c) {
            if epoch + 1 < config.proxy.epochs {
                stopped_by = Some(c);
            }
            break;
        }
    }

    let genotype = arch.discretize()?;
    Ok(SearchOutcome {
        trajectory: SearchTrajectory {
            records,
            steps,
            fired: early.fired(),
            stopped_by,
        },
        genotype_string: genotype_to_string(&genotype, net.ops())?,
        genotype,
        arch,
        net,
        fingerprint,
    })
}

/// Descend `L_val + λ·L_reg` in α with the weights frozen.
fn alpha_step(
    config: &SearchConfig,
    net: &Supernet,
    arch: &ArchParams,
    lambda: f64,
    x: &Tensor,
    y: &[usize],
) -> Result<(f64, ArchParams), BilevelError> {
    let mut g = Graph::new();
    let bound = net.bind_frozen(&mut g);
    let a = g.alpha(arch.tensor().clone());
    let xn = g.constant(x.clone());
    let logits = net.forward(&mut g, &bound, a, xn)?;
    let l_val = g.cross_entropy(logits, y)?;
    let variant = config.alpha_reg.variant;
    let mut objective = l_val;
    if variant.is_loss_term() && lambda > 0.0 {
        let reg = alpha_loss(&mut g, a, variant)?.expect("loss-term variant");
        objective = g.scale_add(1.0, l_val, lambda, reg)?;
    }
    let grad = g.backward(objective)?.wrt(a);
    let eta = config.eta_alpha;
    let next = match variant {
        AlphaVariant::L2AdamEmulated | AlphaVariant::WeightDecay => {
            alpha_penalty_step(arch, variant, lambda, eta, &grad)?
        }
        _ => alpha_penalty_step(arch, AlphaVariant::None, 0.0, eta, &grad)?,
    };
    Ok((g.value(l_val).item(), next))
}

/// Descend the regularized training loss in w (ascend under flooding below
/// the flood level). Random smoothing perturbs α for this step only.
fn weight_step(
    config: &SearchConfig,
    net: &mut Supernet,
    arch: &ArchParams,
    x: &Tensor,
    y: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<(f64, StepDirection), BilevelError> {
    let mut alpha = arch.tensor().clone();
    if let Some(delta) = smoothing_perturbation(&config.weight_reg, alpha.shape(), rng) {
        for (a, d) in alpha.data_mut().iter_mut().zip(delta.data()) {
            *a += d;
        }
    }
    let mut g = Graph::new();
    let bound = net.bind(&mut g);
    let a = g.constant(alpha);
    let xn = g.constant(x.clone());
    let logits = net.forward(&mut g, &bound, a, xn)?;
    let l_train = g.cross_entropy(logits, y)?;
    let effective = apply_weight_regularizer(&mut g, l_train, &config.weight_reg, &bound.weights)?;
    let grads = g.backward(effective)?;
    let outer = grads.wrt(l_train).item();
    let eta = config.eta_w;
    for (w, &id) in net.weights_mut().iter_mut().zip(&bound.weights) {
        if let Some(gw) = grads.get(id) {
            for (v, d) in w.data_mut().iter_mut().zip(gw.data()) {
                *v -= eta * d;
            }
        }
    }
    Ok((g.value(l_train).item(), StepDirection::from_outer_derivative(outer)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilevel::{EarlyStopConfig, ProxyConfig};
    use crate::oracle::TaskParams;
    use crate::regularizers::{AlphaRegularizer, LambdaSchedule, ScheduleKind, WeightRegularizer, WeightVariant};

    fn small_task() -> Dataset {
        TaskParams {
            n: 120,
            ..TaskParams::default()
        }
        .generate()
        .unwrap()
    }

    fn config(alpha: AlphaVariant, weight: WeightRegularizer, epochs: usize) -> SearchConfig {
        SearchConfig {
            eta_alpha: 0.5,
            eta_w: 0.1,
            batch_size: 20,
            alpha_reg: AlphaRegularizer {
                variant: alpha,
                schedule: LambdaSchedule::new(ScheduleKind::LinearIncrease, 0.0, 1.0, epochs).unwrap(),
            },
            weight_reg: weight,
            proxy: ProxyConfig {
                data_fraction: 1.0,
                channels: 4,
                layers: 1,
                epochs,
            },
            split_fraction_w: 0.5,
            early_stop: EarlyStopConfig::default(),
            seed: 7,
        }
    }

    #[test]
    fn runs_are_bitwise_reproducible() {
        let data = small_task();
        let c = config(AlphaVariant::BetaDecay, WeightRegularizer::flooding(0.3).unwrap(), 4);
        let a = run(&c, &data, None).unwrap();
        let b = run(&c, &data, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectory.records.len(), 4);
        assert_eq!(a.trajectory.steps.len(), 4 * 3);
    }

    #[test]
    fn zero_lambda_matches_plain_descent() {
        let data = small_task();
        let plain = config(AlphaVariant::None, WeightRegularizer::l2(0.0).unwrap(), 3);
        let mut off = config(AlphaVariant::BetaDecay, WeightRegularizer::l2(0.0).unwrap(), 3);
        off.alpha_reg.schedule = LambdaSchedule::off(3);
        let a = run(&plain, &data, None).unwrap();
        let b = run(&off, &data, None).unwrap();
        assert_eq!(a.arch, b.arch);
        assert_eq!(a.net, b.net);
    }

    #[test]
    fn zero_epsilon_smoothing_is_no_regularizer() {
        let data = small_task();
        let plain = config(AlphaVariant::BetaDecay, WeightRegularizer::l2(0.0).unwrap(), 3);
        let smooth = config(
            AlphaVariant::BetaDecay,
            WeightRegularizer::new(WeightVariant::RandomSmoothing, 0.0).unwrap(),
            3,
        );
        assert_eq!(run(&plain, &data, None).unwrap().arch, run(&smooth, &data, None).unwrap().arch);
    }

    #[test]
    fn flooding_direction_tracks_flood_level() {
        let data = small_task();
        let b = 0.4;
        let c = config(AlphaVariant::BetaDecay, WeightRegularizer::flooding(b).unwrap(), 6);
        let out = run(&c, &data, None).unwrap();
        for s in &out.trajectory.steps {
            let expect = if s.l_train < b {
                StepDirection::Ascent
            } else if s.l_train > b {
                StepDirection::Descent
            } else {
                StepDirection::Flat
            };
            assert_eq!(s.direction, expect);
        }
    }

    #[test]
    fn oracle_scores_are_recorded() {
        let data = small_task();
        let bench = crate::oracle::generate_benchmark(0);
        let c = config(AlphaVariant::BetaDecay, WeightRegularizer::l2(3e-4).unwrap(), 2);
        let out = run(&c, &data, Some(&bench)).unwrap();
        for r in &out.trajectory.records {
            assert_eq!(r.oracle_score, Some(bench.lookup(&r.genotype).unwrap()));
        }
    }

    #[test]
    fn proxy_knobs_touch_only_their_part() {
        let data = small_task();
        let base = config(AlphaVariant::BetaDecay, WeightRegularizer::l2(0.0).unwrap(), 1);
        let mut less_data = base.clone();
        less_data.proxy.data_fraction = 0.5;
        let mut wider = base.clone();
        wider.proxy.channels = 8;
        wider.proxy.layers = 2;
        let f0 = run(&base, &data, None).unwrap().fingerprint;
        let f1 = run(&less_data, &data, None).unwrap().fingerprint;
        let f2 = run(&wider, &data, None).unwrap().fingerprint;
        assert_ne!(f0.data, f1.data);
        assert_eq!(f0.shape, f1.shape);
        assert_eq!(f0.data, f2.data);
        assert_ne!(f0.shape, f2.shape);
    }

    #[test]
    fn criterion_stops_early() {
        let data = small_task();
        let mut c = config(AlphaVariant::BetaDecay, WeightRegularizer::l2(0.0).unwrap(), 40);
        c.early_stop = EarlyStopConfig {
            criterion: Criterion::C1,
            window: 2,
            tolerance: 10.0,
        };
        let out = run(&c, &data, None).unwrap();
        assert_eq!(out.trajectory.fired.c1, Some(2));
        assert_eq!(out.trajectory.records.len(), 3);
        assert_eq!(out.trajectory.stopped_by, Some(Criterion::C1));
    }

    #[test]
    fn empty_partition_is_an_error() {
        let data = small_task();
        let mut c = config(AlphaVariant::None, WeightRegularizer::l2(0.0).unwrap(), 1);
        c.proxy.data_fraction = 0.001;
        assert!(matches!(run(&c, &data, None), Err(BilevelError::EmptyPartition { .. })));
    }

    #[test]
    fn sweep_matches_individual_runs() {
        let data = small_task();
        let configs: Vec<SearchConfig> = (0..3)
            .map(|s| SearchConfig {
                seed: s,
                ..config(AlphaVariant::BetaDecay, WeightRegularizer::l2(0.0).unwrap(), 2)
            })
            .collect();
        let seq = sweep(&configs, &data, None, Exec::Sequential);
        let par = sweep(&configs, &data, None, Exec::Parallel);
        for (a, b) in seq.into_iter().zip(par) {
            assert_eq!(a.unwrap(), b.unwrap());
        }
    }
}
