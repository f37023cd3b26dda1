use super::Criterion;

/// Epoch at which each criterion first fired.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FiredEpochs {
    pub c1: Option<usize>,
    pub c2: Option<usize>,
    pub c3: Option<usize>,
}

impl FiredEpochs {
    pub fn get(&self, c: Criterion) -> Option<usize> {
        match c {
            Criterion::None => None,
            Criterion::C1 => self.c1,
            Criterion::C2 => self.c2,
            Criterion::C3 => self.c3,
        }
    }
}

/// Criterion thresholds on the determined-edge count `m` out of `M`:
/// c1 at `m ≥ 1`, c2 at `2m ≥ M`, c3 at `m = M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriteriaTracker {
    total: usize,
    fired: FiredEpochs,
}

impl CriteriaTracker {
    pub fn new(total: usize) -> Self {
        Self {
            total,
            fired: FiredEpochs::default(),
        }
    }

    pub fn fired(&self) -> FiredEpochs {
        self.fired
    }

    /// Record `m` at `epoch`; returns the criteria that fire for the first time.
    pub fn observe(&mut self, epoch: usize, m: usize) -> Vec<Criterion> {
        let mut newly = Vec::new();
        let checks = [
            (Criterion::C1, m >= 1),
            (Criterion::C2, m > 0 && 2 * m >= self.total),
            (Criterion::C3, m == self.total && m > 0),
        ];
        for (c, hit) in checks {
            let slot = match c {
                Criterion::C1 => &mut self.fired.c1,
                Criterion::C2 => &mut self.fired.c2,
                _ => &mut self.fired.c3,
            };
            if hit && slot.is_none() {
                *slot = Some(epoch);
                newly.push(c);
            }
        }
        newly
    }
}

/// Per-edge α-std plateau detector.
///
/// An edge becomes determined once its std has risen by less than `tolerance`
/// over the last `window` epochs. Determined edges stay determined.
#[derive(Clone, Debug, PartialEq)]
pub struct EarlyStopState {
    history: Vec<Vec<f64>>,
    determined: Vec<bool>,
    window: usize,
    tolerance: f64,
    criteria: CriteriaTracker,
}

impl EarlyStopState {
    pub fn new(num_edges: usize, window: usize, tolerance: f64) -> Self {
        Self {
            history: vec![Vec::new(); num_edges],
            determined: vec![false; num_edges],
            window: window.max(1),
            tolerance,
            criteria: CriteriaTracker::new(num_edges),
        }
    }

    pub fn m(&self) -> usize {
        self.determined.iter().filter(|&&d| d).count()
    }

    pub fn total(&self) -> usize {
        self.determined.len()
    }

    pub fn determined(&self) -> &[bool] {
        &self.determined
    }

    pub fn fired(&self) -> FiredEpochs {
        self.criteria.fired()
    }

    pub fn epochs_seen(&self) -> usize {
        self.history.first().map_or(0, Vec::len)
    }
}

/// Append one epoch of per-edge α-std values and report newly fired criteria.
pub fn update_early_stop(state: &mut EarlyStopState, stds: &[f64]) -> Vec<Criterion> {
    assert_eq!(stds.len(), state.total(), "one std per edge");
    assert!(stds.iter().all(|s| s.is_finite()), "std values must be finite");
    let epoch = state.epochs_seen();
    for (e, &s) in stds.iter().enumerate() {
        let h = &mut state.history[e];
        h.push(s);
        if !state.determined[e] && h.len() > state.window {
            let rise = s - h[h.len() - 1 - state.window];
            if rise < state.tolerance {
                state.determined[e] = true;
            }
        }
    }
    let m = state.m();
    state.criteria.observe(epoch, m)
}
