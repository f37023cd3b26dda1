use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BilevelError;

/// Disjoint sample indices for the weight step and the α step.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    pub w: Vec<usize>,
    pub alpha: Vec<usize>,
}

impl Partition {
    pub fn total(&self) -> usize {
        self.w.len() + self.alpha.len()
    }
}

/// Seeded subsample of `round(data_fraction · n)` indices, split so that
/// `round(split_fraction_w · subsample)` go to the weight step.
pub fn partition_data(
    n: usize,
    data_fraction: f64,
    split_fraction_w: f64,
    seed: u64,
) -> Result<Partition, BilevelError> {
    if !(data_fraction > 0.0 && data_fraction <= 1.0) {
        return Err(BilevelError::InvalidConfig {
            field: "proxy.data_fraction".into(),
            message: format!("must be in (0, 1], got {data_fraction}"),
        });
    }
    if !(split_fraction_w > 0.0 && split_fraction_w < 1.0) {
        return Err(BilevelError::InvalidConfig {
            field: "search.split_fraction_w".into(),
            message: format!("must lie strictly between 0 and 1, got {split_fraction_w}"),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let take = ((data_fraction * n as f64).round() as usize).min(n);
    let n_w = (split_fraction_w * take as f64).round() as usize;
    if n_w == 0 || n_w == take {
        return Err(BilevelError::EmptyPartition {
            samples: take,
            min_fraction: min_fraction(n, split_fraction_w),
        });
    }
    let mut w = order[..n_w].to_vec();
    let mut alpha = order[n_w..take].to_vec();
    w.sort_unstable();
    alpha.sort_unstable();
    Ok(Partition { w, alpha })
}

/// Smallest `k/n` for which both sides of the split are non-empty.
fn min_fraction(n: usize, split_fraction_w: f64) -> Option<f64> {
    (2..=n)
        .find(|&k| {
            let n_w = (split_fraction_w * k as f64).round() as usize;
            n_w > 0 && n_w < k
        })
        .map(|k| k as f64 / n as f64)
}
