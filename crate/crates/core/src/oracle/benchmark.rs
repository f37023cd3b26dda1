use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::par::{self, Exec};
use crate::searchspace::{genotype_to_string, string_to_genotype, Genotype, OpKind, OpSet, CELL_EDGES, NUM_EDGES, NUM_NODES};

use super::OracleError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Generated { seed: u64 },
    Imported { path: PathBuf },
}

/// Genotype-string → score table over the canonical op set.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularBenchmark {
    ops: OpSet,
    scores: BTreeMap<String, f64>,
    provenance: Provenance,
}

/// Importance of each edge in the scoring rule; edges into the output node
/// weigh more.
const EDGE_IMPORTANCE: [f64; NUM_EDGES] = [0.6, 0.6, 0.6, 1.0, 1.0, 1.0];
/// Added uniform noise lies in `[0, NOISE_SCALE)`.
const NOISE_SCALE: f64 = 0.01;

fn op_value(op: OpKind) -> f64 {
    match op {
        OpKind::None => 0.0,
        OpKind::Skip => 0.35,
        OpKind::Lin => 1.0,
        OpKind::LinRelu => 0.75,
        OpKind::Avg => 0.2,
    }
}

/// Which edges lie on a non-`none` path from the input node to the output.
fn live_edges(g: &Genotype, ops: &OpSet) -> [bool; NUM_EDGES] {
    let active: Vec<bool> = g.ops().iter().map(|&o| ops.get(o) != Some(OpKind::None)).collect();
    let mut from_input = [false; NUM_NODES];
    from_input[0] = true;
    for (e, &(s, t)) in CELL_EDGES.iter().enumerate() {
        if active[e] && from_input[s] {
            from_input[t] = true;
        }
    }
    let mut to_output = [false; NUM_NODES];
    to_output[NUM_NODES - 1] = true;
    for (e, &(s, t)) in CELL_EDGES.iter().enumerate().rev() {
        if active[e] && to_output[t] {
            to_output[s] = true;
        }
    }
    let mut live = [false; NUM_EDGES];
    for (e, &(s, t)) in CELL_EDGES.iter().enumerate() {
        live[e] = active[e] && from_input[s] && to_output[t];
    }
    live
}

/// Noise-free score of a genotype under the benchmark rule.
///
/// Live edges earn `importance · value(op)`, with parametric ops valued
/// highest. Genotypes whose output is disconnected from the input score
/// near zero, and more than two `skip` or `none` edges are penalized.
pub fn rule_score(g: &Genotype, ops: &OpSet) -> f64 {
    let live = live_edges(g, ops);
    if !live.iter().any(|&l| l) {
        return 0.0;
    }
    let max: f64 = EDGE_IMPORTANCE.iter().sum();
    let earned: f64 = (0..NUM_EDGES)
        .filter(|&e| live[e])
        .map(|e| EDGE_IMPORTANCE[e] * op_value(ops.get(g.op(e)).expect("valid genotype")))
        .sum();
    let count = |kind: OpKind| g.ops().iter().filter(|&&o| ops.get(o) == Some(kind)).count();
    let penalty = 0.05 * count(OpKind::Skip).saturating_sub(2) as f64
        + 0.05 * count(OpKind::None).saturating_sub(2) as f64;
    0.05 + 0.9 * (earned / max - penalty).clamp(0.0, 1.0)
}

fn noise(seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.random::<f64>() * NOISE_SCALE
}

/// Score every genotype of the canonical space: rule score plus seeded noise.
pub fn generate_benchmark(seed: u64) -> TabularBenchmark {
    generate_benchmark_with(seed, Exec::default())
}

pub fn generate_benchmark_with(seed: u64, exec: Exec) -> TabularBenchmark {
    let ops = OpSet::canonical();
    let k = ops.len();
    let none = ops.position(OpKind::None).expect("canonical set has none");
    let all_none = Genotype::uniform(none);
    let entries = par::map_range(exec, Genotype::space_size(k), |i| {
        let g = Genotype::from_index(i, k);
        let score = if g == all_none {
            0.0
        } else if !live_edges(&g, &ops).iter().any(|&l| l) {
            // Disconnected but not all-none: strictly above the all-none floor.
            0.01 + 0.5 * noise(seed, i)
        } else {
            rule_score(&g, &ops) + noise(seed, i)
        };
        (genotype_to_string(&g, &ops).expect("valid genotype"), score)
    });
    let mut scores: BTreeMap<String, f64> = entries.into_iter().collect();

    // Break an exact tie at the top in favour of the first string.
    let top = scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<String> = scores
        .iter()
        .filter(|(_, &v)| v == top)
        .map(|(k, _)| k.clone())
        .collect();
    if tied.len() > 1 {
        if let Some(v) = scores.get_mut(&tied[0]) {
            *v += 1e-9;
        }
    }
    TabularBenchmark {
        ops,
        scores,
        provenance: Provenance::Generated { seed },
    }
}

impl TabularBenchmark {
    /// Table from explicit rows; genotypes are validated against the
    /// canonical op set.
    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, f64)>,
        provenance: Provenance,
    ) -> Result<Self, OracleError> {
        let ops = OpSet::canonical();
        let mut scores = BTreeMap::new();
        for (key, score) in entries {
            let g = string_to_genotype(&key, &ops)?;
            let canonical = genotype_to_string(&g, &ops)?;
            if !score.is_finite() {
                return Err(OracleError::InvalidScore { genotype: canonical, score });
            }
            if scores.insert(canonical.clone(), score).is_some() {
                return Err(OracleError::Duplicate(canonical));
            }
        }
        Ok(Self {
            ops,
            scores,
            provenance,
        })
    }

    pub fn ops(&self) -> &OpSet {
        &self.ops
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Entries in genotype-string order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn remove(&mut self, genotype: &str) -> Option<f64> {
        self.scores.remove(genotype)
    }

    pub fn lookup(&self, genotype: &str) -> Result<f64, OracleError> {
        self.scores
            .get(genotype)
            .copied()
            .ok_or_else(|| OracleError::Missing(genotype.to_string()))
    }

    /// Genotype strings of the full space absent from this table.
    pub fn missing(&self) -> Vec<String> {
        Genotype::all(self.ops.len())
            .map(|g| genotype_to_string(&g, &self.ops).expect("valid genotype"))
            .filter(|s| !self.scores.contains_key(s))
            .collect()
    }
}

/// Score of a genotype.
pub fn evaluate(bench: &TabularBenchmark, genotype: &Genotype) -> Result<f64, OracleError> {
    let key = genotype_to_string(genotype, &bench.ops)?;
    bench.lookup(&key)
}

/// Exhaustive argmax with ties going to the smallest genotype string.
///
/// Generated tables must cover the whole space; imported tables are searched
/// over the rows they contain.
pub fn brute_force_best(bench: &TabularBenchmark) -> Result<(Genotype, f64), OracleError> {
    brute_force_best_with(bench, Exec::default())
}

pub fn brute_force_best_with(bench: &TabularBenchmark, exec: Exec) -> Result<(Genotype, f64), OracleError> {
    if bench.is_empty() {
        return Err(OracleError::Empty);
    }
    if matches!(bench.provenance, Provenance::Generated { .. }) {
        let missing = bench.missing();
        if !missing.is_empty() {
            return Err(OracleError::Incomplete { missing });
        }
    }
    let entries: Vec<(&String, &f64)> = bench.scores.iter().collect();
    let shard = entries.len().div_ceil(64).max(1);
    let shards: Vec<&[(&String, &f64)]> = entries.chunks(shard).collect();
    let partial = par::map_slice(exec, &shards, |chunk| best_of(chunk.iter().map(|(k, v)| (k.as_str(), **v))));
    // Shards are in string order, so a strict comparison keeps the earliest tie.
    let (key, score) = best_of(partial.into_iter().flatten()).expect("non-empty table");
    Ok((string_to_genotype(key, &bench.ops)?, score))
}

fn best_of<'a>(items: impl Iterator<Item = (&'a str, f64)>) -> Option<(&'a str, f64)> {
    let mut best: Option<(&str, f64)> = None;
    for (k, v) in items {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((k, v)),
        }
    }
    best
}
