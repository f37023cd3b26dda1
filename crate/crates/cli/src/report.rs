//! Markdown summary of a search trajectory.

use std::fmt::Write;

use bdpp::bilevel::{CriteriaTracker, Criterion, TrajectoryRecord};
use bdpp::oracle::{brute_force_best, TabularBenchmark};
use bdpp::searchspace::{genotype_to_string, NUM_EDGES};

use crate::CliError;

fn score_of(r: &TrajectoryRecord, bench: Option<&TabularBenchmark>) -> Option<f64> {
    match bench {
        Some(b) => b.lookup(&r.genotype).ok(),
        None => r.oracle_score,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |s| format!("{s:.6}"))
}

/// Render the report. Output depends only on the records and the table.
pub fn render(records: &[TrajectoryRecord], bench: Option<&TabularBenchmark>) -> Result<String, CliError> {
    let last = records.last().ok_or_else(|| CliError::Usage("trajectory has no epochs".into()))?;
    let mut tracker = CriteriaTracker::new(NUM_EDGES);
    for r in records {
        tracker.observe(r.epoch, r.m);
    }
    let fired = tracker.fired();
    let at = |epoch: usize| records.iter().find(|r| r.epoch == epoch);

    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "# Search report\n").unwrap();
    writeln!(w, "## Summary\n").unwrap();
    writeln!(w, "- epochs recorded: {}", records.len()).unwrap();
    writeln!(w, "- final genotype: `{}`", last.genotype).unwrap();
    writeln!(w, "- final score: {}", fmt_opt(score_of(last, bench))).unwrap();
    writeln!(w, "- determined edges at the end: {}/{}", last.m, NUM_EDGES).unwrap();
    writeln!(w, "- final L_train {:.6}, L_val {:.6}, L_Beta {:.6}", last.l_train, last.l_val, last.l_beta).unwrap();

    writeln!(w, "\n## Early-stop criteria\n").unwrap();
    writeln!(w, "| criterion | epoch | genotype | score |").unwrap();
    writeln!(w, "|---|---|---|---|").unwrap();
    let mut rows: Vec<(String, &TrajectoryRecord)> = Vec::new();
    for c in [Criterion::C1, Criterion::C2, Criterion::C3] {
        match fired.get(c).and_then(at) {
            Some(r) => {
                writeln!(w, "| {} | {} | `{}` | {} |", c.name(), r.epoch, r.genotype, fmt_opt(score_of(r, bench))).unwrap();
                rows.push((c.name().to_string(), r));
            }
            None => writeln!(w, "| {} | not fired | | |", c.name()).unwrap(),
        }
    }
    writeln!(w, "| last | {} | `{}` | {} |", last.epoch, last.genotype, fmt_opt(score_of(last, bench))).unwrap();
    rows.push(("last".to_string(), last));

    if let Some(b) = bench {
        let (best, best_score) = brute_force_best(b)?;
        let best_str = genotype_to_string(&best, b.ops())?;
        writeln!(w, "\n## Regret\n").unwrap();
        writeln!(w, "Optimum `{best_str}` scores {best_score:.6}.\n").unwrap();
        writeln!(w, "| point | epoch | score | regret |").unwrap();
        writeln!(w, "|---|---|---|---|").unwrap();
        for (name, r) in &rows {
            let s = score_of(r, bench);
            let regret = s.map(|s| best_score - s);
            writeln!(w, "| {name} | {} | {} | {} |", r.epoch, fmt_opt(s), fmt_opt(regret)).unwrap();
        }
    }

    writeln!(w, "\n## Final α statistics\n").unwrap();
    writeln!(w, "| edge | mean | median | std |").unwrap();
    writeln!(w, "|---|---|---|---|").unwrap();
    for (e, s) in last.edges.iter().enumerate() {
        writeln!(w, "| {e} | {:.6} | {:.6} | {:.6} |", s.mean, s.median, s.std).unwrap();
    }

    writeln!(w, "\n## Trajectory\n").unwrap();
    writeln!(w, "| epoch | L_train | L_val | L_Beta | m | Σ std | genotype | score |").unwrap();
    writeln!(w, "|---|---|---|---|---|---|---|---|").unwrap();
    for r in records {
        let total_std: f64 = r.edges.iter().map(|s| s.std).sum();
        writeln!(
            w,
            "| {} | {:.6} | {:.6} | {:.6} | {} | {:.6} | `{}` | {} |",
            r.epoch,
            r.l_train,
            r.l_val,
            r.l_beta,
            r.m,
            total_std,
            r.genotype,
            fmt_opt(score_of(r, bench))
        )
        .unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bdpp::analysis::EdgeStats;
    use bdpp::oracle::generate_benchmark;

    const G: &str = "|lin~0|+|lin~0|lin~1|+|lin~0|lin~1|lin~2|";

    fn record(epoch: usize, m: usize) -> TrajectoryRecord {
        TrajectoryRecord {
            epoch,
            l_train: 0.5,
            l_val: 0.6,
            l_beta: 1.6,
            m,
            genotype: G.to_string(),
            oracle_score: Some(0.5),
            edges: vec![
                EdgeStats {
                    mean: 0.0,
                    median: 0.0,
                    std: 0.1,
                };
                NUM_EDGES
            ],
        }
    }

    #[test]
    fn lists_fired_criteria() {
        let recs: Vec<_> = [0, 0, 1, 2, 3, 4, 6].iter().enumerate().map(|(e, &m)| record(e, m)).collect();
        let md = render(&recs, None).unwrap();
        assert!(md.contains("| c1 | 2 |"));
        assert!(md.contains("| c2 | 4 |"));
        assert!(md.contains("| c3 | 6 |"));
        assert!(!md.contains("## Regret"));
    }

    #[test]
    fn regret_only_with_benchmark() {
        let recs = vec![record(0, 0), record(1, 1)];
        let bench = generate_benchmark(0);
        let md = render(&recs, Some(&bench)).unwrap();
        assert!(md.contains("## Regret"));
        assert!(md.contains("| c2 | not fired |"));
        assert_eq!(md, render(&recs, Some(&bench)).unwrap());
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        assert!(render(&[], None).is_err());
    }
}
