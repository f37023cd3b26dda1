//! CSV formats for benchmark tables and search trajectories.
//!
//! Benchmark: header `genotype,score`, scores with 12 decimals.
//! Trajectory: header
//! `epoch,l_train,l_val,l_beta,m,genotype,oracle_score,e0_mean,e0_median,e0_std,…,e5_std`,
//! floats in scientific notation with 9 significant digits and an empty
//! `oracle_score` when no benchmark was attached. Readers reject any other
//! header and report 1-based line numbers.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::EdgeStats;
use crate::bilevel::TrajectoryRecord;
use crate::oracle::{Provenance, TabularBenchmark};
use crate::searchspace::{string_to_genotype, OpSet, NUM_EDGES};

pub const BENCHMARK_HEADER: [&str; 2] = ["genotype", "score"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
}

impl IoError {
    fn format(line: u64, message: impl Into<String>) -> Self {
        IoError::Format {
            line,
            message: message.into(),
        }
    }

    fn at(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
        move |source| IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn csv_error(e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::Io {
            path: PathBuf::new(),
            source,
        },
        kind => IoError::format(line, format!("{kind:?}")),
    }
}

/// Float in scientific notation with 9 significant digits.
pub fn fmt_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn trajectory_header() -> Vec<String> {
    let mut h: Vec<String> = ["epoch", "l_train", "l_val", "l_beta", "m", "genotype", "oracle_score"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for e in 0..NUM_EDGES {
        for stat in ["mean", "median", "std"] {
            h.push(format!("e{e}_{stat}"));
        }
    }
    h
}

pub fn write_benchmark<W: Write>(bench: &TabularBenchmark, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCHMARK_HEADER).map_err(csv_error)?;
    for (g, s) in bench.entries() {
        w.write_record([g, &format!("{s:.12}")]).map_err(csv_error)?;
    }
    w.flush().map_err(|e| IoError::Io {
        path: PathBuf::new(),
        source: e,
    })
}

pub fn read_benchmark<R: Read>(input: R, source: &Path) -> Result<TabularBenchmark, IoError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    match records.next() {
        Some(Ok(h)) if h.iter().eq(BENCHMARK_HEADER) => {}
        Some(Ok(h)) => {
            return Err(IoError::format(1, format!("expected header `genotype,score`, found `{}`", h.iter().collect::<Vec<_>>().join(","))))
        }
        Some(Err(e)) => return Err(csv_error(e)),
        None => return Err(IoError::format(1, "missing header")),
    }
    let ops = OpSet::canonical();
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(IoError::format(line, format!("expected 2 fields, found {}", rec.len())));
        }
        let score: f64 = rec[1]
            .parse()
            .map_err(|_| IoError::format(line, format!("invalid score `{}`", &rec[1])))?;
        string_to_genotype(&rec[0], &ops).map_err(|e| IoError::format(line, e.to_string()))?;
        if !seen.insert(rec[0].to_string()) {
            return Err(IoError::format(line, format!("duplicate genotype `{}`", &rec[0])));
        }
        entries.push((rec[0].to_string(), score));
    }
    TabularBenchmark::from_entries(
        entries,
        Provenance::Imported {
            path: source.to_path_buf(),
        },
    )
    .map_err(|e| IoError::format(0, e.to_string()))
}

pub fn save_benchmark(bench: &TabularBenchmark, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(IoError::at(path))?;
    write_benchmark(bench, BufWriter::new(file)).map_err(|e| with_path(e, path))
}

pub fn load_benchmark(path: &Path) -> Result<TabularBenchmark, IoError> {
    let file = File::open(path).map_err(IoError::at(path))?;
    read_benchmark(file, path).map_err(|e| with_path(e, path))
}

fn with_path(e: IoError, path: &Path) -> IoError {
    match e {
        IoError::Io { source, .. } => IoError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

pub fn write_trajectory<W: Write>(records: &[TrajectoryRecord], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header()).map_err(csv_error)?;
    for r in records {
        if r.edges.len() != NUM_EDGES {
            return Err(IoError::format(0, format!("epoch {} has {} edges, expected {NUM_EDGES}", r.epoch, r.edges.len())));
        }
        let mut row = vec![
            r.epoch.to_string(),
            fmt_sig9(r.l_train),
            fmt_sig9(r.l_val),
            fmt_sig9(r.l_beta),
            r.m.to_string(),
            r.genotype.clone(),
            r.oracle_score.map(fmt_sig9).unwrap_or_default(),
        ];
        for s in &r.edges {
            row.extend([fmt_sig9(s.mean), fmt_sig9(s.median), fmt_sig9(s.std)]);
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| IoError::Io {
        path: PathBuf::new(),
        source: e,
    })
}

pub fn read_trajectory<R: Read>(input: R) -> Result<Vec<TrajectoryRecord>, IoError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let expected = trajectory_header();
    let mut records = r.records();
    match records.next() {
        Some(Ok(h)) if h.iter().eq(expected.iter().map(String::as_str)) => {}
        Some(Ok(_)) => return Err(IoError::format(1, format!("expected header `{}`", expected.join(",")))),
        Some(Err(e)) => return Err(csv_error(e)),
        None => return Err(IoError::format(1, "missing header")),
    }
    let mut out: Vec<TrajectoryRecord> = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != expected.len() {
            return Err(IoError::format(line, format!("expected {} fields, found {}", expected.len(), rec.len())));
        }
        let float = |i: usize| -> Result<f64, IoError> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| IoError::format(line, format!("column `{}`: invalid number `{}`", expected[i], &rec[i])))
        };
        let int = |i: usize| -> Result<usize, IoError> {
            rec[i]
                .parse::<usize>()
                .map_err(|_| IoError::format(line, format!("column `{}`: invalid integer `{}`", expected[i], &rec[i])))
        };
        let epoch = int(0)?;
        if let Some(prev) = out.last() {
            if epoch <= prev.epoch {
                return Err(IoError::format(line, format!("epoch {epoch} does not follow epoch {}", prev.epoch)));
            }
        }
        let oracle_score = if rec[6].is_empty() { None } else { Some(float(6)?) };
        let mut edges = Vec::with_capacity(NUM_EDGES);
        for e in 0..NUM_EDGES {
            let base = 7 + 3 * e;
            edges.push(EdgeStats {
                mean: float(base)?,
                median: float(base + 1)?,
                std: float(base + 2)?,
            });
        }
        out.push(TrajectoryRecord {
            epoch,
            l_train: float(1)?,
            l_val: float(2)?,
            l_beta: float(3)?,
            m: int(4)?,
            genotype: rec[5].to_string(),
            oracle_score,
            edges,
        });
    }
    Ok(out)
}

pub fn save_trajectory(records: &[TrajectoryRecord], path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(IoError::at(path))?;
    write_trajectory(records, BufWriter::new(file)).map_err(|e| with_path(e, path))
}

pub fn load_trajectory(path: &Path) -> Result<Vec<TrajectoryRecord>, IoError> {
    let file = File::open(path).map_err(IoError::at(path))?;
    read_trajectory(file).map_err(|e| with_path(e, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::generate_benchmark;

    fn record(epoch: usize, score: Option<f64>) -> TrajectoryRecord {
        TrajectoryRecord {
            epoch,
            l_train: 0.693147180559945,
            l_val: 1.0 / 3.0,
            l_beta: 1.6094379124341003,
            m: epoch.min(6),
            genotype: "|lin~0|+|lin~0|lin~1|+|lin~0|lin~1|lin~2|".into(),
            oracle_score: score,
            edges: (0..6)
                .map(|e| EdgeStats {
                    mean: e as f64 * 0.1,
                    median: -1e-7,
                    std: 12345.678912345,
                })
                .collect(),
        }
    }

    #[test]
    fn benchmark_round_trip() {
        let bench = generate_benchmark(0);
        let mut buf = Vec::new();
        write_benchmark(&bench, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("genotype,score\n"));
        assert_eq!(text.lines().count(), 15626);
        let back = read_benchmark(buf.as_slice(), Path::new("mem.csv")).unwrap();
        assert_eq!(back.len(), bench.len());
        for ((g1, s1), (g2, s2)) in bench.entries().zip(back.entries()) {
            assert_eq!(g1, g2);
            assert!((s1 - s2).abs() < 1e-12);
        }
    }

    #[test]
    fn benchmark_header_is_exact() {
        let err = read_benchmark("genotype,Score\n".as_bytes(), Path::new("x")).unwrap_err();
        assert!(matches!(err, IoError::Format { line: 1, .. }));
    }

    #[test]
    fn benchmark_bad_score_reports_line() {
        let text = "genotype,score\n|lin~0|+|lin~0|lin~1|+|lin~0|lin~1|lin~2|,0.5\n|skip~0|+|skip~0|skip~1|+|skip~0|skip~1|skip~2|,abc\n";
        match read_benchmark(text.as_bytes(), Path::new("x")).unwrap_err() {
            IoError::Format { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trajectory_round_trip_is_stable() {
        let recs = vec![record(0, None), record(1, Some(0.987654321)), record(2, Some(1e-3))];
        let mut a = Vec::new();
        write_trajectory(&recs, &mut a).unwrap();
        let back = read_trajectory(a.as_slice()).unwrap();
        let mut b = Vec::new();
        write_trajectory(&back, &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(back[0].oracle_score, None);
        assert_eq!(back[1].oracle_score, Some(0.987654321));
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(
            "epoch,l_train,l_val,l_beta,m,genotype,oracle_score,e0_mean,e0_median,e0_std,"
        ));
        assert!(text.lines().next().unwrap().ends_with("e5_mean,e5_median,e5_std"));
    }

    #[test]
    fn trajectory_rejects_bad_rows() {
        let mut buf = Vec::new();
        write_trajectory(&[record(0, None)], &mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("1,nan-ish,0,0,0,g,,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n");
        match read_trajectory(text.as_bytes()).unwrap_err() {
            IoError::Format { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("l_train"));
            }
            other => panic!("{other:?}"),
        }
        let dup = {
            let mut b = Vec::new();
            write_trajectory(&[record(0, None), record(0, None)], &mut b).unwrap();
            b
        };
        assert!(matches!(read_trajectory(dup.as_slice()), Err(IoError::Format { line: 3, .. })));
    }
}
