//! Mean and standard error across seeds at each recorded iteration.

use crate::error::{HarnessError, Result};
use crate::record::{format_float, read_csv, RunRecord, METRICS};
use crate::run::RECORDS_CSV;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub iteration: usize,
    pub seeds: usize,
    /// `(mean, standard error)` per metric, in [`METRICS`] order.
    pub stats: Vec<(f64, f64)>,
}

/// Mean and `sd / √n` (sample standard deviation) of the finite values.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn summarize_records(records: &[RunRecord]) -> Result<Vec<SummaryRow>> {
    let mut by_seed: BTreeMap<u64, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_seed.entry(r.seed).or_default().push(r);
    }
    if by_seed.len() < 2 {
        return Err(HarnessError::Runtime(format!("summaries need at least 2 seeds, found {}", by_seed.len())));
    }
    let grids: Vec<(u64, Vec<usize>)> =
        by_seed.iter().map(|(s, rs)| (*s, rs.iter().map(|r| r.iteration).collect())).collect();
    let (first_seed, grid) = &grids[0];
    for (seed, g) in &grids[1..] {
        if g != grid {
            return Err(HarnessError::Runtime(format!(
                "iteration grids differ between seed {first_seed} and seed {seed}; cannot align"
            )));
        }
    }
    let rows = grid
        .iter()
        .enumerate()
        .map(|(pos, &iteration)| {
            let stats = METRICS
                .iter()
                .map(|m| {
                    let vals: Vec<f64> = by_seed.values().map(|rs| rs[pos].metric(m).expect("known metric")).collect();
                    mean_se(&vals)
                })
                .collect();
            SummaryRow { iteration, seeds: by_seed.len(), stats }
        })
        .collect();
    Ok(rows)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("iteration,seeds");
    for m in METRICS {
        write!(out, ",{m}_mean,{m}_se").expect("writing to a String");
    }
    out.push('\n');
    for r in rows {
        write!(out, "{},{}", r.iteration, r.seeds).expect("writing to a String");
        for (mean, se) in &r.stats {
            write!(out, ",{},{}", format_float(*mean), format_float(*se)).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

/// Whitespace-separated `iteration mean se` table for one metric.
pub fn gnuplot_table(rows: &[SummaryRow], metric: usize) -> String {
    let mut out = format!("# iteration {0}_mean {0}_se\n", METRICS[metric]);
    for r in rows {
        let (m, s) = r.stats[metric];
        writeln!(out, "{} {} {}", r.iteration, format_float(m), format_float(s)).expect("writing to a String");
    }
    out
}

/// Reads `records.csv` from `out_dir`, writes `summary.csv` and one
/// `<metric>.dat` file per metric next to it.
pub fn summarize(out_dir: &Path) -> Result<(Vec<SummaryRow>, Vec<PathBuf>)> {
    let records = read_csv(&out_dir.join(RECORDS_CSV))?;
    let rows = summarize_records(&records)?;
    let mut written = Vec::new();
    let path = out_dir.join("summary.csv");
    fs::write(&path, summary_csv(&rows)).map_err(|e| HarnessError::io(&path, e))?;
    written.push(path);
    for (i, m) in METRICS.iter().enumerate() {
        let path = out_dir.join(format!("{m}.dat"));
        fs::write(&path, gnuplot_table(&rows, i)).map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    Ok((rows, written))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(seed: u64, iteration: usize, igd: f64) -> RunRecord {
        RunRecord {
            seed,
            iteration,
            hv: 1.0,
            igd,
            igd_plus: igd,
            fill_distance: 2.0 * igd,
            feasible_ratio: 1.0,
            wall_seconds: 0.0,
            flags: vec![],
        }
    }

    #[test]
    fn two_seed_mean_and_standard_error() {
        let rows = summarize_records(&[rec(1, 5, 0.2), rec(2, 5, 0.4)]).unwrap();
        assert_eq!(rows.len(), 1);
        let (mean, se) = rows[0].stats[1];
        assert!((mean - 0.3).abs() < 1e-15);
        // sd = 0.1·√2, se = sd/√2 = 0.1
        assert!((se - 0.1).abs() < 1e-15);
        assert_eq!(rows[0].stats[0], (1.0, 0.0));
    }

    #[test]
    fn one_row_per_iteration() {
        let rs: Vec<RunRecord> = (0..3).flat_map(|s| (1..=4).map(move |i| rec(s, i, 0.1 * i as f64))).collect();
        assert_eq!(summarize_records(&rs).unwrap().len(), 4);
    }

    #[test]
    fn misaligned_grids_and_single_seed_are_errors() {
        assert!(summarize_records(&[rec(1, 5, 0.2), rec(2, 6, 0.4)]).is_err());
        assert!(summarize_records(&[rec(1, 5, 0.2), rec(1, 6, 0.4)]).is_err());
    }

    #[test]
    fn missing_values_are_skipped() {
        assert_eq!(mean_se(&[f64::NAN, 2.0]), (2.0, 0.0));
        assert!(mean_se(&[f64::NAN]).0.is_nan());
    }
}
