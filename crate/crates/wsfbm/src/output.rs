//! CSV and JSON writers. Floats are printed with 9 significant digits.

use anyhow::{Context, Result};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use wsfbm_core::analysis::{LimitCheckReport, RegionScanResult};
use wsfbm_core::gp::PathEnsemble;
use wsfbm_core::simulate::PopulationRun;

/// Shortest of fixed or scientific notation with 9 significant digits, trailing
/// zeros removed (the C `%.9g` convention).
pub fn fmt_float(x: f64) -> String {
    fmt_significant(x, 9)
}

/// `%.{digits}g` formatting; `digits` is clamped to at least 1.
pub fn fmt_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{x:.prec$e}", prec = digits - 1);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("exponent");
    if (-4..digits as i32).contains(&exponent) {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exponent.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

/// `path_id,t,value`
pub fn write_paths(path: &Path, ensemble: &PathEnsemble) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["path_id", "t", "value"])?;
    for (id, values) in ensemble.paths.iter().enumerate() {
        for (t, v) in ensemble.grid.times().iter().zip(values) {
            w.write_record([id.to_string(), fmt_float(*t), fmt_float(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `replicate_id,t,functional,value`, with functionals `state:<j>` and
/// `occupation:<j>` for test function `j`.
pub fn write_replicates(path: &Path, run: &PopulationRun, times: &[f64], n_functions: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["replicate_id", "t", "functional", "value"])?;
    for r in &run.replicates {
        for j in 0..n_functions {
            for (k, t) in times.iter().enumerate() {
                w.write_record([r.index.to_string(), fmt_float(*t), format!("state:{j}"), fmt_float(r.state_at(j, k))])?;
            }
            if !r.occupation.is_empty() {
                for (k, t) in times.iter().enumerate() {
                    w.write_record([
                        r.index.to_string(),
                        fmt_float(*t),
                        format!("occupation:{j}"),
                        fmt_float(r.occupation_at(j, k)),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Rescaled fluctuation values as `replicate_id,t,functional,value`.
pub fn write_fluctuations(path: &Path, values: &[Vec<f64>], times: &[f64], functional: &str) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["replicate_id", "t", "functional", "value"])?;
    for (id, row) in values.iter().enumerate() {
        for (t, v) in times.iter().zip(row) {
            w.write_record([id.to_string(), fmt_float(*t), functional.to_string(), fmt_float(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `a,b,region,min_eig,verdict`
pub fn write_scan(path: &Path, results: &[RegionScanResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["a", "b", "region", "min_eig", "verdict"])?;
    for r in results {
        w.write_record([
            fmt_float(r.a),
            fmt_float(r.b),
            r.claimed_region.label().to_string(),
            fmt_float(r.min_eigenvalue),
            r.verdict.label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Row of a limit-check JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub statistic: f64,
    pub target: f64,
    pub abs_err: f64,
}

pub fn limit_rows(report: &LimitCheckReport) -> Vec<LimitRow> {
    report
        .horizons
        .iter()
        .zip(&report.statistics)
        .zip(&report.abs_errors)
        .map(|((&horizon, &statistic), &abs_err)| LimitRow {
            horizon,
            statistic,
            target: report.target,
            abs_err,
        })
        .collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_float(0.7810485835025399), "0.781048584");
        assert_eq!(fmt_float(1.0), "1");
        assert_eq!(fmt_float(-2.5), "-2.5");
        assert_eq!(fmt_float(123456789.4), "123456789");
        assert_eq!(fmt_float(1234567890.0), "1.23456789e+09");
        assert_eq!(fmt_float(1.5e-7), "1.5e-07");
        assert_eq!(fmt_float(0.0001), "0.0001");
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(f64::NAN), "NaN");
    }

    #[test]
    fn fewer_digits() {
        assert_eq!(fmt_significant(0.7810485835025399, 6), "0.781049");
        assert_eq!(fmt_significant(123456.7, 6), "123457");
        assert_eq!(fmt_significant(1234567.0, 6), "1.23457e+06");
        assert_eq!(fmt_significant(1e-5, 6), "1e-05");
        assert_eq!(fmt_significant(0.25, 1), "0.2");
    }
}
