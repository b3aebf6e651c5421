//! CSV emission and companion gnuplot scripts.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every value bit-for-bit.

use std::fs;
use std::path::{Path, PathBuf};

use super::convergence::ConvergenceRow;
use crate::error::{FemError, Result};
use crate::schemes::TimeSeriesRecord;

pub const CONVERGENCE_HEADER: [&str; 7] = ["level", "h", "dt", "l2_error", "l2_rate", "h1_error", "h1_rate"];
pub const DECAY_HEADER: [&str; 4] = ["t", "l2_norm", "h1_seminorm", "mu"];

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|e| FemError::InvalidConfig(format!("bad number `{s}` on CSV line {line}: {e}")))
}

pub fn convergence_csv_string(rows: &[ConvergenceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CONVERGENCE_HEADER)?;
    for r in rows {
        w.write_record([
            r.level.to_string(),
            fmt(r.h),
            fmt(r.dt),
            fmt(r.l2_error),
            fmt_opt(r.l2_rate),
            fmt(r.h1_error),
            fmt_opt(r.h1_rate),
        ])?;
    }
    finish(w)
}

pub fn decay_csv_string(series: &[TimeSeriesRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DECAY_HEADER)?;
    for r in series {
        w.write_record([fmt(r.t), fmt(r.l2_norm), fmt(r.h1_seminorm), fmt(r.mu)])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| FemError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}

/// Rows parsed back from a convergence CSV. `h1_full_error` is not stored and reads as NaN.
pub fn parse_convergence_csv(text: &str) -> Result<Vec<ConvergenceRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    check_header(rdr.headers()?, &CONVERGENCE_HEADER)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.trim().is_empty() {
                Ok(None)
            } else {
                parse_f64(s, line).map(Some)
            }
        };
        rows.push(ConvergenceRow {
            level: rec[0]
                .trim()
                .parse()
                .map_err(|e| FemError::InvalidConfig(format!("bad level on CSV line {line}: {e}")))?,
            h: parse_f64(&rec[1], line)?,
            dt: parse_f64(&rec[2], line)?,
            l2_error: parse_f64(&rec[3], line)?,
            l2_rate: opt(&rec[4])?,
            h1_error: parse_f64(&rec[5], line)?,
            h1_rate: opt(&rec[6])?,
            h1_full_error: f64::NAN,
        });
    }
    Ok(rows)
}

/// (t, l2_norm, h1_seminorm, mu) tuples from a decay CSV.
pub fn parse_decay_csv(text: &str) -> Result<Vec<[f64; 4]>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    check_header(rdr.headers()?, &DECAY_HEADER)?;
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let mut out = [0.0; 4];
            for (slot, field) in out.iter_mut().zip(rec.iter()) {
                *slot = parse_f64(field, i + 2)?;
            }
            Ok(out)
        })
        .collect()
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().eq(expected.iter().copied()) {
        Ok(())
    } else {
        Err(FemError::InvalidConfig(format!(
            "unexpected CSV header `{}` (expected `{}`)",
            found.iter().collect::<Vec<_>>().join(","),
            expected.join(",")
        )))
    }
}

pub fn write_convergence_csv(rows: &[ConvergenceRow], path: &Path) -> Result<PathBuf> {
    fs::write(path, convergence_csv_string(rows)?)?;
    let script = script_path(path);
    fs::write(&script, convergence_plot_script(path))?;
    Ok(script)
}

pub fn write_decay_csv(series: &[TimeSeriesRecord], path: &Path) -> Result<PathBuf> {
    fs::write(path, decay_csv_string(series)?)?;
    let script = script_path(path);
    fs::write(&script, decay_plot_script(path))?;
    Ok(script)
}

/// `out.csv` → `out.gp`
pub fn script_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("gp")
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn decay_plot_script(csv_path: &Path) -> String {
    let csv = file_name(csv_path);
    let png = file_name(&csv_path.with_extension("png"));
    format!(
        "# regenerate with: gnuplot {script}\n\
         set datafile separator ','\n\
         set terminal pngcairo size 800,600\n\
         set output '{png}'\n\
         set logscale y\n\
         set format y '10^{{%L}}'\n\
         set xlabel 't'\n\
         set ylabel 'norm'\n\
         set key top right\n\
         plot '{csv}' using 1:2 skip 1 with lines title '||U^n||', \\\n     \
         '{csv}' using 1:3 skip 1 with lines title '||grad U^n||'\n",
        script = file_name(&script_path(csv_path)),
    )
}

pub fn convergence_plot_script(csv_path: &Path) -> String {
    let csv = file_name(csv_path);
    let png = file_name(&csv_path.with_extension("png"));
    format!(
        "# regenerate with: gnuplot {script}\n\
         set datafile separator ','\n\
         set terminal pngcairo size 800,600\n\
         set output '{png}'\n\
         set logscale xy\n\
         set xlabel 'h'\n\
         set ylabel 'error at final time'\n\
         set key bottom right\n\
         plot '{csv}' using 2:4 skip 1 with linespoints title 'L2', \\\n     \
         '{csv}' using 2:6 skip 1 with linespoints title 'H1 seminorm', \\\n     \
         '{csv}' using 2:($2**2) skip 1 with lines dashtype 2 title 'h^2', \\\n     \
         '{csv}' using 2:2 skip 1 with lines dashtype 3 title 'h'\n",
        script = file_name(&script_path(csv_path)),
    )
}
