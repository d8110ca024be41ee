//! Sweep report emission: CSV, JSON, and gnuplot data files.
//!
//! The CSV schema is fixed (see [`CSV_HEADER`]); floats are written in
//! shortest-exponent form, which round-trips and is byte-stable across
//! runs. The JSON document nests the config echo, every row with its full
//! mode descriptor, the fits, and the exact exponent table for the sweep
//! dimension.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::exponents::exponent_table;
use crate::sweep::{SweepReport, SweepRow};
use crate::Result;

pub const CSV_HEADER: &str = "lambda,seed,resolution,mode,nodal_measure,ball_count,max_beta,\
df_ratio,min_pos_product,l1_norm,l2_norm,l6_norm,sup_norm,grad_sup,grad_ratio,l1_ratio,\
sogge_ratio_p6,dong_rel_err,error";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn csv_row(row: &SweepRow) -> String {
    match &row.metrics {
        Some(m) => format!(
            "{},{},{},{},{:e},{},{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},",
            row.lambda,
            row.seed,
            row.resolution,
            row.mode,
            m.nodal_measure,
            m.ball_count,
            m.max_beta,
            m.df_ratio,
            opt(m.min_pos_product),
            m.l1_norm,
            m.l2_norm,
            m.l6_norm,
            m.sup_norm,
            m.grad_sup,
            m.grad_ratio,
            m.l1_ratio,
            m.sogge_ratio_p6,
            opt(m.dong_rel_err),
        ),
        None => format!(
            "{},{},{},{}{}{}",
            row.lambda,
            row.seed,
            row.resolution,
            row.mode,
            ",".repeat(15),
            row.error.as_deref().unwrap_or_default().replace(',', ";"),
        ),
    }
}

/// One line per row, fixed header, deterministic bytes.
pub fn write_report_csv<W: Write>(report: &SweepReport, w: &mut W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in &report.rows {
        writeln!(w, "{}", csv_row(row))?;
    }
    Ok(())
}

/// Full nested report: config echo, rows with descriptors, fits, warnings,
/// and the exact exponent table for the sweep dimension.
pub fn write_report_json<W: Write>(report: &SweepReport, w: &mut W) -> Result<()> {
    let mut doc = serde_json::to_value(report)?;
    if let Ok(table) = exponent_table(report.config.domain.n as i64) {
        doc.as_object_mut()
            .expect("report serializes to an object")
            .insert("exponent_table".into(), table.to_json());
    }
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)?;
    Ok(())
}

/// Parse a JSON report back (descriptors included).
pub fn read_report_json(bytes: &[u8]) -> Result<SweepReport> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Gnuplot-ready data: commented header, lambda ascending, one row per
/// measurement.
pub fn write_report_gnuplot<W: Write>(report: &SweepReport, w: &mut W) -> Result<()> {
    writeln!(
        w,
        "# lambda seed nodal_measure ball_count max_beta min_pos_product l1_norm grad_sup"
    )?;
    for row in &report.rows {
        if let Some(m) = &row.metrics {
            writeln!(
                w,
                "{} {} {:e} {} {:e} {} {:e} {:e}",
                row.lambda,
                row.seed,
                m.nodal_measure,
                m.ball_count,
                m.max_beta,
                opt(m.min_pos_product),
                m.l1_norm,
                m.grad_sup,
            )?;
        }
    }
    Ok(())
}

/// Fits as a small standalone CSV.
pub fn write_fits_csv<W: Write>(report: &SweepReport, w: &mut W) -> Result<()> {
    writeln!(w, "quantity,slope,intercept,r2")?;
    for f in &report.fits {
        writeln!(w, "{},{:e},{:e},{:e}", f.quantity, f.slope, f.intercept, f.r2)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Gnuplot,
}

impl std::str::FromStr for ReportFormat {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "gnuplot" => Ok(ReportFormat::Gnuplot),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown format {other:?} (expected csv, json, or gnuplot)"
            ))),
        }
    }
}

/// Write `sweep.csv`, `sweep.json`, `sweep.dat` and `fits.csv` into a
/// directory; returns the paths written.
pub fn emit_report(report: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("sweep.csv");
    write_report_csv(report, &mut std::fs::File::create(&csv_path)?)?;
    written.push(csv_path);
    let json_path = dir.join("sweep.json");
    write_report_json(report, &mut std::fs::File::create(&json_path)?)?;
    written.push(json_path);
    let dat_path = dir.join("sweep.dat");
    write_report_gnuplot(report, &mut std::fs::File::create(&dat_path)?)?;
    written.push(dat_path);
    let fits_path = dir.join("fits.csv");
    write_fits_csv(report, &mut std::fs::File::create(&fits_path)?)?;
    written.push(fits_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{run_sweep, SweepConfig};

    fn small_report() -> SweepReport {
        let mut config = SweepConfig::random_waves(vec![25], vec![1, 2]);
        config.samples_per_wavelength = 16;
        run_sweep(&config).unwrap()
    }

    #[test]
    fn csv_shape_matches_row_count() {
        let report = small_report();
        let mut buf = Vec::new();
        write_report_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), report.rows.len() + 1);
        assert!(text.starts_with("lambda,seed,resolution,mode,"));
        let columns = CSV_HEADER.split(',').count();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), columns, "line {line:?}");
        }
    }

    #[test]
    fn failed_rows_keep_the_csv_schema() {
        let mut config = SweepConfig::random_waves(vec![3], vec![1]);
        config.samples_per_wavelength = 16;
        let report = run_sweep(&config).unwrap();
        assert!(report.rows[0].error.is_some());
        let mut buf = Vec::new();
        write_report_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let columns = CSV_HEADER.split(',').count();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), columns, "line {line:?}");
        }
    }

    #[test]
    fn json_round_trip_preserves_the_report() {
        let report = small_report();
        let mut buf = Vec::new();
        write_report_json(&report, &mut buf).unwrap();
        let back = read_report_json(&buf).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn gnuplot_lambda_column_ascends() {
        let mut config = SweepConfig::random_waves(vec![100, 25], vec![1]);
        config.samples_per_wavelength = 16;
        let report = run_sweep(&config).unwrap();
        let mut buf = Vec::new();
        write_report_gnuplot(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lambdas: Vec<u64> = text
            .lines()
            .skip(1)
            .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
            .collect();
        assert!(lambdas.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn emitted_bytes_are_identical_across_runs() {
        let mut config = SweepConfig::random_waves(vec![25, 100], vec![1, 2]);
        config.samples_per_wavelength = 16;
        let mut first = Vec::new();
        write_report_csv(&run_sweep(&config).unwrap(), &mut first).unwrap();
        let mut second = Vec::new();
        write_report_csv(&run_sweep(&config).unwrap(), &mut second).unwrap();
        assert_eq!(first, second);
    }
}
