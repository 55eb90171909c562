//! CSV and JSON writers for scan tables, plus gnuplot scripts.
//!
//! CSV layout: `#`-prefixed comment lines (the resolved configuration, row
//! flags, peaks) around the header `E,total_R,total_T,loss,delta,gamma,open_count`.
//! Reals are written with 17 significant digits so tables parse back exactly.
//! A flagged row keeps its energy, leaves every other field empty, and is
//! preceded by a `# flag:` line naming the error.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{Peak, RowFlag, RowValues, ScanOutput, SpectrumRow};

use super::config::RunConfig;

pub const CSV_HEADER: &str = "E,total_R,total_T,loss,delta,gamma,open_count";

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Renders a scan as CSV with the configuration embedded as a comment.
pub fn spectrum_csv(label: &str, config: &RunConfig, output: &ScanOutput) -> String {
    let mut out = String::new();
    let config_json = serde_json::to_string(config).expect("config serializes");
    let _ = writeln!(out, "# label: {label}");
    let _ = writeln!(out, "# config: {config_json}");
    let _ = writeln!(out, "{CSV_HEADER}");
    for row in &output.rows {
        match (&row.values, &row.flag) {
            (Some(v), _) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    fmt_real(row.energy),
                    fmt_real(v.total_r),
                    fmt_real(v.total_t),
                    fmt_opt(v.loss),
                    fmt_real(v.delta),
                    fmt_real(v.gamma),
                    v.open_count
                );
            }
            (None, flag) => {
                let (kind, message) = flag
                    .as_ref()
                    .map_or(("Unknown", ""), |f| (f.kind.as_str(), f.message.as_str()));
                let _ = writeln!(out, "# flag: {kind}: {message}");
                let _ = writeln!(out, "{},,,,,,", fmt_real(row.energy));
            }
        }
    }
    for peak in &output.peaks {
        let _ = writeln!(
            out,
            "# peak: E={} total_R={} grid_index={} grid_E={} grid_total_R={}",
            fmt_real(peak.energy),
            fmt_real(peak.total_r),
            peak.grid_index,
            fmt_real(peak.grid_energy),
            fmt_real(peak.grid_total_r)
        );
    }
    out
}

/// Lines of `csv` that are not comments.
pub fn csv_body(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}

fn parse_real(field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad number `{field}` in CSV")))
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_real(field).map(Some)
    }
}

/// Parses rows written by [`spectrum_csv`].
pub fn parse_spectrum_csv(csv: &str) -> Result<Vec<SpectrumRow>> {
    let mut rows = Vec::new();
    let mut pending_flag: Option<RowFlag> = None;
    let mut seen_header = false;
    for line in csv.lines() {
        if let Some(flag) = line.strip_prefix("# flag: ") {
            let (kind, message) = flag.split_once(": ").unwrap_or((flag, ""));
            pending_flag = Some(RowFlag {
                kind: kind.into(),
                message: message.into(),
            });
            continue;
        }
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != CSV_HEADER {
                return Err(Error::InvalidInput(format!("unexpected CSV header `{line}`")));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::InvalidInput(format!("expected 7 fields in `{line}`")));
        }
        let energy = parse_real(fields[0])?;
        if fields[1..].iter().all(|f| f.is_empty()) {
            rows.push(SpectrumRow {
                energy,
                values: None,
                flag: pending_flag.take(),
            });
            continue;
        }
        rows.push(SpectrumRow {
            energy,
            values: Some(RowValues {
                total_r: parse_real(fields[1])?,
                total_t: parse_real(fields[2])?,
                loss: parse_opt(fields[3])?,
                delta: parse_real(fields[4])?,
                gamma: parse_real(fields[5])?,
                open_count: fields[6]
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad count `{}`", fields[6])))?,
            }),
            flag: None,
        });
        pending_flag = None;
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SpectrumDocument<'a> {
    label: &'a str,
    config: &'a RunConfig,
    rows: &'a [SpectrumRow],
    peaks: &'a [Peak],
}

pub fn spectrum_json(label: &str, config: &RunConfig, output: &ScanOutput) -> String {
    let doc = SpectrumDocument {
        label,
        config,
        rows: &output.rows,
        peaks: &output.peaks,
    };
    serde_json::to_string_pretty(&doc).expect("document serializes")
}

/// `{config, result}` document for non-scan subcommands.
pub fn result_json<C: Serialize, R: Serialize>(config: &C, result: &R) -> String {
    serde_json::to_string_pretty(&serde_json::json!({ "config": config, "result": result }))
        .expect("document serializes")
}

/// A plain CSV table with the configuration as a leading comment.
pub fn table_csv<C: Serialize>(config: &C, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config: {}", serde_json::to_string(config).expect("config serializes"));
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// gnuplot script drawing `total_R` of each CSV file.
pub fn gnuplot_script(title: &str, files: &[(String, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set title '{title}'");
    let _ = writeln!(out, "set xlabel 'E (units of pi/a)'");
    let _ = writeln!(out, "set ylabel 'R'");
    let _ = writeln!(out, "set yrange [0:1.05]");
    let _ = writeln!(out, "set key top left");
    let plots: Vec<String> = files
        .iter()
        .map(|(file, label)| format!("'{file}' skip 1 using 1:2 with lines title '{label}'"))
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}
