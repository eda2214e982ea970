//! CSV, JSON and SVG emission. CSV is the authoritative artifact; values
//! are written with 17 significant digits so they re-parse exactly.

use std::fs;
use std::path::{Path, PathBuf};

use magnon_blockade::nonreciprocity::SweepResult;
use serde::Serialize;

use crate::config::Format;
use crate::figures::{Figure, Plot};
use crate::svg;
use crate::CliError;

pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io(path, e))?;
    text.push('\n');
    write(path, text.as_bytes())
}

/// Rows of strings to RFC-4180 CSV.
pub fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn figure_csv(fig: &Figure) -> Result<Vec<u8>, CliError> {
    match &fig.plot {
        Plot::Lines { x_name, x, curves } => {
            let mut header = vec![x_name.clone()];
            for c in curves {
                header.push(c.label.clone());
                if c.branches.is_some() {
                    header.push(format!("{} g2 forward", c.label));
                    header.push(format!("{} g2 backward", c.label));
                }
            }
            let rows = (0..x.len()).map(|i| {
                let mut row = vec![num(x[i])];
                for c in curves {
                    row.push(num(c.values[i]));
                    if let Some((f, b)) = &c.branches {
                        row.push(num(f[i]));
                        row.push(num(b[i]));
                    }
                }
                row
            });
            csv_bytes(&header, rows)
        }
        Plot::Map {
            x_name,
            y_name,
            x,
            y,
            values,
            ..
        } => {
            let header = vec![x_name.clone(), y_name.clone(), fig.observable.clone()];
            let rows =
                (0..values.len()).map(|k| vec![num(x[k / y.len()]), num(y[k % y.len()]), num(values[k])]);
            csv_bytes(&header, rows)
        }
    }
}

/// Column names of a sweep: axis names, then one value column per result.
pub fn sweep_header(results: &[(String, SweepResult)]) -> Vec<String> {
    let first = &results[0].1;
    let mut header: Vec<String> = first.axes.iter().map(|a| a.param.name().to_string()).collect();
    for (name, r) in results {
        header.push(name.clone());
        if r.branches.is_some() {
            header.push(format!("{name}_g2_forward"));
            header.push(format!("{name}_g2_backward"));
        }
    }
    header
}

/// One row per cell, axis columns first. All results share the same grid.
pub fn sweep_csv(results: &[(String, SweepResult)]) -> Result<Vec<u8>, CliError> {
    let first = &results[0].1;
    let rows = (0..first.len()).map(|k| {
        let mut row: Vec<String> = first.coords(k).into_iter().map(num).collect();
        for (_, r) in results {
            row.push(num(r.values[k]));
            if let Some((f, b)) = &r.branches {
                row.push(num(f[k]));
                row.push(num(b[k]));
            }
        }
        row
    });
    csv_bytes(&sweep_header(results), rows)
}

pub fn write_figure(
    fig: &Figure,
    dir: &Path,
    formats: &[Format],
    snapshot: &serde_json::Value,
) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let mut out = |ext: &str, bytes: Vec<u8>| -> Result<(), CliError> {
        let p = dir.join(format!("{}.{ext}", fig.name));
        write(&p, &bytes)?;
        written.push(p);
        Ok(())
    };
    if formats.contains(&Format::Csv) {
        out("csv", figure_csv(fig)?)?;
    }
    if formats.contains(&Format::Svg) {
        out("svg", svg::figure(fig).into_bytes())?;
    }
    if formats.contains(&Format::Json) {
        out(
            "json",
            serde_json::to_vec_pretty(&fig.plot).map_err(|e| CliError::Io(e.to_string()))?,
        )?;
    }
    let meta = serde_json::json!({
        "name": fig.name,
        "title": fig.title,
        "observable": fig.observable,
        "solvers": fig.solvers,
        "params": fig.params,
        "assumptions": fig.assumptions,
        "warnings": fig.warnings,
        "diagnostics": fig.diagnostics,
        "config": snapshot,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let p = dir.join(format!("{}.meta.json", fig.name));
    write_json(&p, &meta)?;
    written.push(p);
    Ok(written)
}

pub fn write_sweep(
    name: &str,
    results: &[(String, SweepResult)],
    dir: &Path,
    formats: &[Format],
    snapshot: &serde_json::Value,
) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    if formats.contains(&Format::Csv) {
        let p = dir.join(format!("{name}.csv"));
        write(&p, &sweep_csv(results)?)?;
        written.push(p);
    }
    if formats.contains(&Format::Json) {
        let p = dir.join(format!("{name}.json"));
        let all: Vec<_> = results
            .iter()
            .map(|(n, r)| serde_json::json!({"column": n, "result": r}))
            .collect();
        write_json(&p, &all)?;
        written.push(p);
    }
    if formats.contains(&Format::Svg) {
        let p = dir.join(format!("{name}.svg"));
        write(&p, svg::sweep(results).as_bytes())?;
        written.push(p);
    }
    let failures: usize = results.iter().map(|(_, r)| r.failures.len()).sum();
    let meta = serde_json::json!({
        "name": name,
        "columns": sweep_header(results),
        "solvers": results.iter().map(|(_, r)| r.metadata.solver.name()).collect::<Vec<_>>(),
        "template": results[0].1.metadata.template,
        "observable": results[0].1.metadata.observable,
        "failed_cells": failures,
        "config": snapshot,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let p = dir.join(format!("{name}.meta.json"));
    write_json(&p, &meta)?;
    written.push(p);
    Ok(written)
}
