use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::{MonitorLog, RunResult};
use super::study::{Comparison, ConvergenceReport};
use crate::error::Result;
use crate::grid::Grid;
use crate::models::Model;
use crate::state::SystemState;

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x}")
}

fn line(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let fields: Vec<String> = fields.into_iter().collect();
    out.push_str(&fields.join(","));
    out.push('\n');
}

/// Columns `scheme,n,dx,l1_error,rate`; the rate is empty on the coarsest level.
pub fn report_csv(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    line(&mut out, ["scheme", "n", "dx", "l1_error", "rate"].map(String::from));
    for r in &report.rows {
        line(
            &mut out,
            [
                r.scheme.to_string(),
                r.level.to_string(),
                num(r.dx),
                num(r.l1_error),
                r.rate.map(num).unwrap_or_default(),
            ],
        );
    }
    out
}

/// Columns `x`, one per species, then the model's derived columns.
pub fn snapshot_csv(model: &dyn Model, grid: &Grid, state: &SystemState) -> String {
    let mut out = String::new();
    let names = model.species_names();
    let extra = model.extra_columns();
    line(
        &mut out,
        std::iter::once("x".to_string())
            .chain(names.iter().map(|s| s.to_string()))
            .chain(extra.iter().map(|s| s.to_string())),
    );
    let mut point = vec![0.0; state.species_count()];
    for (j, x) in grid.centers().into_iter().enumerate() {
        for (k, slot) in point.iter_mut().enumerate() {
            *slot = state.species(k)[j];
        }
        line(
            &mut out,
            std::iter::once(num(x))
                .chain(point.iter().map(|&v| num(v)))
                .chain(model.extra_values(&point).into_iter().map(num)),
        );
    }
    out
}

/// One row per recorded step: time, per-species mass, min, max, total
/// variation, and the CFL number.
pub fn monitor_csv(model: &dyn Model, log: &MonitorLog) -> String {
    let mut out = String::new();
    let names = model.species_names();
    let mut header = vec!["step".to_string(), "time".to_string()];
    for prefix in ["mass", "min", "max", "tv"] {
        header.extend(names.iter().map(|n| format!("{prefix}_{n}")));
    }
    header.push("cfl_number".into());
    line(&mut out, header);
    for e in &log.entries {
        let mut row = vec![e.step.to_string(), num(e.time)];
        for series in [&e.mass, &e.min, &e.max, &e.total_variation] {
            row.extend(series.iter().map(|&v| num(v)));
        }
        row.push(num(e.cfl_number));
        line(&mut out, row);
    }
    out
}

/// Columns `x`, then `<scheme>_<species>` for every run, then
/// `reference_<species>`.
pub fn comparison_csv(model: &dyn Model, cmp: &Comparison) -> String {
    let mut out = String::new();
    let names = model.species_names();
    let mut header = vec!["x".to_string()];
    for run in &cmp.runs {
        header.extend(names.iter().map(|n| format!("{}_{n}", run.scheme)));
    }
    header.extend(names.iter().map(|n| format!("reference_{n}")));
    line(&mut out, header);
    for (j, x) in cmp.grid.centers().into_iter().enumerate() {
        let mut row = vec![num(x)];
        for run in &cmp.runs {
            row.extend((0..names.len()).map(|k| num(run.state.species(k)[j])));
        }
        row.extend((0..names.len()).map(|k| num(cmp.reference.species(k)[j])));
        line(&mut out, row);
    }
    out
}

/// A one-line summary `scheme,level,steps,dt,lambda,cfl_violations`.
pub fn run_summary(run: &RunResult) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{},{},{},{},{},{}",
        run.scheme,
        run.level,
        run.steps,
        num(run.dt),
        num(run.lambda),
        run.log.cfl_violations
    );
    s
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
