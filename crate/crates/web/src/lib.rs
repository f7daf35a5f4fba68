//! Browser bindings: shipped presets, side-by-side scheme runs and small
//! convergence studies.

use nonlocal_nt::harness::{convergence_study, run_simulation, Experiment, Preset, ReferenceCache};
use nonlocal_nt::state::init_cell_averages;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Finest grid the page may request.
pub const MAX_CELLS: usize = 4096;

#[derive(Serialize)]
struct PresetEntry {
    name: String,
    description: String,
    kind: &'static str,
    experiment: Experiment,
}

#[derive(Serialize)]
pub struct SchemeRun {
    pub scheme: String,
    pub values: Vec<Vec<f64>>,
    pub steps: usize,
    pub lambda: f64,
    pub mass_drift: f64,
    pub cfl_violations: usize,
}

#[derive(Serialize)]
pub struct Simulation {
    pub x: Vec<f64>,
    pub names: Vec<String>,
    pub initial: Vec<Vec<f64>>,
    pub runs: Vec<SchemeRun>,
}

fn parse(experiment: &str) -> Result<Experiment, String> {
    let exp: Experiment = serde_json::from_str(experiment).map_err(|e| format!("experiment: {e}"))?;
    Ok(exp)
}

fn check_size(exp: &Experiment, level: u32) -> Result<(), String> {
    let cells = exp.grid(level).map_err(|e| e.to_string())?.cells();
    if cells > MAX_CELLS {
        return Err(format!("{cells} cells exceed the demo limit of {MAX_CELLS}"));
    }
    Ok(())
}

/// First experiment of every shipped preset, as JSON.
pub fn presets_json() -> Result<String, String> {
    let entries: Vec<PresetEntry> = Preset::all()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|p| PresetEntry {
            kind: match p.kind {
                nonlocal_nt::harness::PresetKind::Table => "table",
                nonlocal_nt::harness::PresetKind::Figure => "figure",
            },
            experiment: p.experiments[0].clone(),
            name: p.name,
            description: p.description,
        })
        .collect();
    serde_json::to_string(&entries).map_err(|e| e.to_string())
}

/// Every configured scheme on one level, with the initial averages.
pub fn simulate_json(experiment: &str, level: u32) -> Result<String, String> {
    let exp = parse(experiment)?;
    check_size(&exp, level)?;
    let model = exp.build_model().map_err(|e| e.to_string())?;
    let grid = exp.grid(level).map_err(|e| e.to_string())?;
    let data = exp.initial.build().map_err(|e| e.to_string())?;
    let initial = init_cell_averages(&data, &grid).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for scheme in exp.schemes().map_err(|e| e.to_string())? {
        let run = run_simulation(&exp, scheme, level).map_err(|e| format!("{scheme}: {e}"))?;
        runs.push(SchemeRun {
            scheme: scheme.to_string(),
            values: run.state.values().to_vec(),
            steps: run.steps,
            lambda: run.lambda,
            mass_drift: run.log.max_relative_mass_drift(),
            cfl_violations: run.log.cfl_violations,
        });
    }
    let sim = Simulation {
        x: grid.centers(),
        names: model.species_names().iter().map(|s| s.to_string()).collect(),
        initial: initial.into_values(),
        runs,
    };
    serde_json::to_string(&sim).map_err(|e| e.to_string())
}

/// Convergence table of the experiment's levels against its reference.
pub fn converge_json(experiment: &str) -> Result<String, String> {
    let exp = parse(experiment)?;
    check_size(&exp, exp.reference_level)?;
    let report = convergence_study(&exp, &ReferenceCache::disabled()).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn presets() -> Result<String, JsError> {
    presets_json().map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate(experiment: &str, level: u32) -> Result<String, JsError> {
    simulate_json(experiment, level).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn converge(experiment: &str) -> Result<String, JsError> {
    converge_json(experiment).map_err(|e| JsError::new(&e))
}
