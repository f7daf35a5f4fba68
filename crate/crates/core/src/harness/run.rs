use serde::Serialize;

use super::experiment::Experiment;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::schemes::{SchemeId, Stepper};
use crate::state::{init_cell_averages, SystemState};

/// Diagnostics after one step (or of the initial state for step 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorEntry {
    pub step: usize,
    pub time: f64,
    pub mass: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub total_variation: Vec<f64>,
    /// `λ max_j |∂ρF|` at the start of the step; zero for step 0.
    pub cfl_number: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MonitorLog {
    pub entries: Vec<MonitorEntry>,
    pub cfl_violations: usize,
}

impl MonitorLog {
    fn record(&mut self, step: usize, state: &SystemState, grid: &Grid, exp: &Experiment, cfl_number: f64) {
        debug_assert!(self.entries.last().is_none_or(|e| e.time < state.time() || step == 0));
        self.entries.push(MonitorEntry {
            step,
            time: state.time(),
            mass: state.total_mass(grid),
            min: state.min(),
            max: state.max(),
            total_variation: state.total_variation(exp.bc),
            cfl_number,
        });
    }

    /// Largest relative change of any species mass against step 0.
    pub fn max_relative_mass_drift(&self) -> f64 {
        let Some(first) = self.entries.first() else {
            return 0.0;
        };
        self.entries
            .iter()
            .flat_map(|e| {
                e.mass.iter().zip(&first.mass).map(|(m, m0)| {
                    let scale = m0.abs().max(f64::MIN_POSITIVE);
                    (m - m0).abs() / scale
                })
            })
            .fold(0.0, f64::max)
    }

    /// Smallest value of any species over the run.
    pub fn global_min(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| e.min.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Final state of a run with its grid, monitors and step data.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub scheme: SchemeId,
    pub level: u32,
    pub grid: Grid,
    pub state: SystemState,
    pub log: MonitorLog,
    pub dt: f64,
    pub lambda: f64,
    pub steps: usize,
}

/// Everything a run needs that does not change from step to step.
pub struct Simulation {
    pub stepper: Stepper,
    pub grid: Grid,
    pub dt: f64,
    pub flux_bound: f64,
}

impl Simulation {
    pub fn new(exp: &Experiment, scheme: SchemeId, level: u32) -> Result<Self> {
        exp.time_controller().validate()?;
        let grid = exp.grid(level)?;
        let model = exp.build_model()?;
        let ratio = exp.step_ratio()?;
        let controller = exp.time_controller();
        let dt = match exp.lambda {
            Some(l) => l * grid.dx(),
            None => controller.nominal_dt(grid.dx(), ratio.lip_flux, ratio.lip_source)?,
        };
        let stepper = Stepper::new(model, grid, exp.bc, exp.scheme_config(scheme))?;
        Ok(Self {
            stepper,
            grid,
            dt,
            flux_bound: controller.flux_bound(),
        })
    }

    pub fn initial_state(&self, exp: &Experiment) -> Result<SystemState> {
        let data = exp.initial.build()?;
        init_cell_averages(&data, &self.grid)
    }
}

/// Runs one scheme on one level from `t = 0` to the final time.
pub fn run_simulation(exp: &Experiment, scheme: SchemeId, level: u32) -> Result<RunResult> {
    run_with(exp, scheme, level, |_, _, _| Ok(()))
}

/// As [`run_simulation`], calling `observe(step, old, new)` after every step.
pub fn run_with(
    exp: &Experiment,
    scheme: SchemeId,
    level: u32,
    mut observe: impl FnMut(&Simulation, &SystemState, &SystemState) -> Result<()>,
) -> Result<RunResult> {
    let sim = Simulation::new(exp, scheme, level)?;
    let grid = sim.grid;
    let lambda = sim.dt / grid.dx();
    let mut state = sim.initial_state(exp)?;
    let mut log = MonitorLog::default();
    log.record(0, &state, &grid, exp, 0.0);
    let mut steps = 0;
    let mut warned = false;
    while state.time() < exp.t_final {
        let dt = crate::time::clamp_to_final(sim.dt, state.time(), exp.t_final);
        if dt <= 0.0 {
            break;
        }
        let out = sim.stepper.step(state.values(), dt)?;
        steps += 1;
        let cfl_number = lambda * out.wave_speed;
        if cfl_number > sim.flux_bound * (1.0 + 1e-9) {
            if exp.strict_cfl {
                return Err(Error::Cfl {
                    step: steps,
                    value: cfl_number,
                    limit: sim.flux_bound,
                });
            }
            log.cfl_violations += 1;
            if !warned {
                log::warn!(
                    "step {steps}: CFL number {cfl_number:.6} exceeds {:.6} ({scheme}, level {level})",
                    sim.flux_bound
                );
                warned = true;
            }
        }
        let time = if dt == exp.t_final - state.time() {
            exp.t_final
        } else {
            state.time() + dt
        };
        for (species, v) in out.values.iter().enumerate() {
            if let Some(cell) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    step: steps,
                    time,
                    species,
                    cell: cell as isize,
                });
            }
        }
        let next = SystemState::new(out.values, time)?;
        observe(&sim, &state, &next)?;
        log.record(steps, &next, &grid, exp, cfl_number);
        state = next;
    }
    Ok(RunResult {
        scheme,
        level,
        grid,
        state,
        log,
        dt: sim.dt,
        lambda,
        steps,
    })
}

/// Conservative restriction: each coarse cell gets the mean of the fine
/// cells it contains.
pub fn restrict_to_coarse(fine: &SystemState, fine_grid: &Grid, coarse: &Grid) -> Result<SystemState> {
    let (nf, nc) = (fine_grid.cells(), coarse.cells());
    let same_domain = (fine_grid.x_left() - coarse.x_left()).abs() <= 1e-12 * fine_grid.length()
        && (fine_grid.x_right() - coarse.x_right()).abs() <= 1e-12 * fine_grid.length();
    if fine.cells() != nf || !same_domain || nf < nc || nf % nc != 0 || !(nf / nc).is_power_of_two() {
        return Err(Error::Grid(format!(
            "cannot restrict {nf} cells on [{}, {}] to {nc} cells on [{}, {}]",
            fine_grid.x_left(),
            fine_grid.x_right(),
            coarse.x_left(),
            coarse.x_right()
        )));
    }
    let ratio = nf / nc;
    let values = fine
        .values()
        .iter()
        .map(|v| v.chunks(ratio).map(|c| c.iter().sum::<f64>() / ratio as f64).collect())
        .collect();
    SystemState::new(values, fine.time())
}

/// `Δx Σ_j Σ_k |a_j^k − b_j^k|`.
pub fn l1_error(a: &SystemState, b: &SystemState, grid: &Grid) -> Result<f64> {
    if a.species_count() != b.species_count() || a.cells() != b.cells() || a.cells() != grid.cells() {
        return Err(Error::Shape(format!(
            "cannot compare {}x{} with {}x{} on {} cells",
            a.species_count(),
            a.cells(),
            b.species_count(),
            b.cells(),
            grid.cells()
        )));
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .sum();
    Ok(grid.dx() * sum)
}

/// Observed order `log₂(e_coarse / e_fine)` between halved grids.
pub fn observed_rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
