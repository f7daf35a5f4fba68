use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::experiment::Experiment;
use super::run::{l1_error, observed_rate, restrict_to_coarse, run_simulation, RunResult};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::schemes::SchemeId;
use crate::state::SystemState;

/// Disk cache for reference solutions, keyed by a hash of everything that
/// determines them.
#[derive(Debug, Clone, Default)]
pub struct ReferenceCache {
    dir: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct CachedState {
    key: String,
    time: f64,
    values: Vec<Vec<f64>>,
}

impl ReferenceCache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self { dir: Some(dir.into()) }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn key(exp: &Experiment, scheme: SchemeId, level: u32) -> Result<String> {
        let mut canonical = exp.clone();
        canonical.levels.clear();
        canonical.schemes.clear();
        canonical.reference_scheme = Some(scheme);
        canonical.reference_level = level;
        canonical.strict_cfl = false;
        let json = serde_json::to_string(&canonical)
            .map_err(|e| Error::Config(format!("cannot serialise experiment: {e}")))?;
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update(json.as_bytes());
        Ok(hex::encode(h.finalize()))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("reference-{key}.json")))
    }

    fn load(&self, key: &str, cells: usize) -> Option<SystemState> {
        let text = fs::read_to_string(self.path(key)?).ok()?;
        let cached: CachedState = serde_json::from_str(&text).ok()?;
        if cached.key != key || cached.values.iter().any(|v| v.len() != cells) {
            return None;
        }
        SystemState::new(cached.values, cached.time).ok()
    }

    fn store(&self, key: &str, state: &SystemState) -> Result<()> {
        let Some(path) = self.path(key) else {
            return Ok(());
        };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let body = CachedState {
            key: key.to_string(),
            time: state.time(),
            values: state.values().to_vec(),
        };
        let text =
            serde_json::to_string(&body).map_err(|e| Error::Config(format!("cannot serialise reference: {e}")))?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// The reference solution, computed and stored on a cache miss.
    pub fn reference(&self, exp: &Experiment) -> Result<(Grid, SystemState)> {
        let scheme = exp.reference_scheme()?;
        let level = exp.reference_level;
        let grid = exp.grid(level)?;
        let key = Self::key(exp, scheme, level)?;
        if let Some(state) = self.load(&key, grid.cells()) {
            log::info!("reference {scheme} level {level} loaded from cache");
            return Ok((grid, state));
        }
        let started = Stopwatch::start();
        let run = run_simulation(exp, scheme, level)?;
        log::info!(
            "reference {scheme} level {level}: {} steps in {:.1}s",
            run.steps,
            started.seconds()
        );
        self.store(&key, &run.state)?;
        Ok((grid, run.state))
    }
}

/// Wall-clock timer; reads zero where the platform has no clock.
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    fn start() -> Self {
        Self(std::time::Instant::now())
    }

    #[cfg(target_arch = "wasm32")]
    fn start() -> Self {
        Self()
    }

    #[cfg(not(target_arch = "wasm32"))]
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }

    #[cfg(target_arch = "wasm32")]
    fn seconds(&self) -> f64 {
        0.0
    }
}

/// One line of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub scheme: SchemeId,
    pub level: u32,
    pub dx: f64,
    pub l1_error: f64,
    /// Rate against the previous level of the same scheme, when that level
    /// is one coarser.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub lambda: f64,
    pub reference_scheme: SchemeId,
    pub reference_level: u32,
    /// Wall-clock seconds per (scheme, level) run, in row order.
    pub runtimes: Vec<f64>,
}

impl ConvergenceReport {
    pub fn rows_for(&self, scheme: SchemeId) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    pub fn errors(&self, scheme: SchemeId) -> Vec<f64> {
        self.rows_for(scheme).map(|r| r.l1_error).collect()
    }

    pub fn rates(&self, scheme: SchemeId) -> Vec<f64> {
        self.rows_for(scheme).filter_map(|r| r.rate).collect()
    }

    pub fn error_at(&self, scheme: SchemeId, level: u32) -> Option<f64> {
        self.rows_for(scheme).find(|r| r.level == level).map(|r| r.l1_error)
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn map_jobs<T, U, F>(jobs: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    jobs.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_jobs<T, U, F>(jobs: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    jobs.into_iter().map(f).collect()
}

/// L1 distance of a run to the restricted reference.
pub fn error_to_reference(run: &RunResult, ref_grid: &Grid, reference: &SystemState) -> Result<f64> {
    let restricted = restrict_to_coarse(reference, ref_grid, &run.grid)?;
    l1_error(&run.state, &restricted, &run.grid)
}

/// Errors and observed orders of every requested scheme on every level.
pub fn convergence_study(exp: &Experiment, cache: &ReferenceCache) -> Result<ConvergenceReport> {
    exp.validate()?;
    let (ref_grid, reference) = cache.reference(exp)?;
    let schemes = exp.schemes()?;
    let mut levels = exp.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let jobs: Vec<(SchemeId, u32)> = schemes
        .iter()
        .flat_map(|&s| levels.iter().map(move |&l| (s, l)))
        .collect();
    let results = map_jobs(jobs, |(scheme, level)| -> Result<(SchemeId, u32, f64, f64, f64, f64)> {
        let started = Stopwatch::start();
        let run = run_simulation(exp, scheme, level)?;
        let err = error_to_reference(&run, &ref_grid, &reference)?;
        Ok((scheme, level, run.grid.dx(), err, run.lambda, started.seconds()))
    });
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(results.len());
    let mut runtimes = Vec::with_capacity(results.len());
    let mut lambda = 0.0;
    for r in results {
        let (scheme, level, dx, l1_error, lam, secs) = r?;
        let rate = rows
            .last()
            .filter(|p| p.scheme == scheme && p.level + 1 == level)
            .map(|p| observed_rate(p.l1_error, l1_error));
        rows.push(ConvergenceRow {
            scheme,
            level,
            dx,
            l1_error,
            rate,
        });
        runtimes.push(secs);
        lambda = lam;
    }
    Ok(ConvergenceReport {
        rows,
        lambda,
        reference_scheme: exp.reference_scheme()?,
        reference_level: exp.reference_level,
        runtimes,
    })
}

/// Solutions of several schemes on one level next to the restricted reference.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub grid: Grid,
    pub runs: Vec<RunResult>,
    pub reference: SystemState,
    pub errors: Vec<f64>,
}

pub fn compare(exp: &Experiment, level: u32, cache: &ReferenceCache) -> Result<Comparison> {
    let mut checked = exp.clone();
    checked.levels = vec![level];
    checked.validate()?;
    let (ref_grid, reference) = cache.reference(exp)?;
    let grid = exp.grid(level)?;
    let schemes = exp.schemes()?;
    let runs: Vec<RunResult> = map_jobs(schemes, |s| run_simulation(exp, s, level))
        .into_iter()
        .collect::<Result<_>>()?;
    let reference = restrict_to_coarse(&reference, &ref_grid, &grid)?;
    let errors = runs
        .iter()
        .map(|r| l1_error(&r.state, &reference, &grid))
        .collect::<Result<_>>()?;
    Ok(Comparison {
        grid,
        runs,
        reference,
        errors,
    })
}
