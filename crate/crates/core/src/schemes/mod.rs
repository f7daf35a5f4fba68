//! Time steppers: the non-staggered central scheme with two flux-slope
//! variants and first/second-order Lax–Friedrichs baselines.

mod lxf;
mod nt;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use nt::{half_step, nonstaggered_projection, staggered_predictor, HalfStepState, NtTrace};

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, CellArray, Grid, Layout, Window};
use crate::kernels::{NonlocalOperator, SourceFields};
use crate::limiters::{slopes_on, ClipConfig};
use crate::models::Model;
use crate::state::SystemState;

/// Scheme and, for the central scheme, the flux-slope variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub enum SchemeId {
    /// Central scheme with flux slopes from limited flux differences.
    #[serde(rename = "nt-v1")]
    NtV1,
    /// Central scheme with product-rule flux slopes.
    #[serde(rename = "nt-v2")]
    NtV2,
    #[serde(rename = "lxf1")]
    Lxf1,
    #[serde(rename = "lxf2")]
    Lxf2,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [SchemeId::Lxf1, SchemeId::Lxf2, SchemeId::NtV1, SchemeId::NtV2];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::NtV1 => "nt-v1",
            SchemeId::NtV2 => "nt-v2",
            SchemeId::Lxf1 => "lxf1",
            SchemeId::Lxf2 => "lxf2",
        }
    }

    pub fn is_nt(self) -> bool {
        matches!(self, SchemeId::NtV1 | SchemeId::NtV2)
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown scheme '{s}' (expected one of: {})",
                SchemeId::ALL.map(|x| x.name()).join(", ")
            ))
        })
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: SchemeId,
    /// Lax–Friedrichs diffusion parameter; the model default when absent.
    #[serde(default)]
    pub diffusion_theta: Option<f64>,
    #[serde(default)]
    pub clip: ClipConfig,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeId) -> Self {
        Self {
            scheme,
            diffusion_theta: None,
            clip: ClipConfig::default(),
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.diffusion_theta = Some(theta);
        self
    }

    pub fn with_clip(mut self, clip: ClipConfig) -> Self {
        self.clip = clip;
        self
    }
}

/// One time step of a fixed scheme on a fixed grid; kernels and stencils are
/// built once.
#[derive(Debug, Clone)]
pub struct Stepper {
    model: Arc<dyn Model>,
    grid: Grid,
    layout: Layout,
    config: SchemeConfig,
    theta: f64,
    op: NonlocalOperator,
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub values: Vec<Vec<f64>>,
    /// `max_{j,k} |∂F_k/∂ρ(ρ_j, 𝐑_j)|` at the start of the step.
    pub wave_speed: f64,
}

impl Stepper {
    pub fn new(model: Arc<dyn Model>, grid: Grid, bc: BoundaryCondition, config: SchemeConfig) -> Result<Self> {
        config.clip.validate()?;
        let theta = config.diffusion_theta.unwrap_or_else(|| model.lxf_theta());
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Config(format!(
                "diffusion theta must lie in (0, 1], got {theta}"
            )));
        }
        let v2 = config.scheme == SchemeId::NtV2;
        if v2 && model.product_form().is_none() {
            return Err(Error::Config(format!(
                "model '{}' has no product form, so the nt-v2 flux slopes are unavailable",
                model.name()
            )));
        }
        let op = NonlocalOperator::new(model.nonlocal_terms(), grid.dx(), v2)?;
        Ok(Self {
            layout: Layout::new(grid.cells(), bc),
            model,
            grid,
            config,
            theta,
            op,
        })
    }

    pub fn model(&self) -> &Arc<dyn Model> {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn operator(&self) -> &NonlocalOperator {
        &self.op
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.layout.bc
    }

    /// Advances by `dt`; a zero step returns the input unchanged.
    pub fn step(&self, values: &[Vec<f64>], dt: f64) -> Result<StepOutput> {
        self.check(values)?;
        self.check_dt(dt)?;
        if dt == 0.0 {
            let w = self.layout.interior();
            let rho = self.extend_all(values, w);
            let r = self.extend_all(&self.nonlocal_field(values), w);
            return Ok(StepOutput {
                values: values.to_vec(),
                wave_speed: self.wave_speed(&rho, &r),
            });
        }
        match self.config.scheme {
            SchemeId::NtV1 | SchemeId::NtV2 => nt::step(self, values, dt, false).map(|(o, _)| o),
            SchemeId::Lxf1 => lxf::step_first_order(self, values, dt),
            SchemeId::Lxf2 => lxf::step_second_order(self, values, dt),
        }
    }

    /// Central-scheme step that also returns every intermediate field.
    pub fn step_traced(&self, values: &[Vec<f64>], dt: f64) -> Result<(StepOutput, NtTrace)> {
        self.check(values)?;
        if !self.config.scheme.is_nt() {
            return Err(Error::Unsupported(format!(
                "traced steps exist only for the central scheme, not '{}'",
                self.config.scheme
            )));
        }
        self.check_dt(dt)?;
        let (out, trace) = nt::step(self, values, dt, true)?;
        Ok((out, trace.expect("requested trace")))
    }

    /// `𝐑_j` on the interior cells with slope-corrected end intervals.
    pub fn nonlocal_field(&self, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let (n1, n2) = self.op.reach();
        let w_state = self.layout.window(1 + n1, 1 + n2);
        let w_slope = self.layout.window(n1, n2);
        let cap = self.config.clip.cap(self.grid.dx());
        let rho = self.extend_all(values, w_state);
        let s = self.slopes(&rho, w_slope, cap);
        let (u, su) = self.derived(&rho, w_state, Some(w_slope), cap);
        self.op
            .field(
                &SourceFields {
                    species: &rho,
                    derived: u.as_ref(),
                },
                &SourceFields {
                    species: &s,
                    derived: su.as_ref(),
                },
                self.layout.interior(),
            )
            .into_iter()
            .map(|r| r.interior(self.grid.cells()))
            .collect()
    }

    fn check(&self, values: &[Vec<f64>]) -> Result<()> {
        if values.len() != self.model.species() || values.iter().any(|v| v.len() != self.grid.cells()) {
            return Err(Error::Shape(format!(
                "state has {} species of lengths {:?}, expected {} species on {} cells",
                values.len(),
                values.iter().map(Vec::len).collect::<Vec<_>>(),
                self.model.species(),
                self.grid.cells()
            )));
        }
        Ok(())
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!(
                "time step {dt} is not admissible for scheme '{}'",
                self.config.scheme
            )));
        }
        Ok(())
    }

    fn extend_all(&self, values: &[Vec<f64>], w: Window) -> Vec<CellArray> {
        values.iter().map(|v| CellArray::extend(v, self.layout.bc, w)).collect()
    }

    fn slopes(&self, rho: &[CellArray], w: Window, cap: Option<f64>) -> Vec<CellArray> {
        rho.iter().map(|r| slopes_on(r, w, self.grid.dx(), cap)).collect()
    }

    fn derived(
        &self,
        rho: &[CellArray],
        w_values: Window,
        w_slopes: Option<Window>,
        cap: Option<f64>,
    ) -> (Option<CellArray>, Option<CellArray>) {
        match self.model.derived_field() {
            None => (None, None),
            Some(d) => {
                let mut point = vec![0.0; rho.len()];
                let u = CellArray::from_fn(w_values, |j| {
                    gather(rho, j, &mut point);
                    d.value(&point)
                });
                let su = w_slopes.map(|w| slopes_on(&u, w, self.grid.dx(), cap));
                (Some(u), su)
            }
        }
    }

    fn wave_speed(&self, rho: &[CellArray], r: &[CellArray]) -> f64 {
        let mut rv = vec![0.0; r.len()];
        let mut speed = 0.0f64;
        for j in self.layout.interior().indices() {
            gather(r, j, &mut rv);
            for (k, field) in rho.iter().enumerate() {
                speed = speed.max(self.model.flux_drho(k, field.get(j), &rv).abs());
            }
        }
        speed
    }
}

#[inline]
pub(crate) fn gather(fields: &[CellArray], j: isize, out: &mut [f64]) {
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f.get(j);
    }
}

fn run_once(
    model: Arc<dyn Model>,
    state: &SystemState,
    grid: &Grid,
    bc: BoundaryCondition,
    config: SchemeConfig,
    dt: f64,
) -> Result<SystemState> {
    let stepper = Stepper::new(model, *grid, bc, config)?;
    let out = stepper.step(state.values(), dt)?;
    SystemState::new(out.values, state.time() + dt)
}

/// One step of the central scheme.
pub fn nt_step(
    state: &SystemState,
    model: Arc<dyn Model>,
    grid: &Grid,
    bc: BoundaryCondition,
    config: SchemeConfig,
    dt: f64,
) -> Result<SystemState> {
    if !config.scheme.is_nt() {
        return Err(Error::Config(format!("nt_step called with scheme '{}'", config.scheme)));
    }
    run_once(model, state, grid, bc, config, dt)
}

/// One step of the first-order Lax–Friedrichs scheme.
pub fn lxf1_step(
    state: &SystemState,
    model: Arc<dyn Model>,
    grid: &Grid,
    bc: BoundaryCondition,
    config: SchemeConfig,
    dt: f64,
) -> Result<SystemState> {
    run_once(
        model,
        state,
        grid,
        bc,
        SchemeConfig {
            scheme: SchemeId::Lxf1,
            ..config
        },
        dt,
    )
}

/// One step of the MUSCL/Heun Lax–Friedrichs scheme.
pub fn lxf2_step(
    state: &SystemState,
    model: Arc<dyn Model>,
    grid: &Grid,
    bc: BoundaryCondition,
    config: SchemeConfig,
    dt: f64,
) -> Result<SystemState> {
    run_once(
        model,
        state,
        grid,
        bc,
        SchemeConfig {
            scheme: SchemeId::Lxf2,
            ..config
        },
        dt,
    )
}
