use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Grid};
use crate::initial::{self, ExprData};
use crate::kernels::{FieldSource, KernelShape};
use crate::limiters::ClipConfig;
use crate::models::{flux_lipschitz, source_lipschitz, Model, ModelKind, StateBox};
use crate::schemes::{SchemeConfig, SchemeId};
use crate::state::InitialData;
use crate::time::{StepMode, TimeController, NT_CFL_LIMIT};

/// Initial datum: a catalog name or inline expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(untagged)]
pub enum InitialSpec {
    Named(String),
    Inline {
        exprs: Vec<String>,
        #[serde(default)]
        breakpoints: Vec<f64>,
    },
}

impl InitialSpec {
    pub fn build(&self) -> Result<ExprData> {
        match self {
            InitialSpec::Named(name) => initial::named(name)?.build(),
            InitialSpec::Inline { exprs, breakpoints } => ExprData::new(exprs, breakpoints),
        }
    }
}

fn default_bc() -> BoundaryCondition {
    BoundaryCondition::Periodic
}

fn default_dx0() -> f64 {
    0.05
}

fn default_levels() -> Vec<u32> {
    (0..=5).collect()
}

fn default_reference_level() -> u32 {
    9
}

fn default_cfl() -> f64 {
    NT_CFL_LIMIT
}

/// A benchmark: model, data, domain, horizon and the grid family
/// `Δx_n = dx0 · 2^{−n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub model: ModelKind,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub kernel: Option<KernelShape>,
    pub initial: InitialSpec,
    pub domain: [f64; 2],
    pub t_final: f64,
    #[serde(default = "default_bc")]
    pub bc: BoundaryCondition,
    #[serde(default = "default_dx0")]
    pub dx0: f64,
    #[serde(default = "default_levels")]
    pub levels: Vec<u32>,
    #[serde(default = "default_reference_level")]
    pub reference_level: u32,
    /// Schemes to run; every applicable scheme when empty.
    #[serde(default)]
    pub schemes: Vec<SchemeId>,
    /// Scheme of the reference solution; product-rule slopes when available.
    #[serde(default)]
    pub reference_scheme: Option<SchemeId>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub clip: ClipConfig,
    /// Bound on `λ L_F`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub step_mode: StepMode,
    /// Fixed `Δt/Δx`, replacing the value derived from `cfl`.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Abort instead of warning when the runtime CFL number exceeds its bound.
    #[serde(default)]
    pub strict_cfl: bool,
}

impl Experiment {
    pub fn new(model: ModelKind, initial: &str, domain: [f64; 2], t_final: f64) -> Self {
        Self {
            model,
            eta: None,
            kernel: None,
            initial: InitialSpec::Named(initial.to_string()),
            domain,
            t_final,
            bc: default_bc(),
            dx0: default_dx0(),
            levels: default_levels(),
            reference_level: default_reference_level(),
            schemes: Vec::new(),
            reference_scheme: None,
            theta: None,
            clip: ClipConfig::default(),
            cfl: default_cfl(),
            step_mode: StepMode::FluxOnly,
            lambda: None,
            strict_cfl: false,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or_else(|| self.model.default_eta())
    }

    pub fn kernel(&self) -> KernelShape {
        self.kernel.unwrap_or_else(|| self.model.default_kernel())
    }

    pub fn build_model(&self) -> Result<Arc<dyn Model>> {
        self.model.build(self.eta(), self.kernel())
    }

    /// Requested schemes, or every scheme the model supports.
    pub fn schemes(&self) -> Result<Vec<SchemeId>> {
        let model = self.build_model()?;
        if self.schemes.is_empty() {
            return Ok(SchemeId::ALL
                .into_iter()
                .filter(|s| *s != SchemeId::NtV2 || model.product_form().is_some())
                .collect());
        }
        Ok(self.schemes.clone())
    }

    pub fn reference_scheme(&self) -> Result<SchemeId> {
        match self.reference_scheme {
            Some(s) => Ok(s),
            None => Ok(if self.build_model()?.product_form().is_some() {
                SchemeId::NtV2
            } else {
                SchemeId::NtV1
            }),
        }
    }

    pub fn scheme_config(&self, scheme: SchemeId) -> SchemeConfig {
        SchemeConfig {
            scheme,
            diffusion_theta: self.theta,
            clip: self.clip,
        }
    }

    pub fn time_controller(&self) -> TimeController {
        TimeController {
            t_final: self.t_final,
            cfl_limit: self.cfl,
            safety: 1.0,
            mode: self.step_mode,
        }
    }

    pub fn grid(&self, level: u32) -> Result<Grid> {
        let [a, b] = self.domain;
        let ratio = (b - a) / self.dx0;
        let base = ratio.round();
        if !(base >= 1.0 && (ratio - base).abs() <= 1e-9 * base) {
            return Err(Error::Config(format!(
                "domain length {} is not a whole multiple of dx0 = {}",
                b - a,
                self.dx0
            )));
        }
        if level > 24 {
            return Err(Error::Config(format!("refinement level {level} is too large")));
        }
        Grid::new(a, b, (base as usize) << level)
    }

    pub fn validate(&self) -> Result<()> {
        self.time_controller().validate()?;
        self.clip.validate()?;
        let model = self.build_model()?;
        let data = self.initial.build()?;
        if data.species() != model.species() {
            return Err(Error::Config(format!(
                "initial data has {} species, model '{}' needs {}",
                data.species(),
                model.name(),
                model.species()
            )));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("lambda must be positive, got {l}")));
            }
        }
        if self.levels.is_empty() {
            return Err(Error::Config("no refinement levels given".into()));
        }
        if let Some(&l) = self.levels.iter().find(|&&l| l >= self.reference_level) {
            return Err(Error::Config(format!(
                "reference level {} must be finer than every test level (got {l})",
                self.reference_level
            )));
        }
        for &level in self.levels.iter().chain(std::iter::once(&self.reference_level)) {
            let grid = self.grid(level)?;
            for scheme in self.schemes()?.into_iter().chain([self.reference_scheme()?]) {
                crate::schemes::Stepper::new(model.clone(), grid, self.bc, self.scheme_config(scheme))?;
            }
        }
        Ok(())
    }

    /// Coordinate box of the initial data and of the nonlocal terms it
    /// induces, from dense samples of the datum.
    pub fn state_box(&self) -> Result<StateBox> {
        let model = self.build_model()?;
        let data = self.initial.build()?;
        let [a, b] = self.domain;
        const SAMPLES: usize = 8192;
        let xs: Vec<f64> = (0..SAMPLES)
            .map(|i| a + (b - a) * (i as f64 + 0.5) / SAMPLES as f64)
            .collect();
        let n = model.species();
        let mut rho = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
        let mut derived = (f64::INFINITY, f64::NEG_INFINITY);
        let mut point = vec![0.0; n];
        for &x in &xs {
            for (k, slot) in point.iter_mut().enumerate() {
                *slot = data.value(k, x);
                rho[k].0 = rho[k].0.min(*slot);
                rho[k].1 = rho[k].1.max(*slot);
            }
            if let Some(d) = model.derived_field() {
                let u = d.value(&point);
                derived.0 = derived.0.min(u);
                derived.1 = derived.1.max(u);
            }
        }
        if rho.iter().any(|r| !(r.0.is_finite() && r.1.is_finite())) {
            return Err(Error::Config("initial data is not finite".into()));
        }
        let r = model
            .nonlocal_terms()
            .iter()
            .map(|term| {
                term.parts.iter().fold((0.0, 0.0), |acc, part| {
                    let (lo, hi) = match part.source {
                        FieldSource::Species(k) => rho[k],
                        FieldSource::Derived => derived,
                    };
                    let w = part.kernel.integral();
                    let (p, q) = (w * lo, w * hi);
                    (acc.0 + p.min(q), acc.1 + p.max(q))
                })
            })
            .collect();
        Ok(StateBox { rho, r })
    }

    /// Fixed ratio `λ = Δt/Δx` and the Lipschitz constants behind it.
    pub fn step_ratio(&self) -> Result<StepRatio> {
        let model = self.build_model()?;
        let b = self.state_box()?;
        let lip_flux = flux_lipschitz(model.as_ref(), &b);
        let lip_source = source_lipschitz(model.as_ref(), &b);
        Ok(StepRatio { lip_flux, lip_source })
    }
}

/// Lipschitz constants that fix the time step on every grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRatio {
    pub lip_flux: f64,
    pub lip_source: f64,
}
