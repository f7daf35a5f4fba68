//! Benchmark model zoo.
//!
//! Every model has per-species fluxes `F_k(ρᵏ, 𝐑)` coupled only through the
//! nonlocal terms `𝐑`, an optional source `S_k(ρ⃗, 𝐑)` and a declarative list
//! of nonlocal terms (which field is convolved with which kernel).

mod arrhenius;
mod euler;
mod garz;
mod keyfitz_kranzer;
mod multilane;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use arrhenius::Arrhenius;
pub use euler::NonlocalEuler;
pub use garz::Garz;
pub use keyfitz_kranzer::KeyfitzKranzer;
pub use multilane::Multilane;

use crate::error::{Error, Result};
use crate::kernels::{KernelShape, NonlocalTerm};

/// Flux factorisation `F_k(ρ, 𝐑) = g_k(ρ) V_k(𝐑)` used by the product-rule
/// flux slopes.
pub trait ProductForm {
    fn g(&self, k: usize, rho: f64) -> f64;

    fn velocity(&self, k: usize, r: &[f64]) -> f64;

    /// `∂V_k / ∂R_ℓ`.
    fn velocity_grad(&self, k: usize, r: &[f64], l: usize) -> f64;
}

/// A convolved field that is a nonlinear function of all species.
pub trait DerivedField {
    fn value(&self, rho: &[f64]) -> f64;

    /// `∂ₜu` given the per-species rates `∂ₜρᵏ` (chain rule).
    fn time_integrand(&self, rho: &[f64], rates: &[f64]) -> f64;
}

pub trait Model: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn species_names(&self) -> &'static [&'static str];

    fn species(&self) -> usize {
        self.species_names().len()
    }

    fn nonlocal_terms(&self) -> &[NonlocalTerm];

    fn flux(&self, k: usize, rho: f64, r: &[f64]) -> f64;

    fn flux_drho(&self, k: usize, rho: f64, r: &[f64]) -> f64;

    fn product_form(&self) -> Option<&dyn ProductForm> {
        None
    }

    fn has_source(&self) -> bool {
        false
    }

    fn source(&self, _k: usize, _rho: &[f64], _r: &[f64]) -> f64 {
        0.0
    }

    /// `∂S_k/∂ρᵏ`; only consulted for the positivity time-step bound.
    fn source_drho(&self, _k: usize, _rho: &[f64], _r: &[f64]) -> f64 {
        0.0
    }

    fn derived_field(&self) -> Option<&dyn DerivedField> {
        None
    }

    /// Lower bound `ρ_m` with `F_k(ρ_m, 𝐑) = 0`, when the model has one.
    fn rho_min(&self) -> Option<f64> {
        None
    }

    fn rho_max(&self) -> Option<f64> {
        None
    }

    /// Default diffusion parameter of the Lax–Friedrichs fluxes.
    fn lxf_theta(&self) -> f64 {
        1.0 / 3.0
    }

    /// Extra per-cell output columns (name, value) derived from the state.
    fn extra_columns(&self) -> &'static [&'static str] {
        &[]
    }

    fn extra_values(&self, _rho: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

/// Coordinate ranges of the states and nonlocal terms seen by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBox {
    pub rho: Vec<(f64, f64)>,
    pub r: Vec<(f64, f64)>,
}

const BOX_SAMPLES: usize = 25;

fn box_points(range: (f64, f64), samples: usize) -> Vec<f64> {
    let (lo, hi) = range;
    if hi <= lo {
        return vec![lo];
    }
    (0..samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
        .collect()
}

fn r_grid(b: &StateBox) -> Vec<Vec<f64>> {
    let per_axis = match b.r.len() {
        0 => 1,
        1 => BOX_SAMPLES,
        2 => 11,
        _ => 5,
    };
    let mut points = vec![Vec::new()];
    for &range in &b.r {
        let axis = box_points(range, per_axis);
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

/// Sampled `L_F = max_k sup |∂F_k/∂ρ|` over the box.
pub fn flux_lipschitz(model: &dyn Model, b: &StateBox) -> f64 {
    let rs = r_grid(b);
    let mut lip = 0.0f64;
    for (k, &range) in b.rho.iter().enumerate() {
        for rho in box_points(range, BOX_SAMPLES) {
            for r in &rs {
                lip = lip.max(model.flux_drho(k, rho, r).abs());
            }
        }
    }
    lip
}

/// Sampled `L_S = max_k sup |∂S_k/∂ρᵏ|` over the box (corners of the other species).
pub fn source_lipschitz(model: &dyn Model, b: &StateBox) -> f64 {
    if !model.has_source() {
        return 0.0;
    }
    let rs = r_grid(b);
    let n = b.rho.len();
    let axes: Vec<Vec<f64>> = b.rho.iter().map(|&r| box_points(r, 9)).collect();
    let mut states = vec![Vec::new()];
    for axis in &axes {
        states = states
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    let mut lip = 0.0f64;
    for rho in &states {
        for r in &rs {
            for k in 0..n {
                lip = lip.max(model.source_drho(k, rho, r).abs());
            }
        }
    }
    lip
}

/// Registry names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    KeyfitzKranzer,
    Arrhenius,
    Multilane,
    NonlocalEuler,
    Garz,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::KeyfitzKranzer,
        ModelKind::Arrhenius,
        ModelKind::Multilane,
        ModelKind::NonlocalEuler,
        ModelKind::Garz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::KeyfitzKranzer => "keyfitz-kranzer",
            ModelKind::Arrhenius => "arrhenius",
            ModelKind::Multilane => "multilane",
            ModelKind::NonlocalEuler => "nonlocal-euler",
            ModelKind::Garz => "garz",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ModelKind::KeyfitzKranzer => "two species, F_k = rho_k (1 - a^2 - b^2)^3 with a, b = w * rho_1, w * rho_2",
            ModelKind::Arrhenius => "scalar look-ahead flux rho (1 - rho) exp(-w * rho)",
            ModelKind::Multilane => "two lanes, velocity 1 - R^2, lane-changing source",
            ModelKind::NonlocalEuler => "density and velocity with nonlocal alignment relaxation",
            ModelKind::Garz => "generalized Aw-Rascle-Zhang, convolution of v = q/rho - 6 rho",
        }
    }

    pub fn default_kernel(self) -> KernelShape {
        match self {
            ModelKind::KeyfitzKranzer => KernelShape::KkPower52Ahead,
            ModelKind::Arrhenius => KernelShape::Constant,
            ModelKind::Multilane => KernelShape::Linear,
            ModelKind::NonlocalEuler => KernelShape::SymmetricParabola,
            ModelKind::Garz => KernelShape::Linear,
        }
    }

    pub fn default_eta(self) -> f64 {
        match self {
            ModelKind::KeyfitzKranzer => 0.5,
            ModelKind::Arrhenius => 0.2,
            ModelKind::Multilane => 0.5,
            ModelKind::NonlocalEuler => 0.05,
            ModelKind::Garz => 0.1,
        }
    }

    pub fn build(self, eta: f64, kernel: KernelShape) -> Result<Arc<dyn Model>> {
        Ok(match self {
            ModelKind::KeyfitzKranzer => Arc::new(KeyfitzKranzer::with_kernel(eta, kernel)?),
            ModelKind::Arrhenius => Arc::new(Arrhenius::new(eta, kernel)?),
            ModelKind::Multilane => Arc::new(Multilane::with_kernel(eta, kernel)?),
            ModelKind::NonlocalEuler => Arc::new(NonlocalEuler::with_kernel(eta, kernel)?),
            ModelKind::Garz => Arc::new(Garz::with_kernel(eta, kernel)?),
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown model '{s}' (expected one of: {})",
                ModelKind::ALL.map(|m| m.name()).join(", ")
            ))
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("nonlocal range eta must be positive, got {eta}")))
    }
}
