//! Time-step control under the central-scheme CFL conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// `(√2 − 1)/2`, the bound on `λ L_F` that keeps the central scheme
/// L∞-stable.
pub const NT_CFL_LIMIT: f64 = 0.207_106_781_186_547_5;

/// How the step size is derived from the Lipschitz constants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StepMode {
    /// `λ L_F ≤ cfl_limit`.
    #[default]
    FluxOnly,
    /// `Δt L_S / 2 ≤ τ`, `λ L_F ≤ κ` with `κ + τ ≤ (√2 − 1)/2`; keeps the
    /// densities above their lower bound.
    PositivityPreserving { tau: f64, kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeController {
    pub t_final: f64,
    pub cfl_limit: f64,
    /// Multiplies the admissible step, in `(0, 1]`.
    pub safety: f64,
    pub mode: StepMode,
}

impl TimeController {
    pub fn new(t_final: f64) -> Self {
        Self {
            t_final,
            cfl_limit: NT_CFL_LIMIT,
            safety: 1.0,
            mode: StepMode::FluxOnly,
        }
    }

    pub fn with_mode(mut self, mode: StepMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_safety(mut self, safety: f64) -> Self {
        self.safety = safety;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Config(format!("final time {} must be >= 0", self.t_final)));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::Config(format!("safety factor {} not in (0, 1]", self.safety)));
        }
        if !(self.cfl_limit > 0.0 && self.cfl_limit.is_finite()) {
            return Err(Error::Config(format!("CFL limit {} must be positive", self.cfl_limit)));
        }
        if let StepMode::PositivityPreserving { tau, kappa } = self.mode {
            if !(tau > 0.0 && kappa > 0.0) || tau + kappa > NT_CFL_LIMIT * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "positivity CFL needs tau, kappa > 0 and tau + kappa <= {NT_CFL_LIMIT}, got tau = {tau}, kappa = {kappa}"
                )));
            }
        }
        Ok(())
    }

    /// The bound that `λ L_F` must respect in the current mode.
    pub fn flux_bound(&self) -> f64 {
        match self.mode {
            StepMode::FluxOnly => self.cfl_limit,
            StepMode::PositivityPreserving { kappa, .. } => kappa,
        }
    }

    /// Unclamped step size for the given Lipschitz constants of flux and
    /// source.
    pub fn nominal_dt(&self, dx: f64, lip_flux: f64, lip_source: f64) -> Result<f64> {
        if !(lip_flux > 0.0 && lip_flux.is_finite()) {
            return Err(Error::Model(format!(
                "flux Lipschitz bound must be positive and finite, got {lip_flux}"
            )));
        }
        let dt = match self.mode {
            StepMode::FluxOnly => self.cfl_limit * dx / lip_flux,
            StepMode::PositivityPreserving { tau, kappa } => {
                let flux_dt = kappa * dx / lip_flux;
                if lip_source > 0.0 {
                    flux_dt.min(2.0 * tau / lip_source)
                } else {
                    flux_dt
                }
            }
        };
        Ok(self.safety * dt)
    }

    /// Step size at time `t_now`, clamped so that the run ends exactly at
    /// `t_final`.
    pub fn max_stable_dt(&self, grid: &Grid, lip_flux: f64, lip_source: f64, t_now: f64) -> Result<f64> {
        let dt = self.nominal_dt(grid.dx(), lip_flux, lip_source)?;
        Ok(clamp_to_final(dt, t_now, self.t_final))
    }
}

/// `min(dt, T − t)`, also absorbing a remainder that is negligible compared
/// to `dt`.
pub fn clamp_to_final(dt: f64, t_now: f64, t_final: f64) -> f64 {
    let remaining = (t_final - t_now).max(0.0);
    if dt >= remaining || remaining - dt <= 1e-10 * dt {
        remaining
    } else {
        dt
    }
}
