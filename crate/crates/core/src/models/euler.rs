use super::{check_eta, Model, ProductForm};
use crate::error::Result;
use crate::kernels::{FieldSource, KernelShape, NonlocalTerm};

/// `∂ₜρ + ∂ₓ(ρ ω∗u) = 0`, `∂ₜu + ∂ₓ(u²/2) = ρ(ω∗u − u)`.
#[derive(Debug, Clone)]
pub struct NonlocalEuler {
    terms: Vec<NonlocalTerm>,
}

impl NonlocalEuler {
    pub fn new(eta: f64) -> Result<Self> {
        Self::with_kernel(eta, KernelShape::SymmetricParabola)
    }

    pub fn with_kernel(eta: f64, kernel: KernelShape) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self {
            terms: vec![NonlocalTerm::single(FieldSource::Species(1), kernel.build(eta)?)],
        })
    }
}

impl Model for NonlocalEuler {
    fn name(&self) -> &'static str {
        "nonlocal-euler"
    }

    fn species_names(&self) -> &'static [&'static str] {
        &["rho", "u"]
    }

    fn nonlocal_terms(&self) -> &[NonlocalTerm] {
        &self.terms
    }

    fn flux(&self, k: usize, rho: f64, r: &[f64]) -> f64 {
        if k == 0 {
            rho * r[0]
        } else {
            0.5 * rho * rho
        }
    }

    fn flux_drho(&self, k: usize, rho: f64, r: &[f64]) -> f64 {
        if k == 0 {
            r[0]
        } else {
            rho
        }
    }

    fn product_form(&self) -> Option<&dyn ProductForm> {
        Some(self)
    }

    fn has_source(&self) -> bool {
        true
    }

    fn source(&self, k: usize, rho: &[f64], r: &[f64]) -> f64 {
        if k == 0 {
            0.0
        } else {
            rho[0] * (r[0] - rho[1])
        }
    }

    fn source_drho(&self, k: usize, rho: &[f64], _r: &[f64]) -> f64 {
        if k == 0 {
            0.0
        } else {
            -rho[0]
        }
    }
}

impl ProductForm for NonlocalEuler {
    fn g(&self, k: usize, rho: f64) -> f64 {
        if k == 0 {
            rho
        } else {
            0.5 * rho * rho
        }
    }

    fn velocity(&self, k: usize, r: &[f64]) -> f64 {
        if k == 0 {
            r[0]
        } else {
            1.0
        }
    }

    fn velocity_grad(&self, k: usize, _r: &[f64], _l: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn relaxation_equilibrium() {
        let m = NonlocalEuler::new(0.05).unwrap();
        assert_eq!(m.source(1, &[0.7, 0.3], &[0.3]), 0.0);
        assert_eq!(m.source(0, &[0.7, 0.3], &[0.9]), 0.0);
        assert_eq!(m.flux(0, 0.0, &[0.4]), 0.0);
    }

    #[test]
    fn smooth_data_is_subcritical() {
        for i in 0..=400 {
            let x = -1.0 + i as f64 / 200.0;
            let rho0 = 0.2 + 0.1 * (PI * x).sin();
            let du0 = -0.3 * (PI * x).sin();
            let lhs = du0 + rho0;
            assert!((lhs - (0.2 - 0.2 * (PI * x).sin())).abs() < 1e-14);
            assert!(lhs >= -1e-15);
        }
    }
}
