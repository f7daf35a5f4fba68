use super::{check_eta, Model, ProductForm};
use crate::error::Result;
use crate::kernels::{FieldSource, KernelShape, NonlocalTerm};

/// `∂ₜρᵏ + ∂ₓ(ρᵏ v(ω∗ρ¹, ω∗ρ²)) = 0` with `v(a, b) = (1 − a² − b²)³`.
#[derive(Debug, Clone)]
pub struct KeyfitzKranzer {
    terms: Vec<NonlocalTerm>,
}

impl KeyfitzKranzer {
    pub fn new(eta: f64) -> Result<Self> {
        Self::with_kernel(eta, KernelShape::KkPower52Ahead)
    }

    pub fn with_kernel(eta: f64, kernel: KernelShape) -> Result<Self> {
        check_eta(eta)?;
        let w = kernel.build(eta)?;
        Ok(Self {
            terms: vec![
                NonlocalTerm::single(FieldSource::Species(0), w.clone()),
                NonlocalTerm::single(FieldSource::Species(1), w),
            ],
        })
    }

    pub fn v(a: f64, b: f64) -> f64 {
        (1.0 - a * a - b * b).powi(3)
    }
}

impl Model for KeyfitzKranzer {
    fn name(&self) -> &'static str {
        "keyfitz-kranzer"
    }

    fn species_names(&self) -> &'static [&'static str] {
        &["rho1", "rho2"]
    }

    fn nonlocal_terms(&self) -> &[NonlocalTerm] {
        &self.terms
    }

    fn flux(&self, _k: usize, rho: f64, r: &[f64]) -> f64 {
        rho * Self::v(r[0], r[1])
    }

    fn flux_drho(&self, _k: usize, _rho: f64, r: &[f64]) -> f64 {
        Self::v(r[0], r[1])
    }

    fn product_form(&self) -> Option<&dyn ProductForm> {
        Some(self)
    }

    fn rho_min(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl ProductForm for KeyfitzKranzer {
    fn g(&self, _k: usize, rho: f64) -> f64 {
        rho
    }

    fn velocity(&self, _k: usize, r: &[f64]) -> f64 {
        Self::v(r[0], r[1])
    }

    fn velocity_grad(&self, _k: usize, r: &[f64], l: usize) -> f64 {
        let base = 1.0 - r[0] * r[0] - r[1] * r[1];
        -6.0 * r[l] * base * base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_and_flux() {
        let m = KeyfitzKranzer::new(0.5).unwrap();
        assert_eq!(KeyfitzKranzer::v(0.0, 0.0), 1.0);
        assert_eq!(m.flux(0, 0.0, &[0.3, -0.2]), 0.0);
        assert!((m.flux(1, 0.5, &[0.1, 0.2]) - 0.5 * 0.95f64.powi(3)).abs() < 1e-15);
        assert_eq!(m.species(), 2);
        assert_eq!(m.nonlocal_terms().len(), 2);
        assert!(KeyfitzKranzer::new(-1.0).is_err());
    }
}
