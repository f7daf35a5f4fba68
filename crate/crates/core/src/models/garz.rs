use super::{check_eta, DerivedField, Model};
use crate::error::Result;
use crate::kernels::{FieldSource, KernelShape, NonlocalTerm};

/// Density floor in `w = q/ρ`.
pub const RHO_FLOOR: f64 = 1e-12;

/// `∂ₜρ + ∂ₓ(ρ ω∗v) = 0`, `∂ₜq + ∂ₓ(q ω∗v) = 0` with `v(ρ, w) = w − 6ρ`, `w = q/ρ`.
#[derive(Debug, Clone)]
pub struct Garz {
    terms: Vec<NonlocalTerm>,
}

impl Garz {
    pub fn new(eta: f64) -> Result<Self> {
        Self::with_kernel(eta, KernelShape::Linear)
    }

    pub fn with_kernel(eta: f64, kernel: KernelShape) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self {
            terms: vec![NonlocalTerm::single(FieldSource::Derived, kernel.build(eta)?)],
        })
    }

    pub fn marker(rho: f64, q: f64) -> f64 {
        q / rho.max(RHO_FLOOR)
    }

    pub fn v(rho: f64, w: f64) -> f64 {
        w - 6.0 * rho
    }
}

impl Model for Garz {
    fn name(&self) -> &'static str {
        "garz"
    }

    fn species_names(&self) -> &'static [&'static str] {
        &["rho", "q"]
    }

    fn nonlocal_terms(&self) -> &[NonlocalTerm] {
        &self.terms
    }

    fn flux(&self, _k: usize, rho: f64, r: &[f64]) -> f64 {
        rho * r[0]
    }

    fn flux_drho(&self, _k: usize, _rho: f64, r: &[f64]) -> f64 {
        r[0]
    }

    fn derived_field(&self) -> Option<&dyn DerivedField> {
        Some(self)
    }

    fn rho_min(&self) -> Option<f64> {
        Some(0.0)
    }

    fn extra_columns(&self) -> &'static [&'static str] {
        &["w"]
    }

    fn extra_values(&self, rho: &[f64]) -> Vec<f64> {
        vec![Self::marker(rho[0], rho[1])]
    }
}

impl DerivedField for Garz {
    fn value(&self, rho: &[f64]) -> f64 {
        Self::v(rho[0], Self::marker(rho[0], rho[1]))
    }

    /// `∂ₜv = ∂ₜρ (v₁ − q v₂/ρ²) + ∂ₜq v₂/ρ` with `v₁ = −6`, `v₂ = 1`.
    fn time_integrand(&self, rho: &[f64], rates: &[f64]) -> f64 {
        let r = rho[0].max(RHO_FLOOR);
        rates[0] * (-6.0 - rho[1] / (r * r)) + rates[1] / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marker_values() {
        assert!((Garz::marker(0.05, 7.0 / 400.0) - 0.35).abs() < 1e-15);
        assert!((Garz::marker(0.05, 1.0 / 25.0) - 0.8).abs() < 1e-15);
        assert!((Garz::v(0.05, 0.35) - 0.05).abs() < 1e-15);
        let g = Garz::new(0.1).unwrap();
        assert!((g.value(&[0.05, 7.0 / 400.0]) - 0.05).abs() < 1e-15);
        assert!(g.value(&[0.0, 0.0]).is_finite());
    }

    #[test]
    fn integrand_is_the_chain_rule() {
        let g = Garz::new(0.1).unwrap();
        let (rho, q) = (0.3, 0.42);
        let (drho, dq) = (0.7, -1.3);
        let h = 1e-7;
        let fd = (g.value(&[rho + h * drho, q + h * dq]) - g.value(&[rho - h * drho, q - h * dq])) / (2.0 * h);
        assert!((g.time_integrand(&[rho, q], &[drho, dq]) - fd).abs() < 1e-6);
        assert_eq!(g.time_integrand(&[rho, q], &[0.0, 0.0]), 0.0);
    }
}
