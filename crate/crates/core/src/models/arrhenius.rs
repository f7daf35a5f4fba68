use super::{check_eta, Model, ProductForm};
use crate::error::{Error, Result};
use crate::kernels::{FieldSource, KernelShape, NonlocalTerm};

/// `∂ₜρ + ∂ₓ(ρ(1 − ρ) e^{−ω∗ρ}) = 0` with a look-ahead kernel on `[0, η]`.
#[derive(Debug, Clone)]
pub struct Arrhenius {
    terms: Vec<NonlocalTerm>,
}

impl Arrhenius {
    pub fn new(eta: f64, kernel: KernelShape) -> Result<Self> {
        check_eta(eta)?;
        if !matches!(
            kernel,
            KernelShape::Constant | KernelShape::Linear | KernelShape::Concave
        ) {
            return Err(Error::Config(format!(
                "arrhenius needs a look-ahead kernel on [0, eta] (constant, linear or concave), got '{kernel}'"
            )));
        }
        Ok(Self {
            terms: vec![NonlocalTerm::single(FieldSource::Species(0), kernel.build(eta)?)],
        })
    }
}

impl Model for Arrhenius {
    fn name(&self) -> &'static str {
        "arrhenius"
    }

    fn species_names(&self) -> &'static [&'static str] {
        &["rho"]
    }

    fn nonlocal_terms(&self) -> &[NonlocalTerm] {
        &self.terms
    }

    fn flux(&self, _k: usize, rho: f64, r: &[f64]) -> f64 {
        rho * (1.0 - rho) * (-r[0]).exp()
    }

    fn flux_drho(&self, _k: usize, rho: f64, r: &[f64]) -> f64 {
        (1.0 - 2.0 * rho) * (-r[0]).exp()
    }

    fn product_form(&self) -> Option<&dyn ProductForm> {
        Some(self)
    }

    fn rho_min(&self) -> Option<f64> {
        Some(0.0)
    }

    fn rho_max(&self) -> Option<f64> {
        Some(1.0)
    }
}

impl ProductForm for Arrhenius {
    fn g(&self, _k: usize, rho: f64) -> f64 {
        rho * (1.0 - rho)
    }

    fn velocity(&self, _k: usize, r: &[f64]) -> f64 {
        (-r[0]).exp()
    }

    fn velocity_grad(&self, _k: usize, r: &[f64], _l: usize) -> f64 {
        -(-r[0]).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_vanishes_at_both_bounds() {
        let m = Arrhenius::new(0.2, KernelShape::Linear).unwrap();
        for r in [-1.0, 0.0, 0.7] {
            assert_eq!(m.flux(0, 0.0, &[r]), 0.0);
            assert_eq!(m.flux(0, 1.0, &[r]), 0.0);
        }
        assert_eq!(m.velocity(0, &[0.0]), 1.0);
    }

    #[test]
    fn concave_kernel_peak() {
        let eta = 0.2;
        let m = Arrhenius::new(eta, KernelShape::Concave).unwrap();
        let w = &m.nonlocal_terms()[0].parts[0].kernel;
        assert!((w.eval(0.0) - 3.0 / (2.0 * eta)).abs() < 1e-12);
        assert!(Arrhenius::new(eta, KernelShape::SymmetricParabola).is_err());
    }
}
