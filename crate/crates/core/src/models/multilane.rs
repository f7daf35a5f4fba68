use super::{check_eta, Model, ProductForm};
use crate::error::Result;
use crate::kernels::{FieldSource, KernelShape, NonlocalTerm};

/// Two-lane traffic with lane changing:
/// `∂ₜρ¹ + ∂ₓ(ρ¹ v(ω∗ρ¹)) = −S`, `∂ₜρ² + ∂ₓ(ρ² v(ω∗ρ²)) = S`, `v(ρ) = 1 − ρ²`.
#[derive(Debug, Clone)]
pub struct Multilane {
    terms: Vec<NonlocalTerm>,
}

impl Multilane {
    pub fn new(eta: f64) -> Result<Self> {
        Self::with_kernel(eta, KernelShape::Linear)
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

    pub fn v(r: f64) -> f64 {
        1.0 - r * r
    }

    /// Net flow from lane 1 into lane 2.
    pub fn exchange(rho: &[f64], r: &[f64]) -> f64 {
        let dv = Self::v(r[1]) - Self::v(r[0]);
        if dv >= 0.0 {
            dv * rho[0] * (1.0 - rho[1])
        } else {
            dv * rho[1] * (1.0 - rho[0])
        }
    }
}

impl Model for Multilane {
    fn name(&self) -> &'static str {
        "multilane"
    }

    fn species_names(&self) -> &'static [&'static str] {
        &["rho1", "rho2"]
    }

    fn nonlocal_terms(&self) -> &[NonlocalTerm] {
        &self.terms
    }

    fn flux(&self, k: usize, rho: f64, r: &[f64]) -> f64 {
        rho * Self::v(r[k])
    }

    fn flux_drho(&self, k: usize, _rho: f64, r: &[f64]) -> f64 {
        Self::v(r[k])
    }

    fn product_form(&self) -> Option<&dyn ProductForm> {
        Some(self)
    }

    fn has_source(&self) -> bool {
        true
    }

    fn source(&self, k: usize, rho: &[f64], r: &[f64]) -> f64 {
        let s = Self::exchange(rho, r);
        if k == 0 {
            -s
        } else {
            s
        }
    }

    fn source_drho(&self, k: usize, rho: &[f64], r: &[f64]) -> f64 {
        let dv = Self::v(r[1]) - Self::v(r[0]);
        match (k, dv >= 0.0) {
            (0, true) => -dv * (1.0 - rho[1]),
            (1, true) => -dv * rho[0],
            (0, false) => dv * rho[1],
            _ => dv * (1.0 - rho[0]),
        }
    }

    fn rho_min(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl ProductForm for Multilane {
    fn g(&self, _k: usize, rho: f64) -> f64 {
        rho
    }

    fn velocity(&self, k: usize, r: &[f64]) -> f64 {
        Self::v(r[k])
    }

    fn velocity_grad(&self, k: usize, r: &[f64], l: usize) -> f64 {
        if k == l {
            -2.0 * r[k]
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn source_cases() {
        let m = Multilane::new(0.5).unwrap();
        assert_eq!(m.source(0, &[0.3, 0.6], &[0.4, 0.4]), 0.0);
        assert_eq!(m.source(0, &[0.0, 0.0], &[0.2, 0.7]), 0.0);
        assert_eq!(m.source(1, &[0.0, 0.0], &[0.2, 0.7]), 0.0);
        let s = m.source(1, &[0.5, 0.2], &[0.5, 0.1]);
        assert!((s - (0.99 - 0.75) * 0.5 * 0.8).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn sources_are_antisymmetric(a in -1.0f64..2.0, b in -1.0f64..2.0, r1 in -1.5f64..1.5, r2 in -1.5f64..1.5) {
            let m = Multilane::new(0.5).unwrap();
            let (rho, r) = ([a, b], [r1, r2]);
            prop_assert_eq!(m.source(0, &rho, &r), -m.source(1, &rho, &r));
        }

        #[test]
        fn source_derivative_matches_differences(a in 0.05f64..0.95, b in 0.05f64..0.95, r1 in -0.9f64..0.9, r2 in -0.9f64..0.9) {
            prop_assume!((r1.abs() - r2.abs()).abs() > 1e-3);
            let m = Multilane::new(0.5).unwrap();
            let r = [r1, r2];
            let h = 1e-7;
            for k in 0..2 {
                let mut up = [a, b];
                let mut dn = [a, b];
                up[k] += h;
                dn[k] -= h;
                let fd = (m.source(k, &up, &r) - m.source(k, &dn, &r)) / (2.0 * h);
                prop_assert!((fd - m.source_drho(k, &[a, b], &r)).abs() < 1e-6);
            }
        }
    }
}
