//! Minmod limiters and the slope fields of the central schemes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, CellArray, Grid, Layout, Window};
use crate::kernels::NonlocalField;
use crate::models::{Model, ProductForm};
use crate::state::SystemState;

/// `0` on a sign change, otherwise the argument of smaller magnitude (`a` on ties).
#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() <= b.abs() {
        a
    } else {
        b
    }
}

/// Three-argument minmod: `0` unless all signs agree, else the smallest magnitude.
#[inline]
pub fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    minmod(minmod(a, b), c)
}

/// `minmod(a, b, sign(b)·cap)`.
#[inline]
pub fn minmod3_clipped(a: f64, b: f64, cap: f64) -> f64 {
    minmod3(a, b, b.signum() * cap)
}

/// Optional magnitude cap `|Δx s| ≤ C Δx^δ` on all limited slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(deny_unknown_fields, default)]
pub struct ClipConfig {
    pub enabled: bool,
    pub c: f64,
    pub delta: f64,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            c: 1.0,
            delta: 0.5,
        }
    }
}

impl ClipConfig {
    pub fn on() -> Self {
        Self {
            enabled: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("clip.c must be positive, got {}", self.c)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "clip.delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// The cap on `|Δx s|` for this grid, if enabled.
    pub fn cap(&self, dx: f64) -> Option<f64> {
        self.enabled.then(|| self.c * dx.powf(self.delta))
    }
}

/// Limited one-cell difference from the backward and forward differences.
#[inline]
pub fn limited_difference(backward: f64, forward: f64, cap: Option<f64>) -> f64 {
    match cap {
        None => minmod(forward, backward),
        Some(cap) => minmod3_clipped(forward, backward, cap),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeKind {
    Cell,
    FluxV1,
    FluxV2,
    Staggered,
}

/// Per-species slopes on the interior cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeField {
    pub kind: SlopeKind,
    pub values: Vec<Vec<f64>>,
}

/// Limited slopes `minmod(u_{j+1} − u_j, u_j − u_{j−1})/Δx` on `out`;
/// `u` must cover `out` widened by one cell on each side.
pub fn slopes_on(u: &CellArray, out: Window, dx: f64, cap: Option<f64>) -> CellArray {
    CellArray::from_fn(out, |j| {
        let c = u.get(j);
        let s = limited_difference(c - u.get(j - 1), u.get(j + 1) - c, cap) / dx;
        match cap {
            Some(cap) if (s * dx).abs() > cap => s * (1.0 - 4.0 * f64::EPSILON),
            _ => s,
        }
    })
}

/// Product-rule flux slopes
/// `minmod(Δg)/Δx · V_k(𝐑_j) + g_k(ρ_j) Σ_ℓ ∂_{R_ℓ}V_k(𝐑_j) ∂ₓR_j^ℓ` on `out`.
pub fn flux_slopes_v2_on(
    p: &dyn ProductForm,
    k: usize,
    rho: &CellArray,
    r: &[CellArray],
    dxr: &[CellArray],
    out: Window,
    dx: f64,
) -> CellArray {
    let mut rv = vec![0.0; r.len()];
    CellArray::from_fn(out, |j| {
        for (slot, field) in rv.iter_mut().zip(r) {
            *slot = field.get(j);
        }
        let g = p.g(k, rho.get(j));
        let dg = minmod(p.g(k, rho.get(j + 1)) - g, g - p.g(k, rho.get(j - 1))) / dx;
        let mut chain = 0.0;
        for (l, d) in dxr.iter().enumerate() {
            chain += p.velocity_grad(k, &rv, l) * d.get(j);
        }
        dg * p.velocity(k, &rv) + g * chain
    })
}

fn extend(values: &[f64], layout: Layout, pad: usize) -> CellArray {
    CellArray::extend(values, layout.bc, layout.window(pad, pad))
}

fn check_cells(state: &SystemState, field: &NonlocalField, m: usize) -> Result<()> {
    if field.entries.len() != m || field.entries.iter().any(|e| e.len() != state.cells()) {
        return Err(Error::Shape(format!(
            "nonlocal field has {} entries of length {:?}, expected {m} of length {}",
            field.entries.len(),
            field.entries.first().map(Vec::len),
            state.cells()
        )));
    }
    Ok(())
}

/// Cell slopes `s_j^k` of every species.
pub fn cell_slopes(state: &SystemState, grid: &Grid, bc: BoundaryCondition, clip: ClipConfig) -> SlopeField {
    let layout = Layout::new(state.cells(), bc);
    let cap = clip.cap(grid.dx());
    let values = state
        .values()
        .iter()
        .map(|v| slopes_on(&extend(v, layout, 1), layout.interior(), grid.dx(), cap).interior(state.cells()))
        .collect();
    SlopeField {
        kind: SlopeKind::Cell,
        values,
    }
}

fn flux_values(model: &dyn Model, state: &SystemState, r: &NonlocalField, layout: Layout) -> Result<Vec<CellArray>> {
    let w = layout.window(1, 1);
    let rs: Vec<CellArray> = r.entries.iter().map(|e| extend(e, layout, 1)).collect();
    let mut rv = vec![0.0; rs.len()];
    let mut out = Vec::with_capacity(state.species_count());
    for (k, v) in state.values().iter().enumerate() {
        let rho = extend(v, layout, 1);
        let mut data = Vec::with_capacity(w.len());
        for j in w.indices() {
            for (slot, field) in rv.iter_mut().zip(&rs) {
                *slot = field.get(j);
            }
            let f = model.flux(k, rho.get(j), &rv);
            if !f.is_finite() {
                return Err(Error::Model(format!(
                    "{}: flux of species {k} is not finite at cell {j}",
                    model.name()
                )));
            }
            data.push(f);
        }
        out.push(CellArray::from_vec(w, data));
    }
    Ok(out)
}

/// Flux slopes from limited differences of `F_k(ρ_j^k, 𝐑_j)`.
pub fn flux_slopes_v1(
    model: &dyn Model,
    state: &SystemState,
    r: &NonlocalField,
    grid: &Grid,
    bc: BoundaryCondition,
    clip: ClipConfig,
) -> Result<SlopeField> {
    check_cells(state, r, model.nonlocal_terms().len())?;
    let layout = Layout::new(state.cells(), bc);
    let cap = clip.cap(grid.dx());
    let values = flux_values(model, state, r, layout)?
        .iter()
        .map(|f| slopes_on(f, layout.interior(), grid.dx(), cap).interior(state.cells()))
        .collect();
    Ok(SlopeField {
        kind: SlopeKind::FluxV1,
        values,
    })
}

/// Flux slopes from the product rule with the kernel-derivative approximation of `∂ₓR`.
pub fn flux_slopes_v2(
    model: &dyn Model,
    state: &SystemState,
    r: &NonlocalField,
    dxr: &NonlocalField,
    grid: &Grid,
    bc: BoundaryCondition,
) -> Result<SlopeField> {
    let p = model.product_form().ok_or_else(|| {
        Error::Config(format!(
            "model '{}' has no product form; use the flux-difference slopes",
            model.name()
        ))
    })?;
    let m = model.nonlocal_terms().len();
    check_cells(state, r, m)?;
    check_cells(state, dxr, m)?;
    let layout = Layout::new(state.cells(), bc);
    let rs: Vec<CellArray> = r.entries.iter().map(|e| extend(e, layout, 0)).collect();
    let ds: Vec<CellArray> = dxr.entries.iter().map(|e| extend(e, layout, 0)).collect();
    let values = state
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            flux_slopes_v2_on(p, k, &extend(v, layout, 1), &rs, &ds, layout.interior(), grid.dx())
                .interior(state.cells())
        })
        .collect();
    Ok(SlopeField {
        kind: SlopeKind::FluxV2,
        values,
    })
}

/// Slopes of staggered averages; entry `i` belongs to `x_{i+1/2}` and
/// ghosts are supplied by `bc`.
pub fn staggered_slopes(staggered: &[Vec<f64>], grid: &Grid, bc: BoundaryCondition, clip: ClipConfig) -> SlopeField {
    let cap = clip.cap(grid.dx());
    let values = staggered
        .iter()
        .map(|v| {
            let layout = Layout::new(v.len(), bc);
            slopes_on(&extend(v, layout, 1), layout.interior(), grid.dx(), cap).interior(v.len())
        })
        .collect();
    SlopeField {
        kind: SlopeKind::Staggered,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minmod_examples() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-1.0, 2.0), 0.0);
        assert_eq!(minmod(-3.0, -2.0), -2.0);
        assert_eq!(minmod(0.0, 5.0), 0.0);
        assert_eq!(minmod(1.5, 1.5), 1.5);
    }

    #[test]
    fn clipped_examples() {
        assert_eq!(minmod3_clipped(10.0, 10.0, 1.0), 1.0);
        assert_eq!(minmod3_clipped(0.1, 0.2, 1.0), 0.1);
        assert_eq!(minmod3_clipped(-1.0, 2.0, 1.0), 0.0);
        assert_eq!(minmod3_clipped(-10.0, -3.0, 1.0), -1.0);
    }

    proptest! {
        #[test]
        fn minmod_algebra(a in -1e3f64..1e3, b in -1e3f64..1e3, l in 1e-3f64..1e3) {
            let m = minmod(a, b);
            prop_assert!(m.abs() <= a.abs().min(b.abs()));
            prop_assert!(m * a >= 0.0);
            prop_assert_eq!(m, minmod(b, a));
            prop_assert!((minmod(l * a, l * b) - l * m).abs() <= 1e-12 * (l * m).abs());
        }
    }

    fn grid(cells: usize) -> Grid {
        Grid::new(0.0, 1.0, cells).unwrap()
    }

    #[test]
    fn cell_slope_cases() {
        let g = grid(10);
        let constant = SystemState::constant(&[0.3], 10).unwrap();
        let s = cell_slopes(&constant, &g, BoundaryCondition::Periodic, ClipConfig::default());
        assert!(s.values[0].iter().all(|&v| v == 0.0));

        let lin: Vec<f64> = g.centers().iter().map(|x| 2.5 * x).collect();
        let st = SystemState::new(vec![lin], 0.0).unwrap();
        let s = cell_slopes(&st, &g, BoundaryCondition::Periodic, ClipConfig::default());
        for j in 1..9 {
            assert!((s.values[0][j] - 2.5).abs() < 1e-12);
        }
        assert_eq!(s.values[0][0], 0.0);

        let mut peak = vec![0.0; 10];
        peak[4] = 1.0;
        let st = SystemState::new(vec![peak], 0.0).unwrap();
        let s = cell_slopes(&st, &g, BoundaryCondition::ZeroExtension, ClipConfig::default());
        assert_eq!(s.values[0][4], 0.0);
    }

    proptest! {
        #[test]
        fn clipped_slopes_respect_cap(v in proptest::collection::vec(-5.0f64..5.0, 8..40)) {
            let n = v.len();
            let g = grid(n);
            let st = SystemState::new(vec![v.clone()], 0.0).unwrap();
            let clip = ClipConfig::on();
            let cap = clip.cap(g.dx()).unwrap();
            let s = cell_slopes(&st, &g, BoundaryCondition::Periodic, clip);
            let plain = cell_slopes(&st, &g, BoundaryCondition::Periodic, ClipConfig::default());
            for j in 0..n {
                prop_assert!((g.dx() * s.values[0][j]).abs() <= cap);
                let l = v[(j + n - 1) % n];
                let r = v[(j + 1) % n];
                prop_assert!((g.dx() * plain.values[0][j]).abs() <= (r - v[j]).abs() + (v[j] - l).abs());
            }
        }
    }

    #[test]
    fn staggered_slope_cases() {
        let g = grid(8);
        let lin: Vec<f64> = (0..8).map(|i| 0.5 + 3.0 * (i as f64 + 1.0) * g.dx()).collect();
        let s = staggered_slopes(&[lin], &g, BoundaryCondition::ConstantExtension, ClipConfig::default());
        for i in 1..7 {
            assert!((s.values[0][i] - 3.0).abs() < 1e-12);
        }
        let mut spike = vec![0.0; 8];
        spike[3] = 2.0;
        let s = staggered_slopes(&[spike], &g, BoundaryCondition::Periodic, ClipConfig::default());
        assert_eq!(s.values[0][3], 0.0);
        let s = staggered_slopes(&[vec![1.0; 8]], &g, BoundaryCondition::Periodic, ClipConfig::default());
        assert!(s.values[0].iter().all(|&v| v == 0.0));
    }
}
