//! Convolution kernels and the discrete nonlocal terms built from them:
//! the field `R`, its time derivative `R_t` and its space derivative `∂ₓR`.
//!
//! A kernel `ω` supported on `[η₁, η₂]` (with `η₁ ≤ 0 ≤ η₂`) is sampled on
//! the grid through `N₁ = |η₁|/Δx` and `N₂ = η₂/Δx`. The two end
//! half-cells are integrated against the limited linear reconstruction and
//! sampled at the quarter points `(¼ − N₁)Δx` and `(N₂ − ¼)Δx`; every full
//! cell in between is sampled at its centre.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conv::BandCorrelator;
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, CellArray, Layout, Window};

pub type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolute tolerance for kernel integrals.
pub const INTEGRAL_TOLERANCE: f64 = 1e-10;

/// Tolerance on `|η/Δx − round(η/Δx)|` for support/grid compatibility.
pub const RATIO_TOLERANCE: f64 = 1e-9;

/// A pointwise kernel on a compact support containing zero.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    omega: KernelFn,
    omega_prime: Option<KernelFn>,
    support: (f64, f64),
    unit_integral: bool,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("has_derivative", &self.omega_prime.is_some())
            .field("unit_integral", &self.unit_integral)
            .finish()
    }
}

impl KernelSpec {
    pub fn new(
        name: impl Into<String>,
        support: (f64, f64),
        omega: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (a, b) = support;
        if !(a.is_finite() && b.is_finite()) || a > 0.0 || b < 0.0 || a == b {
            return Err(Error::Kernel(format!(
                "support [{a}, {b}] must be finite, contain 0 and have positive length"
            )));
        }
        Ok(Self {
            name: name.into(),
            omega: Arc::new(omega),
            omega_prime: None,
            support,
            unit_integral: false,
        })
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.omega_prime = Some(Arc::new(d));
        self
    }

    /// Declares the kernel to integrate to one; checked by [`KernelSpec::validate`].
    pub fn claim_unit_integral(mut self) -> Self {
        self.unit_integral = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn claims_unit_integral(&self) -> bool {
        self.unit_integral
    }

    pub fn has_derivative(&self) -> bool {
        self.omega_prime.is_some()
    }

    /// `ω(x)` on the closed support, zero outside.
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.support;
        if x < a || x > b {
            0.0
        } else {
            (self.omega)(x)
        }
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        let (a, b) = self.support;
        self.omega_prime
            .as_ref()
            .map(|d| if x < a || x > b { 0.0 } else { d(x) })
    }

    /// `∫ ω` over the support by double-exponential quadrature.
    pub fn integral(&self) -> f64 {
        let (a, b) = self.support;
        let omega = &self.omega;
        quadrature::integrate(|x| omega(x), a, b, INTEGRAL_TOLERANCE * 1e-2).integral
    }

    /// Sampled `max |ω|`.
    pub fn sup_norm(&self) -> f64 {
        let (a, b) = self.support;
        (0..=512)
            .map(|i| self.eval(a + (b - a) * i as f64 / 512.0).abs())
            .fold(0.0, f64::max)
    }

    /// Checks non-negativity on sample points and the unit-integral claim.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.support;
        for i in 0..=1000 {
            let x = a + (b - a) * i as f64 / 1000.0;
            let w = self.eval(x);
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Kernel(format!(
                    "kernel '{}' is negative or not finite at x = {x}: {w}",
                    self.name
                )));
            }
        }
        if self.unit_integral {
            let total = self.integral();
            if (total - 1.0).abs() > 1e-8 {
                return Err(Error::Kernel(format!(
                    "kernel '{}' claims unit integral but integrates to {total}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Rescales `spec` to unit integral.
pub fn normalize_kernel(spec: KernelSpec) -> Result<KernelSpec> {
    let total = spec.integral();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Kernel(format!(
            "kernel '{}' has non-positive integral {total}",
            spec.name
        )));
    }
    let scale = 1.0 / total;
    let omega = spec.omega.clone();
    let omega_prime = spec.omega_prime.clone();
    Ok(KernelSpec {
        name: spec.name,
        omega: Arc::new(move |x| scale * omega(x)),
        omega_prime: omega_prime.map(|d| Arc::new(move |x| scale * d(x)) as KernelFn),
        support: spec.support,
        unit_integral: true,
    })
}

/// Built-in kernel families, each parameterised by its range `η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "kebab-case")]
pub enum KernelShape {
    /// `1/η` on `[0, η]`.
    Constant,
    /// `(2/η)(1 − x/η)` on `[0, η]`.
    Linear,
    /// `3(η² − x²)/(2η³)` on `[0, η]`.
    Concave,
    /// `3(η² − x²)/(4η³)` on `[−η, η]`.
    SymmetricParabola,
    /// `L (−x(η + x))^{5/2}` on `[−η, 0]`, normalised numerically.
    KkPower52,
    /// `L (x(η − x))^{5/2}` on `[0, η]`, the reflection of [`KernelShape::KkPower52`].
    KkPower52Ahead,
}

impl KernelShape {
    pub const ALL: [KernelShape; 6] = [
        KernelShape::Constant,
        KernelShape::Linear,
        KernelShape::Concave,
        KernelShape::SymmetricParabola,
        KernelShape::KkPower52,
        KernelShape::KkPower52Ahead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelShape::Constant => "constant",
            KernelShape::Linear => "linear",
            KernelShape::Concave => "concave",
            KernelShape::SymmetricParabola => "symmetric-parabola",
            KernelShape::KkPower52 => "kk-power52",
            KernelShape::KkPower52Ahead => "kk-power52-ahead",
        }
    }

    pub fn build(self, eta: f64) -> Result<KernelSpec> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!("kernel range eta must be positive, got {eta}")));
        }
        let name = self.name();
        let spec = match self {
            KernelShape::Constant => KernelSpec::new(name, (0.0, eta), move |_| 1.0 / eta)?
                .with_derivative(|_| 0.0)
                .claim_unit_integral(),
            KernelShape::Linear => KernelSpec::new(name, (0.0, eta), move |x| 2.0 / eta * (1.0 - x / eta))?
                .with_derivative(move |_| -2.0 / (eta * eta))
                .claim_unit_integral(),
            KernelShape::Concave => KernelSpec::new(name, (0.0, eta), move |x| {
                3.0 * (eta * eta - x * x) / (2.0 * eta.powi(3))
            })?
            .with_derivative(move |x| -3.0 * x / eta.powi(3))
            .claim_unit_integral(),
            KernelShape::SymmetricParabola => KernelSpec::new(name, (-eta, eta), move |x| {
                3.0 * (eta * eta - x * x) / (4.0 * eta.powi(3))
            })?
            .with_derivative(move |x| -3.0 * x / (2.0 * eta.powi(3)))
            .claim_unit_integral(),
            KernelShape::KkPower52 => {
                let raw = KernelSpec::new(name, (-eta, 0.0), move |x| (-x * (eta + x)).max(0.0).powf(2.5))?
                    .with_derivative(move |x| 2.5 * (-x * (eta + x)).max(0.0).powf(1.5) * (-eta - 2.0 * x));
                normalize_kernel(raw)?
            }
            KernelShape::KkPower52Ahead => {
                let raw = KernelSpec::new(name, (0.0, eta), move |x| (x * (eta - x)).max(0.0).powf(2.5))?
                    .with_derivative(move |x| 2.5 * (x * (eta - x)).max(0.0).powf(1.5) * (eta - 2.0 * x));
                normalize_kernel(raw)?
            }
        };
        Ok(spec)
    }
}

impl FromStr for KernelShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelShape::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown kernel '{s}' (expected one of: {})",
                KernelShape::ALL.map(|k| k.name()).join(", ")
            ))
        })
    }
}

impl fmt::Display for KernelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `|η|/Δx` as an integer, or a configuration error.
pub fn support_cells(eta: f64, dx: f64) -> Result<usize> {
    let ratio = eta.abs() / dx;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > RATIO_TOLERANCE * rounded.max(1.0) {
        return Err(Error::Config(format!(
            "kernel support {eta} is not an integer multiple of dx = {dx} (ratio {ratio}); \
             rounding the support up to whole cells is not implemented"
        )));
    }
    Ok(rounded as usize)
}

/// Quadrature weights of the discrete convolution on a grid of spacing `dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWeights {
    pub dx: f64,
    pub n1: usize,
    pub n2: usize,
    /// `(Δx/2) ω((¼ − N₁)Δx)`, applied at offset `−N₁`.
    pub left_weight: f64,
    /// `Δx ω((l + 1)Δx)` for `l = −N₁ … N₂ − 2`, at offsets `−N₁ + 1 … N₂ − 1`.
    pub interior: Vec<f64>,
    /// `(Δx/2) ω((N₂ − ¼)Δx)`, applied at offset `N₂`.
    pub right_weight: f64,
}

impl QuadratureWeights {
    pub fn build(spec: &KernelSpec, dx: f64) -> Result<Self> {
        let (a, b) = spec.support();
        let n1 = support_cells(a, dx)?;
        let n2 = support_cells(b, dx)?;
        let left_weight = 0.5 * dx * spec.eval(left_node(n1, dx));
        let right_weight = 0.5 * dx * spec.eval(right_node(n2, dx));
        let interior = interior_nodes(n1, n2, dx).map(|x| dx * spec.eval(x)).collect();
        Ok(Self {
            dx,
            n1,
            n2,
            left_weight,
            interior,
            right_weight,
        })
    }

    pub fn sum(&self) -> f64 {
        self.left_weight + self.interior.iter().sum::<f64>() + self.right_weight
    }

    /// Dense weights over the offsets `−N₁ ..= N₂`.
    pub fn band(&self) -> Vec<f64> {
        let mut band = Vec::with_capacity(self.n1 + self.n2 + 1);
        band.push(self.left_weight);
        band.extend_from_slice(&self.interior);
        band.push(self.right_weight);
        band
    }

    /// `(offset, weight)` pairs.
    pub fn offsets(&self) -> Vec<(isize, f64)> {
        let lo = -(self.n1 as isize);
        self.band()
            .into_iter()
            .enumerate()
            .map(|(i, w)| (lo + i as isize, w))
            .collect()
    }
}

fn left_node(n1: usize, dx: f64) -> f64 {
    (0.25 - n1 as f64) * dx
}

fn right_node(n2: usize, dx: f64) -> f64 {
    (n2 as f64 - 0.25) * dx
}

fn interior_nodes(n1: usize, n2: usize, dx: f64) -> impl Iterator<Item = f64> {
    let lo = -(n1 as isize);
    let hi = n2 as isize - 2;
    (lo..=hi).map(move |l| (l + 1) as f64 * dx)
}

/// A discrete nonlocal operator of the form
/// `out_j = Σ_o band_o u_{j+o} + (Δx/4)(left_slope · s_{j−N₁} − right_slope · s_{j+N₂})`.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub n1: usize,
    pub n2: usize,
    pub dx: f64,
    pub left_slope: f64,
    pub right_slope: f64,
    correlator: BandCorrelator,
}

impl Stencil {
    fn new(n1: usize, n2: usize, dx: f64, band: Vec<f64>, left_slope: f64, right_slope: f64) -> Self {
        debug_assert_eq!(band.len(), n1 + n2 + 1);
        Self {
            n1,
            n2,
            dx,
            left_slope,
            right_slope,
            correlator: BandCorrelator::new(band),
        }
    }

    /// Midpoint-rule convolution with slope-corrected end intervals.
    pub fn field(w: &QuadratureWeights) -> Self {
        Self::new(w.n1, w.n2, w.dx, w.band(), w.left_weight, w.right_weight)
    }

    /// The same weights without end corrections (first-order end intervals).
    pub fn time_derivative(w: &QuadratureWeights) -> Self {
        Self::new(w.n1, w.n2, w.dx, w.band(), 0.0, 0.0)
    }

    /// `∂ₓ(ω ∗ u)` from the boundary terms of the support plus the
    /// convolution with `ω′`.
    pub fn space_derivative(spec: &KernelSpec, dx: f64) -> Result<Self> {
        if !spec.has_derivative() {
            return Err(Error::Config(format!(
                "kernel '{}' has no derivative; the product-rule flux slopes are unavailable",
                spec.name()
            )));
        }
        let (a, b) = spec.support();
        let n1 = support_cells(a, dx)?;
        let n2 = support_cells(b, dx)?;
        let d = |x: f64| spec.derivative(x).unwrap_or(0.0);
        let left_d = -0.5 * dx * d(left_node(n1, dx));
        let right_d = -0.5 * dx * d(right_node(n2, dx));
        let mut band = Vec::with_capacity(n1 + n2 + 1);
        band.push(-spec.eval(a) + left_d);
        band.extend(interior_nodes(n1, n2, dx).map(|x| -dx * d(x)));
        band.push(spec.eval(b) + right_d);
        Ok(Self::new(n1, n2, dx, band, left_d, right_d))
    }

    pub fn band(&self) -> &[f64] {
        self.correlator.band()
    }

    /// Evaluates on `out` from values (and optional slopes) that cover
    /// `out` widened by `N₁` on the left and `N₂` on the right.
    pub fn apply(&self, values: &CellArray, slopes: Option<&CellArray>, out: Window) -> CellArray {
        let (n1, n2) = (self.n1 as isize, self.n2 as isize);
        let input = values.gather(out.lo - n1, out.hi + n2);
        let mut result = self.correlator.correlate(&input);
        if let Some(s) = slopes {
            if self.left_slope != 0.0 || self.right_slope != 0.0 {
                let q = 0.25 * self.dx;
                for (r, j) in result.iter_mut().zip(out.indices()) {
                    *r += q * (self.left_slope * s.get(j - n1) - self.right_slope * s.get(j + n2));
                }
            }
        }
        CellArray::from_vec(out, result)
    }
}

/// Which per-cell field a kernel is convolved with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSource {
    Species(usize),
    /// A model-defined function of all species (see `DerivedField`).
    Derived,
}

/// One summand `∫ ω(y − x) u(y) dy` of a nonlocal term.
#[derive(Debug, Clone)]
pub struct Convolution {
    pub source: FieldSource,
    pub kernel: KernelSpec,
}

/// The nonlocal term `R^ℓ = Σ` of its convolutions.
#[derive(Debug, Clone)]
pub struct NonlocalTerm {
    pub parts: Vec<Convolution>,
}

impl NonlocalTerm {
    pub fn single(source: FieldSource, kernel: KernelSpec) -> Self {
        Self {
            parts: vec![Convolution { source, kernel }],
        }
    }
}

/// Nonlocal terms `R_j^ℓ` on the interior cells.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalField {
    pub entries: Vec<Vec<f64>>,
    pub time: f64,
}

/// Per-cell inputs for the nonlocal evaluations, indexed by [`FieldSource`].
pub struct SourceFields<'a> {
    pub species: &'a [CellArray],
    pub derived: Option<&'a CellArray>,
}

impl SourceFields<'_> {
    fn get(&self, source: FieldSource) -> &CellArray {
        match source {
            FieldSource::Species(k) => &self.species[k],
            FieldSource::Derived => self.derived.expect("derived field not supplied"),
        }
    }
}

#[derive(Debug, Clone)]
struct PartStencils {
    source: FieldSource,
    weights: QuadratureWeights,
    field: Stencil,
    time: Stencil,
    space: Option<Stencil>,
}

/// All stencils of a model's nonlocal terms for one grid spacing.
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    terms: Vec<Vec<PartStencils>>,
    reach: (usize, usize),
}

impl NonlocalOperator {
    pub fn new(terms: &[NonlocalTerm], dx: f64, with_space_derivative: bool) -> Result<Self> {
        let mut reach = (0, 0);
        let mut built = Vec::with_capacity(terms.len());
        for term in terms {
            let mut parts = Vec::with_capacity(term.parts.len());
            for part in &term.parts {
                let weights = QuadratureWeights::build(&part.kernel, dx)?;
                reach.0 = reach.0.max(weights.n1);
                reach.1 = reach.1.max(weights.n2);
                let space = if with_space_derivative {
                    Some(Stencil::space_derivative(&part.kernel, dx)?)
                } else {
                    None
                };
                parts.push(PartStencils {
                    source: part.source,
                    field: Stencil::field(&weights),
                    time: Stencil::time_derivative(&weights),
                    weights,
                    space,
                });
            }
            built.push(parts);
        }
        Ok(Self { terms: built, reach })
    }

    /// Number of nonlocal terms `m`.
    pub fn count(&self) -> usize {
        self.terms.len()
    }

    /// Largest `(N₁, N₂)` over all kernels.
    pub fn reach(&self) -> (usize, usize) {
        self.reach
    }

    pub fn weights(&self, term: usize, part: usize) -> &QuadratureWeights {
        &self.terms[term][part].weights
    }

    /// `R^ℓ` with slope-corrected end intervals.
    pub fn field(&self, values: &SourceFields, slopes: &SourceFields, out: Window) -> Vec<CellArray> {
        self.sum_parts(out, |p| {
            p.field.apply(values.get(p.source), Some(slopes.get(p.source)), out)
        })
    }

    /// `R^ℓ` from cell values alone (midpoint rule on every interval).
    pub fn field_plain(&self, values: &SourceFields, out: Window) -> Vec<CellArray> {
        self.sum_parts(out, |p| p.time.apply(values.get(p.source), None, out))
    }

    /// `R_t^ℓ` from the integrands `S − σ` (or the derived-field analogue).
    pub fn time_derivative(&self, integrands: &SourceFields, out: Window) -> Vec<CellArray> {
        self.sum_parts(out, |p| p.time.apply(integrands.get(p.source), None, out))
    }

    /// `∂ₓR^ℓ`; requires the operator to be built with derivatives.
    pub fn space_derivative(
        &self,
        values: &SourceFields,
        slopes: &SourceFields,
        out: Window,
    ) -> Result<Vec<CellArray>> {
        if self.terms.iter().flatten().any(|p| p.space.is_none()) {
            return Err(Error::Config(
                "nonlocal operator was built without kernel derivatives".into(),
            ));
        }
        Ok(self.sum_parts(out, |p| {
            p.space
                .as_ref()
                .expect("checked above")
                .apply(values.get(p.source), Some(slopes.get(p.source)), out)
        }))
    }

    fn sum_parts(&self, out: Window, mut eval: impl FnMut(&PartStencils) -> CellArray) -> Vec<CellArray> {
        self.terms
            .iter()
            .map(|parts| {
                let mut acc: Option<Vec<f64>> = None;
                for p in parts {
                    let r = eval(p);
                    match acc.as_mut() {
                        None => acc = Some(r.as_slice().to_vec()),
                        Some(a) => a.iter_mut().zip(r.as_slice()).for_each(|(x, y)| *x += y),
                    }
                }
                CellArray::from_vec(out, acc.unwrap_or_else(|| vec![0.0; out.len()]))
            })
            .collect()
    }
}

fn check_lengths(values: &[Vec<f64>], slopes: Option<&[Vec<f64>]>) -> Result<usize> {
    let cells = values.first().map(Vec::len).unwrap_or(0);
    if values.iter().any(|v| v.len() != cells) {
        return Err(Error::Shape("cell values differ in length".into()));
    }
    if let Some(s) = slopes {
        if s.len() != values.len() || s.iter().any(|v| v.len() != cells) {
            return Err(Error::Shape("slopes do not match the cell values".into()));
        }
    }
    Ok(cells)
}

fn extend_all(values: &[Vec<f64>], layout: Layout, pad: (usize, usize)) -> Vec<CellArray> {
    let w = layout.window(pad.0, pad.1);
    values.iter().map(|v| CellArray::extend(v, layout.bc, w)).collect()
}

fn interior_entries(arrays: Vec<CellArray>, cells: usize) -> Vec<Vec<f64>> {
    arrays.into_iter().map(|a| a.interior(cells)).collect()
}

/// `R_j^ℓ` on the interior cells for per-species values and slopes, ghost
/// cells supplied by `bc`.
pub fn eval_nonlocal_field(
    values: &[Vec<f64>],
    slopes: &[Vec<f64>],
    op: &NonlocalOperator,
    bc: BoundaryCondition,
) -> Result<NonlocalField> {
    let cells = check_lengths(values, Some(slopes))?;
    let layout = Layout::new(cells, bc);
    let v = extend_all(values, layout, op.reach());
    let s = extend_all(slopes, layout, op.reach());
    let r = op.field(
        &SourceFields {
            species: &v,
            derived: None,
        },
        &SourceFields {
            species: &s,
            derived: None,
        },
        layout.interior(),
    );
    Ok(NonlocalField {
        entries: interior_entries(r, cells),
        time: 0.0,
    })
}

/// `R_t^ℓ` from the assembled per-species integrands `S_k − σ^k`.
pub fn eval_nonlocal_time_derivative(
    integrands: &[Vec<f64>],
    op: &NonlocalOperator,
    bc: BoundaryCondition,
) -> Result<NonlocalField> {
    let cells = check_lengths(integrands, None)?;
    let layout = Layout::new(cells, bc);
    let v = extend_all(integrands, layout, op.reach());
    let r = op.time_derivative(
        &SourceFields {
            species: &v,
            derived: None,
        },
        layout.interior(),
    );
    Ok(NonlocalField {
        entries: interior_entries(r, cells),
        time: 0.0,
    })
}

/// `∂ₓR_j^ℓ` on the interior cells.
pub fn eval_nonlocal_space_derivative(
    values: &[Vec<f64>],
    slopes: &[Vec<f64>],
    op: &NonlocalOperator,
    bc: BoundaryCondition,
) -> Result<NonlocalField> {
    let cells = check_lengths(values, Some(slopes))?;
    let layout = Layout::new(cells, bc);
    let v = extend_all(values, layout, op.reach());
    let s = extend_all(slopes, layout, op.reach());
    let r = op.space_derivative(
        &SourceFields {
            species: &v,
            derived: None,
        },
        &SourceFields {
            species: &s,
            derived: None,
        },
        layout.interior(),
    )?;
    Ok(NonlocalField {
        entries: interior_entries(r, cells),
        time: 0.0,
    })
}
