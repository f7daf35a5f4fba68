//! Cell-averaged system states and global diagnostics.

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Grid};

/// Cell averages of all species at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    values: Vec<Vec<f64>>,
    time: f64,
}

impl SystemState {
    pub fn new(values: Vec<Vec<f64>>, time: f64) -> Result<Self> {
        let Some(first) = values.first() else {
            return Err(Error::Shape("a state needs at least one species".into()));
        };
        let cells = first.len();
        if values.iter().any(|v| v.len() != cells) {
            return Err(Error::Shape("species differ in cell count".into()));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::Shape(format!("invalid state time {time}")));
        }
        for (k, v) in values.iter().enumerate() {
            if let Some(j) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::InputData {
                    species: k,
                    cell: j,
                    reason: format!("non-finite value {}", v[j]),
                });
            }
        }
        Ok(Self { values, time })
    }

    /// Constant state `c[k]` on `cells` cells.
    pub fn constant(c: &[f64], cells: usize) -> Result<Self> {
        Self::new(c.iter().map(|&v| vec![v; cells]).collect(), 0.0)
    }

    pub fn species_count(&self) -> usize {
        self.values.len()
    }

    pub fn cells(&self) -> usize {
        self.values[0].len()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn species(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec<f64>> {
        self.values
    }

    pub fn ghost_value(&self, k: usize, j: isize, bc: BoundaryCondition) -> f64 {
        bc.ghost(&self.values[k], j)
    }

    /// `Δx Σ_j ρ_j^k` for each species.
    pub fn total_mass(&self, grid: &Grid) -> Vec<f64> {
        self.values.iter().map(|v| grid.dx() * v.iter().sum::<f64>()).collect()
    }

    /// `Σ_j |ρ_{j+1}^k − ρ_j^k|` per species; the periodic seam is included
    /// only for periodic boundaries.
    pub fn total_variation(&self, bc: BoundaryCondition) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| {
                let inner: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
                if bc.is_periodic() {
                    inner + (v[0] - v[v.len() - 1]).abs()
                } else {
                    inner
                }
            })
            .collect()
    }

    pub fn min(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.iter().copied().fold(f64::INFINITY, f64::min))
            .collect()
    }

    pub fn max(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    /// `max_{j,k} |ρ_j^k|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// First non-finite entry as `(species, cell)`.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.values
            .iter()
            .enumerate()
            .find_map(|(k, v)| v.iter().position(|x| !x.is_finite()).map(|j| (k, j)))
    }
}

/// Initial datum `x ↦ ρ_0^k(x)` for every species.
pub trait InitialData: Send + Sync {
    fn species(&self) -> usize;

    fn value(&self, species: usize, x: f64) -> f64;

    /// Mean of species `k` over `[a, b]` by composite Simpson's rule on
    /// [`SIMPSON_PANELS`] panels. Data that know their exact averages (e.g.
    /// piecewise constant data) override this.
    fn cell_average(&self, species: usize, a: f64, b: f64) -> f64 {
        simpson_average(|x| self.value(species, x), a, b)
    }
}

/// Simpson panels per cell in [`InitialData::cell_average`].
pub const SIMPSON_PANELS: usize = 8;

/// Composite Simpson mean of `f` over `[a, b]`; exact for constants and cubics.
pub fn simpson_average(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let h = (b - a) / SIMPSON_PANELS as f64;
    let panel = |i: usize| {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == SIMPSON_PANELS { b } else { lo + h };
        let fm = f(0.5 * (lo + hi));
        fm + (0.5 * (f(lo) + f(hi)) - fm) / 3.0
    };
    let first = panel(0);
    let deviation: f64 = (1..SIMPSON_PANELS).map(|i| panel(i) - first).sum();
    first + deviation / SIMPSON_PANELS as f64
}

/// Adapts a closure `(species, x) -> value` to [`InitialData`].
pub struct FnData<F> {
    species: usize,
    f: F,
}

impl<F> FnData<F>
where
    F: Fn(usize, f64) -> f64 + Send + Sync,
{
    pub fn new(species: usize, f: F) -> Self {
        Self { species, f }
    }
}

impl<F> InitialData for FnData<F>
where
    F: Fn(usize, f64) -> f64 + Send + Sync,
{
    fn species(&self) -> usize {
        self.species
    }

    fn value(&self, species: usize, x: f64) -> f64 {
        (self.f)(species, x)
    }
}

/// Cell averages `ρ_j^{k,0}` of the initial datum.
pub fn init_cell_averages(data: &dyn InitialData, grid: &Grid) -> Result<SystemState> {
    let n = data.species();
    if n == 0 {
        return Err(Error::Shape("initial data without species".into()));
    }
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = Vec::with_capacity(grid.cells());
        for j in 0..grid.cells() {
            let a = grid.interface(j as isize);
            let b = grid.interface(j as isize + 1);
            let avg = data.cell_average(k, a, b);
            if !avg.is_finite() {
                return Err(Error::InputData {
                    species: k,
                    cell: j,
                    reason: format!("initial datum is not finite on [{a}, {b}]"),
                });
            }
            v.push(avg);
        }
        values.push(v);
    }
    SystemState::new(values, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_and_linear_averages_are_exact() {
        let g = Grid::new(0.0, 0.4, 4).unwrap();
        let c = init_cell_averages(&FnData::new(1, |_, _| 0.7), &g).unwrap();
        assert!(c.species(0).iter().all(|&v| v == 0.7));
        let lin = init_cell_averages(&FnData::new(1, |_, x| x), &g).unwrap();
        assert!((lin.species(0)[0] - 0.05).abs() < 1e-16);
    }

    #[test]
    fn sine_matches_closed_form() {
        let g = Grid::new(-1.0, 1.0, 40).unwrap();
        let s = init_cell_averages(&FnData::new(1, |_, x| 0.5 + 0.4 * (PI * x).sin()), &g).unwrap();
        let anti = |x: f64| 0.5 * x - 0.4 / PI * (PI * x).cos();
        for j in 0..40 {
            let a = g.interface(j);
            let b = g.interface(j + 1);
            let exact = (anti(b) - anti(a)) / g.dx();
            assert!((s.species(0)[j as usize] - exact).abs() <= 1e-10, "cell {j}");
        }
    }

    #[test]
    fn cubic_is_exact() {
        let g = Grid::new(-1.3, 2.1, 17).unwrap();
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + 0.25 * x * x * x;
        let anti = |x: f64| x - x * x + x.powi(3) / 6.0 + x.powi(4) / 16.0;
        let s = init_cell_averages(&FnData::new(1, move |_, x| p(x)), &g).unwrap();
        for j in 0..17 {
            let exact = (anti(g.interface(j + 1)) - anti(g.interface(j))) / g.dx();
            let got = s.species(0)[j as usize];
            assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn non_finite_data_is_reported() {
        let g = Grid::new(0.0, 1.0, 8).unwrap();
        let err = init_cell_averages(
            &FnData::new(2, |k, x| if k == 1 && x >= 0.5 { f64::NAN } else { 1.0 }),
            &g,
        )
        .unwrap_err();
        match err {
            Error::InputData { species, cell, .. } => {
                assert_eq!(species, 1);
                assert_eq!(cell, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mass_and_variation() {
        let g = Grid::new(0.0, 4.0, 40).unwrap();
        let one = SystemState::constant(&[1.0], 40).unwrap();
        assert!((one.total_mass(&g)[0] - 4.0).abs() < 1e-14);
        assert_eq!(one.total_variation(BoundaryCondition::Periodic), vec![0.0]);
        let zero = SystemState::constant(&[0.0], 40).unwrap();
        assert_eq!(zero.total_mass(&g), vec![0.0]);

        let boxed: Vec<f64> = g
            .centers()
            .iter()
            .map(|&x| if x > 1.0 && x < 3.0 { 0.25 } else { 0.0 })
            .collect();
        let b = SystemState::new(vec![boxed], 0.0).unwrap();
        assert!((b.total_mass(&g)[0] - 0.5).abs() < 1e-14);
        assert!((b.total_variation(BoundaryCondition::Periodic)[0] - 0.5).abs() < 1e-15);

        let ramp: Vec<f64> = (0..10).map(|j| 0.2 + 0.1 * j as f64).collect();
        let r = SystemState::new(vec![ramp], 0.0).unwrap();
        assert!((r.total_variation(BoundaryCondition::ZeroExtension)[0] - 0.9).abs() < 1e-14);
    }
}
