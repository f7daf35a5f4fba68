//! Uniform one-dimensional grids, boundary treatment and index windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible cell count: the staggered slopes of the central
/// scheme touch a five-point neighbourhood.
pub const MIN_CELLS: usize = 4;

/// Uniform partition of `[x_left, x_right]` into `cells` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_left: f64,
    x_right: f64,
    cells: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, cells: usize) -> Result<Self> {
        if !(x_left.is_finite() && x_right.is_finite()) || x_right <= x_left {
            return Err(Error::Grid(format!(
                "domain [{x_left}, {x_right}] must be a finite, non-empty interval"
            )));
        }
        if cells < MIN_CELLS {
            return Err(Error::Grid(format!(
                "at least {MIN_CELLS} cells are required, got {cells}"
            )));
        }
        Ok(Self {
            x_left,
            x_right,
            cells,
            dx: (x_right - x_left) / cells as f64,
        })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// Centre of cell `j`; valid for ghost indices as well.
    pub fn center(&self, j: isize) -> f64 {
        self.x_left + (j as f64 + 0.5) * self.dx
    }

    /// Left interface of cell `j`.
    pub fn interface(&self, j: isize) -> f64 {
        self.x_left + j as f64 * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells as isize).map(|j| self.center(j)).collect()
    }

    /// The grid obtained by splitting every cell into `2^levels` cells.
    pub fn refined(&self, levels: u32) -> Result<Self> {
        Grid::new(self.x_left, self.x_right, self.cells << levels)
    }
}

/// Treatment of cells outside `0..J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    Periodic,
    /// Ghost cells copy the nearest edge cell.
    ConstantExtension,
    /// Ghost cells hold zero.
    ZeroExtension,
}

impl BoundaryCondition {
    /// Maps an arbitrary cell index to the interior cell it reads from, or
    /// `None` when the ghost value is identically zero.
    pub fn resolve(self, j: isize, cells: usize) -> Option<usize> {
        let n = cells as isize;
        match self {
            BoundaryCondition::Periodic => Some(j.rem_euclid(n) as usize),
            BoundaryCondition::ConstantExtension => Some(j.clamp(0, n - 1) as usize),
            BoundaryCondition::ZeroExtension => (0..n).contains(&j).then_some(j as usize),
        }
    }

    /// Value of `values` at index `j` after ghost extension.
    pub fn ghost(self, values: &[f64], j: isize) -> f64 {
        self.resolve(j, values.len()).map_or(0.0, |i| values[i])
    }

    pub fn is_periodic(self) -> bool {
        self == BoundaryCondition::Periodic
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "constant-extension" | "constant" => Ok(Self::ConstantExtension),
            "zero-extension" | "zero" => Ok(Self::ZeroExtension),
            other => Err(Error::Config(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// Half-open range of cell indices `[lo, hi)` on which a per-cell quantity
/// is known.
///
/// With periodic boundaries every window is the interior `[0, J)` and reads
/// wrap around; otherwise windows reach into the ghost region and reads must
/// stay inside them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: isize,
    pub hi: isize,
    pub period: Option<usize>,
}

impl Window {
    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn indices(&self) -> std::ops::Range<isize> {
        self.lo..self.hi
    }
}

/// Cell count plus boundary condition; hands out computation windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub cells: usize,
    pub bc: BoundaryCondition,
}

impl Layout {
    pub fn new(cells: usize, bc: BoundaryCondition) -> Self {
        Self { cells, bc }
    }

    pub fn interior(&self) -> Window {
        self.window(0, 0)
    }

    /// Interior padded by `pad_lo` ghost cells on the left and `pad_hi` on
    /// the right (padding is ignored for periodic layouts).
    pub fn window(&self, pad_lo: usize, pad_hi: usize) -> Window {
        if self.bc.is_periodic() {
            Window {
                lo: 0,
                hi: self.cells as isize,
                period: Some(self.cells),
            }
        } else {
            Window {
                lo: -(pad_lo as isize),
                hi: (self.cells + pad_hi) as isize,
                period: None,
            }
        }
    }
}

/// Per-cell values over a [`Window`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellArray {
    window: Window,
    data: Vec<f64>,
}

impl CellArray {
    pub fn from_fn(window: Window, f: impl FnMut(isize) -> f64) -> Self {
        Self {
            window,
            data: window.indices().map(f).collect(),
        }
    }

    pub fn from_vec(window: Window, data: Vec<f64>) -> Self {
        assert_eq!(window.len(), data.len(), "window and data length differ");
        Self { window, data }
    }

    pub fn zeros(window: Window) -> Self {
        Self::from_vec(window, vec![0.0; window.len()])
    }

    /// Ghost-extends interior values onto `window` with the boundary condition.
    pub fn extend(values: &[f64], bc: BoundaryCondition, window: Window) -> Self {
        Self::from_fn(window, |j| bc.ghost(values, j))
    }

    pub fn window(&self) -> Window {
        self.window
    }

    #[inline]
    pub fn get(&self, j: isize) -> f64 {
        match self.window.period {
            Some(p) => self.data[j.rem_euclid(p as isize) as usize],
            None => {
                debug_assert!(
                    j >= self.window.lo && j < self.window.hi,
                    "index {j} outside window {:?}",
                    self.window
                );
                self.data[(j - self.window.lo) as usize]
            }
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Values on cells `0..cells`.
    pub fn interior(&self, cells: usize) -> Vec<f64> {
        (0..cells as isize).map(|j| self.get(j)).collect()
    }

    /// Contiguous copy of cells `lo..hi`, wrapping for periodic windows.
    pub fn gather(&self, lo: isize, hi: isize) -> Vec<f64> {
        (lo..hi).map(|j| self.get(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(0.0, 1.0, 3).is_err());
        assert!(Grid::new(1.0, 1.0, 10).is_err());
        assert!(Grid::new(0.0, f64::NAN, 10).is_err());
        let g = Grid::new(-1.0, 1.0, 40).unwrap();
        assert!((g.dx() - 0.05).abs() < 1e-15);
        assert!((g.center(0) + 0.975).abs() < 1e-15);
    }

    #[test]
    fn centers_are_equispaced() {
        let g = Grid::new(-1.0, 1.0, 640).unwrap();
        let c = g.centers();
        for w in c.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] - w[0] - g.dx()).abs() < 1e-13);
        }
    }

    #[test]
    fn ghost_lookup() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(BoundaryCondition::Periodic.ghost(&v, -1), 4.0);
        assert_eq!(BoundaryCondition::ZeroExtension.ghost(&v, 4), 0.0);
        assert_eq!(BoundaryCondition::ConstantExtension.ghost(&v, 9), 4.0);
        assert_eq!(BoundaryCondition::ConstantExtension.ghost(&v, -3), 1.0);
        for j in -20..20 {
            assert_eq!(
                BoundaryCondition::Periodic.ghost(&v, j),
                BoundaryCondition::Periodic.ghost(&v, j + 4)
            );
        }
    }

    #[test]
    fn periodic_windows_wrap() {
        let layout = Layout::new(4, BoundaryCondition::Periodic);
        let a = CellArray::extend(&[1.0, 2.0, 3.0, 4.0], layout.bc, layout.window(3, 3));
        assert_eq!(a.window().len(), 4);
        assert_eq!(a.get(-1), 4.0);
        assert_eq!(a.gather(-2, 2), vec![3.0, 4.0, 1.0, 2.0]);

        let open = Layout::new(4, BoundaryCondition::ZeroExtension);
        let b = CellArray::extend(&[1.0, 2.0, 3.0, 4.0], open.bc, open.window(2, 1));
        assert_eq!(b.window().lo, -2);
        assert_eq!(b.get(-2), 0.0);
        assert_eq!(b.get(4), 0.0);
    }
}
