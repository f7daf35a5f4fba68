//! Named and user-supplied initial data given as expressions in `x`.
//!
//! Expressions use the usual arithmetic, `pi`, `e`, elementary functions and
//! two helpers: `ind(x, a, b)` (1 on `(a, b)`, 0 elsewhere) and `step(x)`
//! (1 for `x > 0`, 0 otherwise). Cell averages split every cell at the
//! declared breakpoints and apply five-point Gauss–Legendre quadrature on
//! each piece, so piecewise polynomials up to degree nine are averaged
//! exactly.

use std::str::FromStr;

use meval::{Context, Expr};

use crate::error::{Error, Result};
use crate::state::InitialData;

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

fn context() -> Context<'static> {
    let mut ctx = Context::new();
    ctx.func3("ind", |x, a, b| if x > a && x < b { 1.0 } else { 0.0 })
        .func("step", |x| if x > 0.0 { 1.0 } else { 0.0 });
    ctx
}

/// Mean of `f` over `[a, b]` by five-point Gauss–Legendre; constants are
/// reproduced bitwise.
pub fn gauss_average(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let values = GAUSS_NODES.map(|t| f(mid + half * t));
    let base = values[2];
    base + 0.5
        * values
            .iter()
            .zip(GAUSS_WEIGHTS)
            .map(|(v, w)| w * (v - base))
            .sum::<f64>()
}

/// Initial data defined by one expression per species.
#[derive(Debug, Clone)]
pub struct ExprData {
    sources: Vec<String>,
    exprs: Vec<Expr>,
    breakpoints: Vec<f64>,
}

impl ExprData {
    pub fn new<S: AsRef<str>>(exprs: &[S], breakpoints: &[f64]) -> Result<Self> {
        if exprs.is_empty() {
            return Err(Error::Config("initial data needs at least one expression".into()));
        }
        let mut parsed = Vec::with_capacity(exprs.len());
        for (k, s) in exprs.iter().enumerate() {
            let s = s.as_ref();
            let e =
                Expr::from_str(s).map_err(|err| Error::Config(format!("species {k}: cannot parse '{s}': {err}")))?;
            let _ = e
                .clone()
                .bind_with_context(context(), "x")
                .map_err(|err| Error::Config(format!("species {k}: invalid expression '{s}': {err}")))?;
            parsed.push(e);
        }
        if let Some(b) = breakpoints.iter().find(|b| !b.is_finite()) {
            return Err(Error::Config(format!("breakpoint {b} is not finite")));
        }
        let mut breakpoints = breakpoints.to_vec();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(Self {
            sources: exprs.iter().map(|s| s.as_ref().to_string()).collect(),
            exprs: parsed,
            breakpoints,
        })
    }

    pub fn expressions(&self) -> &[String] {
        &self.sources
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

impl InitialData for ExprData {
    fn species(&self) -> usize {
        self.exprs.len()
    }

    fn value(&self, species: usize, x: f64) -> f64 {
        self.exprs[species]
            .eval_with_context((context(), ("x", x)))
            .unwrap_or(f64::NAN)
    }

    fn cell_average(&self, species: usize, a: f64, b: f64) -> f64 {
        let f = match self.exprs[species].clone().bind_with_context(context(), "x") {
            Ok(f) => f,
            Err(_) => return f64::NAN,
        };
        let mut edges = vec![a];
        edges.extend(self.breakpoints.iter().copied().filter(|&p| p > a && p < b));
        edges.push(b);
        if edges.len() == 2 {
            return gauss_average(&f, a, b);
        }
        let total: f64 = edges
            .windows(2)
            .map(|w| (w[1] - w[0]) * gauss_average(&f, w[0], w[1]))
            .sum();
        total / (b - a)
    }
}

/// A named initial datum from the benchmark collection.
#[derive(Debug, Clone, Copy)]
pub struct NamedData {
    pub name: &'static str,
    pub description: &'static str,
    pub exprs: &'static [&'static str],
    pub breakpoints: &'static [f64],
}

impl NamedData {
    pub fn build(&self) -> Result<ExprData> {
        ExprData::new(self.exprs, self.breakpoints)
    }
}

const MULTILANE_Q1: &str = "4*(2*x-0.5)^2*(1-(2*x-0.5)^2)*ind(2*x-0.5,0,1)";
const MULTILANE_Q2: &str = "4*(2*x)^2*(1-(2*x)^2)*ind(2*x,0,1)";

pub const CATALOG: &[NamedData] = &[
    NamedData {
        name: "kk-smooth",
        description: "two-species sine data on [-1, 1]",
        exprs: &["-0.1-0.2*sin(pi*x)", "0.2+0.1*sin(pi*x)"],
        breakpoints: &[],
    },
    NamedData {
        name: "kk-jump",
        description: "plateaus 0.25 and 1 on (1, 3)",
        exprs: &["0.25*ind(x,1,3)", "ind(x,1,3)"],
        breakpoints: &[1.0, 3.0],
    },
    NamedData {
        name: "arrhenius-smooth",
        description: "0.5 + 0.4 sin(pi x)",
        exprs: &["0.5+0.4*sin(pi*x)"],
        breakpoints: &[],
    },
    NamedData {
        name: "arrhenius-jump",
        description: "0.2 with a plateau of 1 on [-1/4, 1/4]",
        exprs: &["0.2+0.8*ind(x,-0.25,0.25)"],
        breakpoints: &[-0.25, 0.25],
    },
    NamedData {
        name: "multilane-smooth",
        description: "sine and cosine lanes on [-1, 1]",
        exprs: &["0.5+0.5*sin(pi*x)", "0.25+0.25*cos(2*pi*x)"],
        breakpoints: &[],
    },
    NamedData {
        name: "multilane-bump",
        description: "compactly supported polynomial bumps q(2x - 1/2), q(2x)",
        exprs: &[MULTILANE_Q1, MULTILANE_Q2],
        breakpoints: &[0.0, 0.25, 0.5, 0.75],
    },
    NamedData {
        name: "euler-smooth",
        description: "subcritical density and velocity",
        exprs: &["0.2+0.1*sin(pi*x)", "0.4+0.3*cos(pi*x)/pi"],
        breakpoints: &[],
    },
    NamedData {
        name: "euler-riemann",
        description: "density 0.5 | 1.5, velocity -1 | 1",
        exprs: &["0.5+step(x)", "-1+2*step(x)"],
        breakpoints: &[0.0],
    },
    NamedData {
        name: "garz-smooth",
        description: "density 0.3 + 0.2 sin(pi x), marker 1.9 + 1.25 sin(pi x)",
        exprs: &["0.3+0.2*sin(pi*x)", "(0.3+0.2*sin(pi*x))*(1.9+1.25*sin(pi*x))"],
        breakpoints: &[],
    },
    NamedData {
        name: "garz-jump",
        description: "density 0.05, marker jump 0.35 | 0.8",
        exprs: &["0.05", "7/400+(1/25-7/400)*step(x)"],
        breakpoints: &[0.0],
    },
];

pub fn named(name: &str) -> Result<&'static NamedData> {
    CATALOG.iter().find(|d| d.name == name).ok_or_else(|| {
        Error::Config(format!(
            "unknown initial data '{name}' (known: {})",
            CATALOG.iter().map(|d| d.name).collect::<Vec<_>>().join(", ")
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::state::init_cell_averages;
    use approx::assert_abs_diff_eq;

    #[test]
    fn catalog_parses() {
        for d in CATALOG {
            let data = d.build().unwrap();
            for k in 0..data.species() {
                assert!(data.value(k, 0.3).is_finite(), "{}", d.name);
            }
        }
        assert!(named("nope").is_err());
        assert!(ExprData::new(&["sin(y)"], &[]).is_err());
        assert!(ExprData::new(&["1+"], &[]).is_err());
    }

    #[test]
    fn jump_averages_are_exact() {
        let data = named("arrhenius-jump").unwrap().build().unwrap();
        let grid = Grid::new(-1.0, 1.0, 6).unwrap();
        let s = init_cell_averages(&data, &grid).unwrap();
        // Cells of width 1/3; [-1/3, 0] holds 1/4 of the plateau share 1/12.
        let expect = [0.2, 0.2, 0.2 + 0.8 * 0.75, 0.2 + 0.8 * 0.75, 0.2, 0.2];
        for (a, b) in s.species(0).iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let garz = named("garz-jump").unwrap().build().unwrap();
        assert_abs_diff_eq!(garz.value(1, -0.1) / garz.value(0, -0.1), 0.35, epsilon = 1e-14);
        assert_abs_diff_eq!(garz.value(1, 0.1) / garz.value(0, 0.1), 0.8, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_bump_average_is_exact() {
        let data = named("multilane-bump").unwrap().build().unwrap();
        // ∫_0^1 4y²(1 − y²) dy = 8/15, and x = y/2.
        let avg = data.cell_average(1, -0.2, 0.8);
        assert_abs_diff_eq!(avg, 4.0 / 15.0, epsilon = 1e-14);
        let avg = data.cell_average(0, 0.0, 1.0);
        assert_abs_diff_eq!(avg, 4.0 / 15.0, epsilon = 1e-14);
    }

    #[test]
    fn smooth_average_matches_antiderivative() {
        let data = named("arrhenius-smooth").unwrap().build().unwrap();
        let (a, b) = (0.1, 0.15);
        let pi = std::f64::consts::PI;
        let exact = 0.5 + 0.4 * ((pi * a).cos() - (pi * b).cos()) / (pi * (b - a));
        assert_abs_diff_eq!(data.cell_average(0, a, b), exact, epsilon = 1e-15);
        assert_eq!(gauss_average(|_| 0.3, 0.0, 0.7), 0.3);
    }
}
