use super::{gather, StepOutput, Stepper};
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, CellArray, Grid, Layout, Window};
use crate::kernels::{NonlocalField, SourceFields};
use crate::limiters::{flux_slopes_v2_on, slopes_on, SlopeField};
use crate::models::Model;
use crate::schemes::SchemeId;
use crate::state::SystemState;

/// Midpoint values `ρ^{n+1/2}` and `𝐑^{n+1/2}` on the interior cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfStepState {
    pub rho_half: Vec<Vec<f64>>,
    pub r_half: NonlocalField,
}

/// Every intermediate field of one central-scheme step, each on the window
/// it was computed on.
#[derive(Debug, Clone)]
pub struct NtTrace {
    pub dt: f64,
    pub lambda: f64,
    pub state: Vec<CellArray>,
    pub cell_slopes: Vec<CellArray>,
    pub r: Vec<CellArray>,
    /// `S_k − σ^k` at time level `n`.
    pub integrand: Vec<CellArray>,
    pub r_t: Vec<CellArray>,
    pub rho_half: Vec<CellArray>,
    pub r_half: Vec<CellArray>,
    pub flux_half: Vec<CellArray>,
    pub source_half: Option<Vec<CellArray>>,
    /// Entry `i` is the average over `[x_i, x_{i+1}]`.
    pub staggered: Vec<CellArray>,
    pub staggered_slopes: Vec<CellArray>,
}

fn eval_fields(
    model: &dyn Model,
    rho: &[CellArray],
    r: &[CellArray],
    w: Window,
) -> (Vec<CellArray>, Option<Vec<CellArray>>) {
    let mut rv = vec![0.0; r.len()];
    let flux = rho
        .iter()
        .enumerate()
        .map(|(k, field)| {
            CellArray::from_fn(w, |j| {
                gather(r, j, &mut rv);
                model.flux(k, field.get(j), &rv)
            })
        })
        .collect();
    let source = model.has_source().then(|| {
        let mut point = vec![0.0; rho.len()];
        (0..rho.len())
            .map(|k| {
                CellArray::from_fn(w, |j| {
                    gather(rho, j, &mut point);
                    gather(r, j, &mut rv);
                    model.source(k, &point, &rv)
                })
            })
            .collect()
    });
    (flux, source)
}

fn advance(base: &[CellArray], rate: &[CellArray], factor: f64, w: Window) -> Vec<CellArray> {
    base.iter()
        .zip(rate)
        .map(|(b, r)| CellArray::from_fn(w, |j| b.get(j) + factor * r.get(j)))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn predictor_on(
    rho: &CellArray,
    s: &CellArray,
    flux: &CellArray,
    source: Option<&CellArray>,
    lambda: f64,
    dt: f64,
    dx: f64,
    out: Window,
) -> CellArray {
    CellArray::from_fn(out, |i| {
        let mut v = 0.5 * (rho.get(i) + rho.get(i + 1)) + 0.125 * dx * (s.get(i) - s.get(i + 1))
            - lambda * (flux.get(i + 1) - flux.get(i));
        if let Some(src) = source {
            v += 0.5 * dt * (src.get(i + 1) + src.get(i));
        }
        v
    })
}

#[allow(clippy::too_many_arguments)]
fn projection_on(
    rho: &CellArray,
    s: &CellArray,
    staggered_s: &CellArray,
    flux: &CellArray,
    source: Option<&CellArray>,
    lambda: f64,
    dt: f64,
    dx: f64,
    out: Window,
) -> CellArray {
    CellArray::from_fn(out, |j| {
        let mut v = 0.25 * (rho.get(j - 1) + 2.0 * rho.get(j) + rho.get(j + 1))
            - dx / 16.0 * (s.get(j + 1) - s.get(j - 1))
            - 0.125 * dx * (staggered_s.get(j) - staggered_s.get(j - 1))
            - 0.5 * lambda * (flux.get(j + 1) - flux.get(j - 1));
        if let Some(src) = source {
            v += 0.25 * dt * (src.get(j + 1) + 2.0 * src.get(j) + src.get(j - 1));
        }
        v
    })
}

fn staggered_windows(layout: Layout) -> (Window, Window) {
    if layout.bc.is_periodic() {
        (layout.interior(), layout.interior())
    } else {
        let j = layout.cells as isize;
        (
            Window {
                lo: -2,
                hi: j + 1,
                period: None,
            },
            Window {
                lo: -1,
                hi: j,
                period: None,
            },
        )
    }
}

pub(super) fn step(st: &Stepper, values: &[Vec<f64>], dt: f64, traced: bool) -> Result<(StepOutput, Option<NtTrace>)> {
    let model = st.model.as_ref();
    let dx = st.grid.dx();
    let lambda = dt / dx;
    let layout = st.layout;
    let cap = st.config.clip.cap(dx);
    let (n1, n2) = st.op.reach();

    let w_state = layout.window(4 + 2 * n1, 4 + 2 * n2);
    let w_slope = layout.window(3 + 2 * n1, 3 + 2 * n2);
    let w_r = layout.window(3 + n1, 3 + n2);
    let w_sig = layout.window(2 + n1, 2 + n2);
    let w_half = layout.window(2, 2);
    let (w_stag, w_stag_s) = staggered_windows(layout);
    let out = layout.interior();

    let rho = st.extend_all(values, w_state);
    let s = st.slopes(&rho, w_slope, cap);
    let (u, su) = st.derived(&rho, w_state, Some(w_slope), cap);
    let r = st.op.field(
        &SourceFields {
            species: &rho,
            derived: u.as_ref(),
        },
        &SourceFields {
            species: &s,
            derived: su.as_ref(),
        },
        w_r,
    );
    let wave_speed = st.wave_speed(&rho, &r);

    let sigma: Vec<CellArray> = match st.config.scheme {
        SchemeId::NtV2 => {
            let p = model.product_form().expect("checked at construction");
            let dxr = st.op.space_derivative(
                &SourceFields {
                    species: &rho,
                    derived: u.as_ref(),
                },
                &SourceFields {
                    species: &s,
                    derived: su.as_ref(),
                },
                w_sig,
            )?;
            (0..rho.len())
                .map(|k| flux_slopes_v2_on(p, k, &rho[k], &r, &dxr, w_sig, dx))
                .collect()
        }
        _ => {
            let (flux, _) = eval_fields(model, &rho, &r, w_r);
            flux.iter().map(|f| slopes_on(f, w_sig, dx, cap)).collect()
        }
    };
    let (_, source) = if model.has_source() {
        eval_fields(model, &rho, &r, w_sig)
    } else {
        (Vec::new(), None)
    };
    let integrand: Vec<CellArray> = match &source {
        Some(src) => sigma
            .iter()
            .zip(src)
            .map(|(sg, sr)| CellArray::from_fn(w_sig, |j| sr.get(j) - sg.get(j)))
            .collect(),
        None => sigma
            .iter()
            .map(|sg| CellArray::from_fn(w_sig, |j| -sg.get(j)))
            .collect(),
    };
    let derived_integrand = model.derived_field().map(|d| {
        let mut point = vec![0.0; rho.len()];
        let mut rate = vec![0.0; rho.len()];
        CellArray::from_fn(w_sig, |j| {
            gather(&rho, j, &mut point);
            gather(&integrand, j, &mut rate);
            d.time_integrand(&point, &rate)
        })
    });
    let r_t = st.op.time_derivative(
        &SourceFields {
            species: &integrand,
            derived: derived_integrand.as_ref(),
        },
        w_half,
    );

    let rho_half = advance(&rho, &integrand, 0.5 * dt, w_half);
    let r_half = advance(&r, &r_t, 0.5 * dt, w_half);
    let (flux_half, source_half) = eval_fields(model, &rho_half, &r_half, w_half);

    let staggered: Vec<CellArray> = (0..rho.len())
        .map(|k| {
            predictor_on(
                &rho[k],
                &s[k],
                &flux_half[k],
                source_half.as_ref().map(|v| &v[k]),
                lambda,
                dt,
                dx,
                w_stag,
            )
        })
        .collect();
    let staggered_slopes: Vec<CellArray> = staggered.iter().map(|v| slopes_on(v, w_stag_s, dx, cap)).collect();
    let next: Vec<Vec<f64>> = (0..rho.len())
        .map(|k| {
            projection_on(
                &rho[k],
                &s[k],
                &staggered_slopes[k],
                &flux_half[k],
                source_half.as_ref().map(|v| &v[k]),
                lambda,
                dt,
                dx,
                out,
            )
            .interior(layout.cells)
        })
        .collect();

    let trace = traced.then_some(NtTrace {
        dt,
        lambda,
        state: rho,
        cell_slopes: s,
        r,
        integrand,
        r_t,
        rho_half,
        r_half,
        flux_half,
        source_half,
        staggered,
        staggered_slopes,
    });
    Ok((
        StepOutput {
            values: next,
            wave_speed,
        },
        trace,
    ))
}

fn check_len(what: &str, fields: &[Vec<f64>], count: usize, cells: usize) -> Result<()> {
    if fields.len() != count || fields.iter().any(|f| f.len() != cells) {
        return Err(Error::Shape(format!(
            "{what}: expected {count} vectors of length {cells}"
        )));
    }
    Ok(())
}

fn extend(values: &[Vec<f64>], layout: Layout, pad: usize) -> Vec<CellArray> {
    let w = layout.window(pad, pad);
    values.iter().map(|v| CellArray::extend(v, layout.bc, w)).collect()
}

/// `ρ^{n+1/2} = ρ^n + (Δt/2)(S − σ)`, `𝐑^{n+1/2} = 𝐑^n + (Δt/2)𝐑_t`.
pub fn half_step(
    state: &SystemState,
    model: &dyn Model,
    r: &NonlocalField,
    sigma: &SlopeField,
    r_t: &NonlocalField,
    dt: f64,
) -> Result<HalfStepState> {
    let (n, cells, m) = (state.species_count(), state.cells(), model.nonlocal_terms().len());
    check_len("sigma", &sigma.values, n, cells)?;
    check_len("R", &r.entries, m, cells)?;
    check_len("R_t", &r_t.entries, m, cells)?;
    let mut point = vec![0.0; n];
    let mut rv = vec![0.0; m];
    let mut rho_half = vec![vec![0.0; cells]; n];
    for j in 0..cells {
        for (k, p) in point.iter_mut().enumerate() {
            *p = state.species(k)[j];
        }
        for (v, entry) in rv.iter_mut().zip(&r.entries) {
            *v = entry[j];
        }
        for k in 0..n {
            let src = model.source(k, &point, &rv);
            if !src.is_finite() {
                return Err(Error::Model(format!(
                    "{}: source of species {k} is not finite at cell {j}",
                    model.name()
                )));
            }
            rho_half[k][j] = point[k] + 0.5 * dt * (src - sigma.values[k][j]);
        }
    }
    let entries = r
        .entries
        .iter()
        .zip(&r_t.entries)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + 0.5 * dt * y).collect())
        .collect();
    Ok(HalfStepState {
        rho_half,
        r_half: NonlocalField {
            entries,
            time: r.time + 0.5 * dt,
        },
    })
}

/// Staggered averages `ρ_{j+1/2}^{n+1}` for `j = 0 … J−1`; neighbours
/// outside the grid come from `bc`.
pub fn staggered_predictor(
    state: &SystemState,
    cell_s: &SlopeField,
    half: &HalfStepState,
    model: &dyn Model,
    grid: &Grid,
    bc: BoundaryCondition,
    dt: f64,
) -> Result<Vec<Vec<f64>>> {
    let (n, cells) = (state.species_count(), state.cells());
    check_len("cell slopes", &cell_s.values, n, cells)?;
    check_len("half step", &half.rho_half, n, cells)?;
    let layout = Layout::new(cells, bc);
    let rho = extend(state.values(), layout, 1);
    let s = extend(&cell_s.values, layout, 1);
    let rh = extend(&half.rho_half, layout, 1);
    let r = extend(&half.r_half.entries, layout, 1);
    let (flux, source) = eval_fields(model, &rh, &r, layout.window(1, 1));
    let out = layout.interior();
    Ok((0..n)
        .map(|k| {
            predictor_on(
                &rho[k],
                &s[k],
                &flux[k],
                source.as_ref().map(|v| &v[k]),
                dt / grid.dx(),
                dt,
                grid.dx(),
                out,
            )
            .interior(cells)
        })
        .collect())
}

/// Cell averages at `n + 1` from the staggered slopes; staggered entry `i`
/// belongs to `x_{i+1/2}`.
#[allow(clippy::too_many_arguments)]
pub fn nonstaggered_projection(
    state: &SystemState,
    cell_s: &SlopeField,
    staggered_s: &SlopeField,
    half: &HalfStepState,
    model: &dyn Model,
    grid: &Grid,
    bc: BoundaryCondition,
    dt: f64,
) -> Result<SystemState> {
    let (n, cells) = (state.species_count(), state.cells());
    check_len("cell slopes", &cell_s.values, n, cells)?;
    check_len("staggered slopes", &staggered_s.values, n, cells)?;
    check_len("half step", &half.rho_half, n, cells)?;
    let layout = Layout::new(cells, bc);
    let rho = extend(state.values(), layout, 1);
    let s = extend(&cell_s.values, layout, 1);
    let ss = extend(&staggered_s.values, layout, 1);
    let rh = extend(&half.rho_half, layout, 1);
    let r = extend(&half.r_half.entries, layout, 1);
    let (flux, source) = eval_fields(model, &rh, &r, layout.window(1, 1));
    let out = layout.interior();
    let values = (0..n)
        .map(|k| {
            projection_on(
                &rho[k],
                &s[k],
                &ss[k],
                &flux[k],
                source.as_ref().map(|v| &v[k]),
                dt / grid.dx(),
                dt,
                grid.dx(),
                out,
            )
            .interior(cells)
        })
        .collect();
    SystemState::new(values, state.time() + dt)
}
