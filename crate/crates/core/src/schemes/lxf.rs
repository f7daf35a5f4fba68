use super::{gather, StepOutput, Stepper};
use crate::error::Result;
use crate::grid::CellArray;
use crate::kernels::SourceFields;

pub(super) fn step_first_order(st: &Stepper, values: &[Vec<f64>], dt: f64) -> Result<StepOutput> {
    let model = st.model.as_ref();
    let dx = st.grid.dx();
    let lambda = dt / dx;
    let layout = st.layout;
    let (n1, n2) = st.op.reach();
    let w_state = layout.window(1 + n1, 1 + n2);
    let w_r = layout.window(1, 1);
    let out = layout.interior();

    let rho = st.extend_all(values, w_state);
    let (u, _) = st.derived(&rho, w_state, None, None);
    let r = st.op.field_plain(
        &SourceFields {
            species: &rho,
            derived: u.as_ref(),
        },
        w_r,
    );
    let wave_speed = st.wave_speed(&rho, &r);

    let mut rv = vec![0.0; r.len()];
    let flux: Vec<CellArray> = rho
        .iter()
        .enumerate()
        .map(|(k, field)| {
            CellArray::from_fn(w_r, |j| {
                gather(&r, j, &mut rv);
                model.flux(k, field.get(j), &rv)
            })
        })
        .collect();
    let diffusion = st.theta / (2.0 * lambda);
    let numerical_flux = |k: usize, j: isize| {
        0.5 * (flux[k].get(j) + flux[k].get(j + 1)) - diffusion * (rho[k].get(j + 1) - rho[k].get(j))
    };
    let mut point = vec![0.0; rho.len()];
    let next = (0..rho.len())
        .map(|k| {
            CellArray::from_fn(out, |j| {
                let mut v = rho[k].get(j) - lambda * (numerical_flux(k, j) - numerical_flux(k, j - 1));
                if model.has_source() {
                    gather(&rho, j, &mut point);
                    gather(&r, j, &mut rv);
                    v += dt * model.source(k, &point, &rv);
                }
                v
            })
            .interior(layout.cells)
        })
        .collect();
    Ok(StepOutput {
        values: next,
        wave_speed,
    })
}

/// Semi-discrete right-hand side of the MUSCL scheme and the wave speed of
/// its input.
fn muscl_rhs(st: &Stepper, values: &[Vec<f64>], lambda: f64) -> (Vec<Vec<f64>>, f64) {
    let model = st.model.as_ref();
    let dx = st.grid.dx();
    let layout = st.layout;
    let cap = st.config.clip.cap(dx);
    let (n1, n2) = st.op.reach();
    let w_state = layout.window(2 + n1, 2 + n2);
    let w_slope = layout.window(1 + n1, 1 + n2);
    let w_r = layout.window(1, 1);
    let n = values.len();

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
    let m = r.len();
    let r_face = |j: isize, out: &mut [f64]| {
        for (slot, field) in out.iter_mut().zip(&r) {
            *slot = 0.5 * (field.get(j) + field.get(j + 1));
        }
    };

    let diffusion = st.theta / (2.0 * lambda);
    let mut rv = vec![0.0; m];
    // Interface j + 1/2 is stored at index j, for j = -1 … J−1.
    let faces = crate::grid::Window {
        lo: if layout.bc.is_periodic() { 0 } else { -1 },
        hi: layout.cells as isize,
        period: layout.bc.is_periodic().then_some(layout.cells),
    };
    let numerical_flux: Vec<CellArray> = (0..n)
        .map(|k| {
            CellArray::from_fn(faces, |j| {
                r_face(j, &mut rv);
                let minus = rho[k].get(j) + 0.5 * dx * s[k].get(j);
                let plus = rho[k].get(j + 1) - 0.5 * dx * s[k].get(j + 1);
                0.5 * (model.flux(k, minus, &rv) + model.flux(k, plus, &rv)) - diffusion * (plus - minus)
            })
        })
        .collect();

    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    let mut rl = vec![0.0; m];
    let rhs = (0..n)
        .map(|k| {
            (0..layout.cells as isize)
                .map(|j| {
                    let mut v = -(numerical_flux[k].get(j) - numerical_flux[k].get(j - 1)) / dx;
                    if model.has_source() {
                        for (i, (l, rr)) in left.iter_mut().zip(right.iter_mut()).enumerate() {
                            let c = rho[i].get(j);
                            let h = 0.5 * dx * s[i].get(j);
                            *l = c - h;
                            *rr = c + h;
                        }
                        r_face(j - 1, &mut rl);
                        r_face(j, &mut rv);
                        v += 0.5 * (model.source(k, &left, &rl) + model.source(k, &right, &rv));
                    }
                    v
                })
                .collect()
        })
        .collect();
    (rhs, wave_speed)
}

pub(super) fn step_second_order(st: &Stepper, values: &[Vec<f64>], dt: f64) -> Result<StepOutput> {
    let lambda = dt / st.grid.dx();
    let euler = |base: &[Vec<f64>], rate: &[Vec<f64>]| -> Vec<Vec<f64>> {
        base.iter()
            .zip(rate)
            .map(|(b, r)| b.iter().zip(r).map(|(x, y)| x + dt * y).collect())
            .collect()
    };
    let (l0, wave_speed) = muscl_rhs(st, values, lambda);
    let first = euler(values, &l0);
    let (l1, _) = muscl_rhs(st, &first, lambda);
    let second = euler(&first, &l1);
    let next = values
        .iter()
        .zip(&second)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())
        .collect();
    Ok(StepOutput {
        values: next,
        wave_speed,
    })
}
