use super::experiment::Experiment;
use super::run::Simulation;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::schemes::{NtTrace, SchemeId};
use crate::time::clamp_to_final;

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Largest value over the cells of
///
/// `|ρ_j^{n+1} − ζ| − ¼(|ρ_{j−1} − ζ| + 2|ρ_j − ζ| + |ρ_{j+1} − ζ|)
///  + (λ/2)(Φ_{j+1}(ρ_{j+1}) − Φ_{j−1}(ρ_{j−1}))
///  + sgn(ρ_j^{n+1} − ζ)(K_j + (λ/2)(F^ζ_{j+1} − F^ζ_{j−1}))`
///
/// for one traced central-scheme step of a scalar model, where
/// `Φ_i(u) = F(u∨ζ + Δt/2 I_i, R_i^{n+1/2}) − F(u∧ζ + Δt/2 I_i, R_i^{n+1/2})`,
/// `F^ζ_i = F(ζ + Δt/2 I_i, R_i^{n+1/2})` and `K_j` collects the slope and
/// source corrections of the projection. The cell entropy inequality states
/// that this is `≤ 0` whenever `λ |∂ρF| ≤ 1/2`.
pub fn entropy_residual(model: &dyn Model, trace: &NtTrace, next: &[f64], zeta: f64) -> Result<f64> {
    if model.species() != 1 || trace.state.len() != 1 {
        return Err(Error::Unsupported(format!(
            "the entropy residual is defined for scalar models, '{}' has {} species",
            model.name(),
            model.species()
        )));
    }
    let rho = &trace.state[0];
    let s = &trace.cell_slopes[0];
    let ss = &trace.staggered_slopes[0];
    let integrand = &trace.integrand[0];
    let (dt, lambda) = (trace.dt, trace.lambda);
    let dx = if lambda > 0.0 { dt / lambda } else { 0.0 };
    let mut rv = vec![0.0; trace.r_half.len()];
    let mut flux_at = |i: isize, u: f64| {
        for (slot, f) in rv.iter_mut().zip(&trace.r_half) {
            *slot = f.get(i);
        }
        model.flux(0, u + 0.5 * dt * integrand.get(i), &rv)
    };
    let mut worst = f64::NEG_INFINITY;
    for (j, &new) in next.iter().enumerate() {
        let j = j as isize;
        let (l, c, r) = (rho.get(j - 1), rho.get(j), rho.get(j + 1));
        let spread = |i: isize, u: f64, f: &mut dyn FnMut(isize, f64) -> f64| f(i, u.max(zeta)) - f(i, u.min(zeta));
        let phi_r = spread(j + 1, r, &mut flux_at);
        let phi_l = spread(j - 1, l, &mut flux_at);
        let fz = flux_at(j + 1, zeta) - flux_at(j - 1, zeta);
        let mut k = dx / 16.0 * (s.get(j + 1) - s.get(j - 1)) + dx / 8.0 * (ss.get(j) - ss.get(j - 1));
        if let Some(src) = &trace.source_half {
            let src = &src[0];
            k -= 0.25 * dt * (src.get(j + 1) + 2.0 * src.get(j) + src.get(j - 1));
        }
        let residual = (new - zeta).abs() - 0.25 * ((l - zeta).abs() + 2.0 * (c - zeta).abs() + (r - zeta).abs())
            + 0.5 * lambda * (phi_r - phi_l)
            + sign(new - zeta) * (k + 0.5 * lambda * fz);
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// Per-step maximum of [`entropy_residual`] over `zetas` along a full run.
pub fn entropy_residuals(exp: &Experiment, scheme: SchemeId, level: u32, zetas: &[f64]) -> Result<Vec<f64>> {
    if !scheme.is_nt() {
        return Err(Error::Unsupported(format!(
            "the entropy residual needs the central scheme, not '{scheme}'"
        )));
    }
    let sim = Simulation::new(exp, scheme, level)?;
    let model = sim.stepper.model().clone();
    let mut state = sim.initial_state(exp)?;
    let mut out = Vec::new();
    while state.time() < exp.t_final {
        let dt = clamp_to_final(sim.dt, state.time(), exp.t_final);
        if dt <= 0.0 {
            break;
        }
        let (step, trace) = sim.stepper.step_traced(state.values(), dt)?;
        let mut worst = f64::NEG_INFINITY;
        for &z in zetas {
            worst = worst.max(entropy_residual(model.as_ref(), &trace, &step.values[0], z)?);
        }
        out.push(worst);
        state = crate::state::SystemState::new(step.values, state.time() + dt)?;
    }
    Ok(out)
}
