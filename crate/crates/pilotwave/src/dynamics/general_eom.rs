//! The general particle equation of motion
//!
//! ```text
//! d/dtau (rho0 u_a) = d_a rho0 + u^b (d_b j_a - d_a j_b)
//! ```
//!
//! integrated in proper time for any timelike initial 4-velocity; the
//! guidance solution u = ubar is one member of the solution family, and
//! [`eom_residual`] checks how well a recorded worldline satisfies the
//! equation. [`velocity_stationarity`] evaluates the action gradient whose
//! zero singles the guidance solution out.

use crate::dynamics::{rk4_step, CurrentHistory, FlowSample, IntegratorMethod, ParticleState, Worldline};
use crate::error::{Error, Result};
use crate::geometry::SpacetimeVector;

/// d_b j_a - d_a j_b contracted into the two covariant force components.
///
/// In 1+1D the antisymmetric part has a single independent component
/// F01 = d_t j_1 - d_x j_0 (lower current indices).
#[inline]
fn current_curl(sample: &FlowSample) -> f64 {
    // j_1 = -j^1, so d_t j_1 = -grad_j[0][1]; d_x j_0 = grad_j[1][0].
    -sample.grad_j[0][1] - sample.grad_j[1][0]
}

/// Covariant force pieces of the equation of motion at one sample, given the
/// particle's upper-component 4-velocity.
fn eom_rhs(sample: &FlowSample, u: SpacetimeVector) -> SpacetimeVector {
    let f01 = current_curl(sample);
    SpacetimeVector::new(
        sample.grad_rho0.t - u.x * f01,
        sample.grad_rho0.x + u.t * f01,
    )
}

/// One proper-time step of the general equation of motion.
///
/// State: position x^a and lowered velocity u_a. The expanded form
///
/// ```text
/// du_a/dtau = [ d_a rho0 - (u^b d_b rho0) u_a + u^b (d_b j_a - d_a j_b) ] / rho0
/// ```
///
/// preserves u.u = 1 exactly in the continuum (the curl term is
/// antisymmetric; the gradient terms cancel on the unit shell), so the
/// numerical defect measures integrator quality alone.
pub fn general_eom_step(
    p: &ParticleState,
    flow: &CurrentHistory,
    dtau: f64,
) -> Result<ParticleState> {
    // y = [t, x, u_0, u_1]
    let mut deriv = |_tau: f64, y: [f64; 4]| -> Result<[f64; 4]> {
        let u = SpacetimeVector::new(y[2], -y[3]); // upper components
        let s = flow.sample(y[0], y[1])?;
        if !(s.rho0 > s.rho0_floor) {
            return Err(Error::VanishingRestDensity { t: y[0], x: y[1] });
        }
        let drho_dtau = u.t * s.grad_rho0.t + u.x * s.grad_rho0.x;
        let rhs = eom_rhs(&s, u);
        Ok([
            u.t,
            u.x,
            (rhs.t - drho_dtau * y[2]) / s.rho0,
            (rhs.x - drho_dtau * y[3]) / s.rho0,
        ])
    };
    let u_lower = p.u.lower();
    let y = rk4_step(
        [p.t, p.position, u_lower.t, u_lower.x],
        p.proper_time,
        dtau,
        &mut deriv,
    )?;
    Ok(ParticleState {
        position: y[1],
        t: y[0],
        proper_time: p.proper_time + dtau,
        u: SpacetimeVector::new(y[2], y[3]).raise(),
        mass: p.mass,
    })
}

/// Integrate the general equation of motion from an arbitrary timelike start.
pub fn integrate_general_eom(
    flow: &CurrentHistory,
    start: ParticleState,
    dtau: f64,
    n_steps: usize,
) -> Result<Worldline> {
    if start.u.norm_sq() <= 0.0 {
        return Err(Error::NonTimelike {
            dot: start.u.norm_sq(),
        });
    }
    let mut worldline = Worldline::new(IntegratorMethod::GeneralEom, dtau);
    let mut state = start;
    worldline.record(&state);
    for _ in 0..n_steps {
        state = general_eom_step(&state, flow, dtau)?;
        worldline.record(&state);
    }
    Ok(worldline)
}

/// Residual of the equation of motion along a recorded worldline.
///
/// At each interior sample the left side d/dtau (rho0 u_a) is formed by a
/// three-point finite difference in proper time (non-uniform spacings
/// handled exactly to second order) and compared against the sampled right
/// side; returns the Euclidean norm of the two-component defect per interior
/// sample.
pub fn eom_residual(worldline: &Worldline, flow: &CurrentHistory) -> Result<Vec<f64>> {
    let samples = &worldline.samples;
    if samples.len() < 3 {
        return Err(Error::InsufficientHistory {
            len: samples.len(),
        });
    }
    // rho0 u_a at every sample.
    let mut momenta = Vec::with_capacity(samples.len());
    let mut flows = Vec::with_capacity(samples.len());
    for s in samples {
        let f = flow.sample(s.t, s.x)?;
        if !(f.rho0 > f.rho0_floor) {
            return Err(Error::VanishingRestDensity { t: s.t, x: s.x });
        }
        let u_lower = s.u.lower();
        momenta.push((u_lower * f.rho0, s.tau));
        flows.push(f);
    }

    let mut out = Vec::with_capacity(samples.len() - 2);
    for i in 1..samples.len() - 1 {
        let (pm, tm) = momenta[i - 1];
        let (p0, t0) = momenta[i];
        let (pp, tp) = momenta[i + 1];
        // Lagrange three-point derivative at t0.
        let d = |fm: f64, f0: f64, fp: f64| -> f64 {
            fm * (t0 - tp) / ((tm - t0) * (tm - tp))
                + f0 * (2.0 * t0 - tm - tp) / ((t0 - tm) * (t0 - tp))
                + fp * (t0 - tm) / ((tp - tm) * (tp - t0))
        };
        let lhs = SpacetimeVector::new(d(pm.t, p0.t, pp.t), d(pm.x, p0.x, pp.x));
        let rhs = eom_rhs(&flows[i], samples[i].u);
        let defect = lhs - rhs;
        out.push((defect.t * defect.t + defect.x * defect.x).sqrt());
    }
    Ok(out)
}

/// Gradient of the particle Lagrangian with respect to the 4-velocity,
/// returned in covariant components:
///
/// ```text
/// dL/du^a = -rho0 (u.u)^(-1/2) u_a + j_a
/// ```
///
/// Zero exactly when u = j / rho0, which is the guidance condition. The
/// first term is homogeneous of degree zero in u, so rescaling u leaves the
/// gradient unchanged.
pub fn velocity_stationarity(
    u: SpacetimeVector,
    rho0: f64,
    j: SpacetimeVector,
) -> Result<SpacetimeVector> {
    let dot = u.norm_sq();
    if dot <= 0.0 {
        return Err(Error::NonTimelike { dot });
    }
    let scale = rho0 / dot.sqrt();
    let u_lower = u.lower();
    let j_lower = j.lower();
    Ok(SpacetimeVector::new(
        -scale * u_lower.t + j_lower.t,
        -scale * u_lower.x + j_lower.x,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::guidance::{integrate_guidance, particle_on_flow};
    use crate::fields::dirac::{packet_superposition, plane_wave, DiracEvolver, PacketSpec};
    use crate::fields::FieldHistory;
    use crate::grid::LatticeGrid;

    fn grid() -> LatticeGrid {
        LatticeGrid::new(256, 64.0 * std::f64::consts::PI).unwrap()
    }

    fn packet_flow(dt_store: f64, n: usize) -> CurrentHistory {
        let g = grid();
        let f = packet_superposition(
            g,
            1.0,
            &[
                PacketSpec::new(-12.0, 0.6, 5.0),
                PacketSpec::new(12.0, -0.6, 5.0),
            ],
        )
        .unwrap();
        let ev = DiracEvolver::new(g, 1.0);
        let history =
            FieldHistory::evolve(f, dt_store, n, |f, dt| Ok(ev.step_free(f, dt))).unwrap();
        CurrentHistory::from_dirac(&history).unwrap()
    }

    #[test]
    fn plane_wave_worldline_is_straight() {
        let g = grid();
        let f = plane_wave(g, 1.0, 0.75).unwrap();
        let ev = DiracEvolver::new(g, 1.0);
        let history =
            FieldHistory::evolve(f, 0.5, 30, |f, dt| Ok(ev.step_free(f, dt))).unwrap();
        let flow = CurrentHistory::from_dirac(&history).unwrap();

        // Any timelike start: gradients vanish, so du/dtau = 0.
        let u0 = SpacetimeVector::new(1.0, 0.3).normalize_timelike().unwrap();
        let start = ParticleState::new(-2.0, 0.0, u0, 1.0);
        let w = integrate_general_eom(&flow, start, 0.1, 50).unwrap();
        for s in &w.samples {
            assert!((s.u.t - u0.t).abs() <= 1e-12);
            assert!((s.u.x - u0.x).abs() <= 1e-12);
            assert!((s.x - (-2.0 + u0.x * s.tau)).abs() <= 1e-10);
        }
        // Straight worldline satisfies the equation to machine precision.
        let residuals = eom_residual(&w, &flow).unwrap();
        assert!(residuals.iter().all(|&r| r <= 1e-12));
    }

    #[test]
    fn guidance_start_matches_guidance_trajectory() {
        let flow = packet_flow(0.02, 500);
        let (t0, x0) = (0.0, -10.0);
        let dt = 0.02;
        let n = 250;

        let guided = integrate_guidance(&flow, x0, t0, dt, n, 1.0).unwrap();

        // Same start, general equation of motion in proper time, forced to
        // land on the same coordinate times for comparison.
        let mut state = particle_on_flow(&flow, t0, x0, 1.0).unwrap();
        let mut max_sep = 0.0f64;
        for k in 1..=n {
            let t_target = t0 + k as f64 * dt;
            // One step in tau chosen to land close to t_target, then refined.
            for _ in 0..8 {
                let miss = t_target - state.t;
                if miss.abs() < 1e-13 {
                    break;
                }
                let dtau = miss / state.u.t;
                state = general_eom_step(&state, &flow, dtau).unwrap();
            }
            let sep = (state.position - guided.samples[k].x).abs();
            max_sep = max_sep.max(sep);
        }
        println!("guidance vs general-eom max separation: {max_sep:e}");
        assert!(max_sep <= 5e-4, "trajectories diverged: {max_sep}");
        assert!((state.u.norm_sq() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn normalization_survives_boosted_start() {
        let flow = packet_flow(0.02, 400);
        let s0 = flow.sample(0.0, -10.0).unwrap();
        let u0 = s0.ubar.unwrap().boost(0.3);
        let start = ParticleState::new(-10.0, 0.0, u0, 1.0);
        let w = integrate_general_eom(&flow, start, 0.01, 500).unwrap();
        let defect = w.max_normalization_defect();
        println!("general-eom normalization defect: {defect:e}");
        assert!(defect <= 1e-8);
    }

    #[test]
    fn guidance_worldline_residual_converges_to_zero() {
        // The guidance solution solves the general equation identically;
        // the measured residual is pure discretization and must shrink at
        // second order under simultaneous refinement.
        let run = |dt_store: f64, dt: f64| -> f64 {
            let flow = packet_flow(dt_store, (10.0 / dt_store).round() as usize);
            let n = (8.0 / dt).round() as usize;
            let w = integrate_guidance(&flow, -10.0, 0.0, dt, n, 1.0).unwrap();
            eom_residual(&w, &flow)
                .unwrap()
                .into_iter()
                .fold(0.0, f64::max)
        };
        let coarse = run(0.08, 0.08);
        let fine = run(0.04, 0.04);
        let ratio = coarse / fine;
        println!("eom identity residual: {coarse:e} -> {fine:e} (ratio {ratio})");
        assert!(ratio >= 2.5, "expected ~4x shrink, got {ratio}");
    }

    #[test]
    fn corrupted_worldline_has_larger_residual() {
        let flow = packet_flow(0.02, 500);
        let w = integrate_guidance(&flow, -10.0, 0.0, 0.02, 300, 1.0).unwrap();
        let baseline = eom_residual(&w, &flow)
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max);

        let mut jittered = w.clone();
        for (i, s) in jittered.samples.iter_mut().enumerate() {
            s.x += 1e-3 * if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let corrupted = eom_residual(&jittered, &flow)
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max);
        assert!(
            corrupted >= 10.0 * baseline,
            "jitter must be visible: baseline {baseline:e}, corrupted {corrupted:e}"
        );
    }

    #[test]
    fn stationarity_gradient_examples() {
        // u = ubar makes the gradient vanish identically.
        let j = SpacetimeVector::new(5.0, 3.0);
        let rho0 = 4.0;
        let ubar = SpacetimeVector::new(1.25, 0.75);
        let g = velocity_stationarity(ubar, rho0, j).unwrap();
        assert!(g.t.abs() <= 1e-14 && g.x.abs() <= 1e-14);

        // Direct substitution at u = (1, 0): (-rho0 + j_0, j_1) = (1, -3).
        let g = velocity_stationarity(SpacetimeVector::new(1.0, 0.0), rho0, j).unwrap();
        assert!((g.t - 1.0).abs() <= 1e-14);
        assert!((g.x + 3.0).abs() <= 1e-14);

        // Degree-zero homogeneity in u.
        let u = SpacetimeVector::new(2.0, 1.0);
        let g1 = velocity_stationarity(u, rho0, j).unwrap();
        let g2 = velocity_stationarity(u * 3.5, rho0, j).unwrap();
        assert!((g1.t - g2.t).abs() <= 1e-12 && (g1.x - g2.x).abs() <= 1e-12);

        assert!(matches!(
            velocity_stationarity(SpacetimeVector::new(1.0, 1.0), rho0, j),
            Err(Error::NonTimelike { .. })
        ));
    }

    #[test]
    fn stationarity_vanishes_along_guidance_and_flags_boosts() {
        let flow = packet_flow(0.02, 400);
        let w = integrate_guidance(&flow, -10.0, 0.0, 0.02, 300, 1.0).unwrap();
        let mut max_grad = 0.0f64;
        let mut max_boosted = 0.0f64;
        for s in &w.samples {
            let f = flow.sample(s.t, s.x).unwrap();
            let g = velocity_stationarity(s.u, f.rho0, f.j).unwrap();
            max_grad = max_grad.max((g.t * g.t + g.x * g.x).sqrt());
            let gb = velocity_stationarity(s.u.boost(0.1), f.rho0, f.j).unwrap();
            max_boosted = max_boosted.max((gb.t * gb.t + gb.x * gb.x).sqrt());
        }
        assert!(max_grad <= 1e-10, "guidance gradient {max_grad:e}");
        assert!(max_boosted > max_grad * 1e4, "boost must be visible");
    }
}
