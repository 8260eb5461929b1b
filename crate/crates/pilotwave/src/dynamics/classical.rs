//! Classical testbeds: a charged particle in an analytic electromagnetic
//! potential and a particle coupled to an analytic scalar potential.
//!
//! These exercise the same integrator machinery as the quantum case against
//! closed-form oracles (hyperbolic motion, conserved effective energy).

use crate::dynamics::{rk4_step, IntegratorMethod, ParticleState, Worldline};
use crate::error::{Error, Result};
use crate::geometry::SpacetimeVector;

/// Analytic electromagnetic backgrounds: the 4-potential and its field
/// tensor in closed form.
#[derive(Clone, Copy, Debug)]
pub enum EmBackground {
    Zero,
    /// A0 = -E0 x: a uniform electric field of strength E0.
    UniformElectric { e0: f64 },
}

impl EmBackground {
    /// 4-potential A^a(t, x).
    pub fn potential(&self, _t: f64, x: f64) -> SpacetimeVector {
        match self {
            Self::Zero => SpacetimeVector::zero(),
            Self::UniformElectric { e0 } => SpacetimeVector::new(-e0 * x, 0.0),
        }
    }

    /// The single independent component F^{01} = d^0 A^1 - d^1 A^0.
    pub fn f01_upper(&self, _t: f64, _x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::UniformElectric { e0 } => -e0,
        }
    }
}

/// Analytic scalar potentials phi(t, x) with closed-form gradients.
#[derive(Clone, Copy, Debug)]
pub enum ScalarBackground {
    Constant { value: f64 },
    /// phi = amplitude * exp(-(x - center)^2 / (2 width^2)), static in time.
    StaticGaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl ScalarBackground {
    pub fn phi(&self, _t: f64, x: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::StaticGaussian {
                amplitude,
                center,
                width,
            } => {
                let d = x - center;
                amplitude * (-d * d / (2.0 * width * width)).exp()
            }
        }
    }

    /// Covariant gradient (d_t phi, d_x phi).
    pub fn grad(&self, t: f64, x: f64) -> SpacetimeVector {
        match self {
            Self::Constant { .. } => SpacetimeVector::zero(),
            Self::StaticGaussian {
                center, width, ..
            } => {
                let d = x - center;
                SpacetimeVector::new(0.0, -d / (width * width) * self.phi(t, x))
            }
        }
    }
}

/// One proper-time step of m du^a/dtau = q F^a_b u^b.
pub fn lorentz_force_step(
    p: &ParticleState,
    charge: f64,
    bg: &EmBackground,
    dtau: f64,
) -> Result<ParticleState> {
    let qm = charge / p.mass;
    let mut deriv = |_tau: f64, y: [f64; 4]| -> Result<[f64; 4]> {
        // y = [t, x, u^0, u^1]; F^0_1 u^1 = -F^{01} u^1, F^1_0 u^0 = -F^{01} u^0.
        let f01 = bg.f01_upper(y[0], y[1]);
        Ok([y[2], y[3], -qm * f01 * y[3], -qm * f01 * y[2]])
    };
    let y = rk4_step(
        [p.t, p.position, p.u.t, p.u.x],
        p.proper_time,
        dtau,
        &mut deriv,
    )?;
    Ok(ParticleState {
        position: y[1],
        t: y[0],
        proper_time: p.proper_time + dtau,
        u: SpacetimeVector::new(y[2], y[3]),
        mass: p.mass,
    })
}

/// One proper-time step of d/dtau [(m + phi) u_nu] = d_nu phi, expanded to
///
/// ```text
/// du_nu/dtau = [ d_nu phi - (u^b d_b phi) u_nu ] / (m + phi)
/// ```
///
/// The projector structure keeps u.u = 1; dropping it (that is, omitting the
/// square-root factor from the interaction term) is exactly what breaks the
/// normalization identity, which [`Worldline::max_normalization_defect`]
/// would expose.
pub fn scalar_eom_step(
    p: &ParticleState,
    bg: &ScalarBackground,
    dtau: f64,
) -> Result<ParticleState> {
    let mass = p.mass;
    let mut deriv = |tau: f64, y: [f64; 4]| -> Result<[f64; 4]> {
        // y = [t, x, u_0, u_1]
        let eff = mass + bg.phi(y[0], y[1]);
        if eff <= 0.0 {
            return Err(Error::EffectiveMassNonPositive { value: eff, tau });
        }
        let grad = bg.grad(y[0], y[1]);
        let u_upper = SpacetimeVector::new(y[2], -y[3]);
        let dphi_dtau = u_upper.t * grad.t + u_upper.x * grad.x;
        Ok([
            u_upper.t,
            u_upper.x,
            (grad.t - dphi_dtau * y[2]) / eff,
            (grad.x - dphi_dtau * y[3]) / eff,
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

/// Integrate either classical testbed, recording every step.
pub fn integrate_classical(
    start: ParticleState,
    charge_or_unused: f64,
    em: Option<&EmBackground>,
    scalar: Option<&ScalarBackground>,
    dtau: f64,
    n_steps: usize,
) -> Result<Worldline> {
    let method = if em.is_some() {
        IntegratorMethod::LorentzForce
    } else {
        IntegratorMethod::ScalarForce
    };
    let mut w = Worldline::new(method, dtau);
    let mut state = start;
    w.record(&state);
    for _ in 0..n_steps {
        state = match (em, scalar) {
            (Some(bg), _) => lorentz_force_step(&state, charge_or_unused, bg, dtau)?,
            (None, Some(bg)) => scalar_eom_step(&state, bg, dtau)?,
            (None, None) => return Err(Error::Grid("no classical background given".into())),
        };
        w.record(&state);
    }
    Ok(w)
}

/// Closed-form hyperbolic motion from rest under a uniform field:
/// returns (t, x - x0, u0, u1) at proper time tau for acceleration a = qE0/m.
pub fn hyperbolic_motion(a: f64, tau: f64) -> (f64, f64, f64, f64) {
    (
        (a * tau).sinh() / a,
        ((a * tau).cosh() - 1.0) / a,
        (a * tau).cosh(),
        (a * tau).sinh(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest_particle(mass: f64) -> ParticleState {
        ParticleState::new(0.0, 0.0, SpacetimeVector::new(1.0, 0.0), mass)
    }

    #[test]
    fn field_tensor_matches_finite_differences_of_potential() {
        let bg = EmBackground::UniformElectric { e0: 0.5 };
        let h = 1e-4;
        for &(t, x) in &[(0.0, 0.0), (1.3, -2.0), (5.0, 7.5)] {
            // F^{01} = d_t A^1 + d_x A^0 (raising the spatial index flips sign).
            let da1_dt = (bg.potential(t + h, x).x - bg.potential(t - h, x).x) / (2.0 * h);
            let da0_dx = (bg.potential(t, x + h).t - bg.potential(t, x - h).t) / (2.0 * h);
            let fd = da1_dt + da0_dx;
            assert!((fd - bg.f01_upper(t, x)).abs() <= 1e-6);
        }

        let sg = ScalarBackground::StaticGaussian {
            amplitude: -0.3,
            center: 1.0,
            width: 4.0,
        };
        for &(t, x) in &[(0.0, 0.0), (2.0, 3.0), (0.5, -6.0)] {
            let fd = (sg.phi(t, x + h) - sg.phi(t, x - h)) / (2.0 * h);
            assert!((fd - sg.grad(t, x).x).abs() <= 1e-6);
        }
    }

    #[test]
    fn zero_field_gives_straight_line() {
        let mut p = rest_particle(1.0);
        p.u = SpacetimeVector::new(1.25, 0.75);
        let w = integrate_classical(p, 1.0, Some(&EmBackground::Zero), None, 0.05, 100).unwrap();
        let last = w.samples.last().unwrap();
        assert!((last.x - 0.75 * 5.0).abs() <= 1e-12);
        assert!(w.max_normalization_defect() <= 1e-12);
    }

    #[test]
    fn hyperbolic_motion_matches_closed_form() {
        let (q, e0, m) = (1.0, 0.5, 1.0);
        let a = q * e0 / m;
        let bg = EmBackground::UniformElectric { e0 };
        let dtau = 0.001;
        // Cover a tau / m in [0, 3].
        let n = (3.0 / a / dtau).round() as usize;
        let mut p = rest_particle(m);
        let mut max_err = 0.0f64;
        for i in 1..=n {
            p = lorentz_force_step(&p, q, &bg, dtau).unwrap();
            let (t, x, u0, u1) = hyperbolic_motion(a, i as f64 * dtau);
            max_err = max_err
                .max((p.t - t).abs())
                .max((p.position - x).abs())
                .max((p.u.t - u0).abs())
                .max((p.u.x - u1).abs());
        }
        assert!(max_err <= 1e-6, "max deviation {max_err:e}");
        assert!((p.u.norm_sq() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn charge_reversal_mirrors_the_trajectory() {
        let bg = EmBackground::UniformElectric { e0: 0.5 };
        let mut plus = rest_particle(1.0);
        let mut minus = rest_particle(1.0);
        for _ in 0..200 {
            plus = lorentz_force_step(&plus, 1.0, &bg, 0.01).unwrap();
            minus = lorentz_force_step(&minus, -1.0, &bg, 0.01).unwrap();
        }
        assert!((plus.position + minus.position).abs() <= 1e-12);
        assert!((plus.t - minus.t).abs() <= 1e-12);
    }

    #[test]
    fn constant_potential_gives_uniform_motion() {
        let bg = ScalarBackground::Constant { value: 0.4 };
        let mut p = rest_particle(1.0);
        p.u = SpacetimeVector::new(1.25, -0.75);
        let w = integrate_classical(p, 0.0, None, Some(&bg), 0.05, 100).unwrap();
        let last = w.samples.last().unwrap();
        assert!((last.u.x + 0.75).abs() <= 1e-12);
        assert!((last.x + 0.75 * 5.0).abs() <= 1e-12);
    }

    #[test]
    fn static_potential_conserves_effective_energy() {
        // Scalar coupling phi = k rho0 - m with a static bump profile: the
        // effective mass m + phi is the profile itself and (m + phi) u_0 is
        // conserved along the worldline.
        let bg = ScalarBackground::StaticGaussian {
            amplitude: -0.3,
            center: 0.0,
            width: 5.0,
        };
        let m = 1.0;
        let mut p = ParticleState::new(
            -8.0,
            0.0,
            SpacetimeVector::new(1.0, 0.2).normalize_timelike().unwrap(),
            m,
        );
        let e0 = (m + bg.phi(0.0, p.position)) * p.u.lower().t;
        let mut max_drift = 0.0f64;
        for _ in 0..4000 {
            p = scalar_eom_step(&p, &bg, 0.005).unwrap();
            let e = (m + bg.phi(p.t, p.position)) * p.u.lower().t;
            max_drift = max_drift.max((e - e0).abs());
        }
        assert!(max_drift <= 1e-8, "energy drift {max_drift:e}");
        assert!((p.u.norm_sq() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn deep_well_rejects_nonpositive_effective_mass() {
        let bg = ScalarBackground::StaticGaussian {
            amplitude: -1.5,
            center: 0.0,
            width: 3.0,
        };
        let p = rest_particle(1.0);
        match scalar_eom_step(&p, &bg, 0.01) {
            Err(Error::EffectiveMassNonPositive { .. }) => {}
            other => panic!("expected EffectiveMassNonPositive, got {other:?}"),
        }
    }

    #[test]
    fn halving_the_step_gains_sixteenfold() {
        let (q, e0, m) = (1.0, 0.5, 1.0);
        let bg = EmBackground::UniformElectric { e0 };
        let run = |dtau: f64| {
            let n = (4.0 / dtau).round() as usize;
            let mut p = rest_particle(m);
            for _ in 0..n {
                p = lorentz_force_step(&p, q, &bg, dtau).unwrap();
            }
            let (_, x, _, _) = hyperbolic_motion(q * e0 / m, 4.0);
            (p.position - x).abs()
        };
        let ratio = run(0.04) / run(0.02);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }
}
