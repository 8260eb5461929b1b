//! Field Lagrangian densities, evaluated on stored slices.
//!
//! The Dirac density needs a time derivative and therefore a history window;
//! the Klein-Gordon slice already carries dphi/dt. Sign convention: the
//! density is the one whose variation gives i gamma^a d_a psi - m psi = 0
//! (and the standard KG equation), with the real symmetrized form used on
//! the lattice. On-shell free solutions make the Dirac density vanish.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fields::{FieldHistory, ScalarFieldState, Spinor, SpinorField};
use crate::grid::Spectral;

/// Centered time derivative of the spinor values at `index`, one-sided
/// (second order where possible) at the history ends.
pub(crate) fn spinor_time_derivative(
    history: &FieldHistory<SpinorField>,
    index: usize,
) -> Result<Vec<Spinor>> {
    let len = history.len();
    if len < 2 {
        return Err(Error::InsufficientHistory { len });
    }
    let dt = history.dt_store();
    let n = history.grid().num_points();
    let v = |i: usize| -> &[Spinor] { &history.slice(i).values };
    let mut out = vec![[C64::new(0.0, 0.0); 2]; n];
    for site in 0..n {
        for c in 0..2 {
            out[site][c] = if index > 0 && index + 1 < len {
                (v(index + 1)[site][c] - v(index - 1)[site][c]) / (2.0 * dt)
            } else if len >= 3 && index == 0 {
                (-v(0)[site][c] * 3.0 + v(1)[site][c] * 4.0 - v(2)[site][c]) / (2.0 * dt)
            } else if len >= 3 {
                (v(index)[site][c] * 3.0 - v(index - 1)[site][c] * 4.0 + v(index - 2)[site][c])
                    / (2.0 * dt)
            } else {
                (v(1)[site][c] - v(0)[site][c]) / dt
            };
        }
    }
    Ok(out)
}

/// Dirac Lagrangian density per site:
/// Re[i (psi^dag d_t psi + psi^dag sigma1 d_x psi)] - m psibar psi.
pub fn dirac_lagrangian_density(
    history: &FieldHistory<SpinorField>,
    index: usize,
) -> Result<Vec<f64>> {
    let field = history.slice(index);
    let dpsi_dt = spinor_time_derivative(history, index)?;
    let spectral = Spectral::new(field.grid);
    let comp0: Vec<C64> = field.values.iter().map(|s| s[0]).collect();
    let comp1: Vec<C64> = field.values.iter().map(|s| s[1]).collect();
    let d0_dx = spectral.derivative(&comp0);
    let d1_dx = spectral.derivative(&comp1);

    let i_unit = C64::new(0.0, 1.0);
    Ok((0..field.grid.num_points())
        .map(|site| {
            let psi = field.values[site];
            // psi^dag d_t psi
            let t_term = psi[0].conj() * dpsi_dt[site][0] + psi[1].conj() * dpsi_dt[site][1];
            // psi^dag sigma1 d_x psi
            let x_term = psi[0].conj() * d1_dx[site] + psi[1].conj() * d0_dx[site];
            // psibar psi = |psi0|^2 - |psi1|^2
            let mass_term = psi[0].norm_sqr() - psi[1].norm_sqr();
            (i_unit * (t_term + x_term)).re - field.mass * mass_term
        })
        .collect())
}

/// Klein-Gordon Lagrangian density per site:
/// |dphi/dt|^2 - |dphi/dx|^2 - m^2 |phi|^2.
pub fn kg_lagrangian_density(state: &ScalarFieldState) -> Vec<f64> {
    let spectral = Spectral::new(state.grid);
    let dphi_dx = spectral.derivative(&state.phi);
    let m2 = state.mass * state.mass;
    (0..state.grid.num_points())
        .map(|i| {
            state.dphi_dt[i].norm_sqr() - dphi_dx[i].norm_sqr() - m2 * state.phi[i].norm_sqr()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::dirac::{plane_wave, DiracEvolver};
    use crate::fields::FieldSlice;
    use crate::grid::LatticeGrid;

    fn grid() -> LatticeGrid {
        LatticeGrid::new(256, 64.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn on_shell_plane_wave_density_vanishes() {
        let g = grid();
        let field = plane_wave(g, 1.0, 0.75).unwrap();
        let ev = DiracEvolver::new(g, 1.0);
        let dt = 0.01;
        let history =
            FieldHistory::evolve(field, dt, 4, |f, h| Ok(ev.step_free(f, h))).unwrap();
        // Quadrature cross-check: on-shell the density integrates to ~0 and
        // is also pointwise ~0 up to the O(dt^2) time-differencing error.
        for index in [0usize, 2, 4] {
            let lag = dirac_lagrangian_density(&history, index).unwrap();
            let max = lag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max <= 1e-4, "index {index}: max |L| = {max:e}");
            let integral: f64 = lag.iter().sum::<f64>() * g.dx();
            assert!(integral.abs() <= 1e-4 * g.box_length());
        }
    }

    #[test]
    fn on_shell_density_error_shrinks_with_dt() {
        let g = grid();
        let field = plane_wave(g, 1.0, 0.75).unwrap();
        let ev = DiracEvolver::new(g, 1.0);
        let max_at = |dt: f64| {
            let history =
                FieldHistory::evolve(field.clone(), dt, 2, |f, h| Ok(ev.step_free(f, h)))
                    .unwrap();
            dirac_lagrangian_density(&history, 1)
                .unwrap()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let ratio = max_at(0.02) / max_at(0.01);
        assert!((3.0..5.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_field_has_zero_density() {
        let g = grid();
        let f = SpinorField::zero(g, 1.0);
        let mut history = FieldHistory::new(f.clone());
        history.push(f.clone().with_time(0.1)).unwrap();
        let lag = dirac_lagrangian_density(&history, 0).unwrap();
        assert!(lag.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_slice_is_insufficient() {
        let g = grid();
        let history = FieldHistory::new(SpinorField::zero(g, 1.0));
        assert!(matches!(
            dirac_lagrangian_density(&history, 0),
            Err(Error::InsufficientHistory { len: 1 })
        ));
    }

    #[test]
    fn static_kg_density_is_minus_m2_phi2() {
        let g = grid();
        let mut state = ScalarFieldState::zero(g, 2.0);
        let c = C64::new(0.3, 0.4);
        for v in state.phi.iter_mut() {
            *v = c;
        }
        let lag = kg_lagrangian_density(&state);
        let expected = -4.0 * c.norm_sqr();
        for v in &lag {
            assert!((v - expected).abs() <= 1e-10);
        }
    }
}
