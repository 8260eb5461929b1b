//! Klein-Gordon field: positive-frequency initial states and exact spectral
//! evolution of the (phi, dphi/dt) pair.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fields::dirac::{dispersion, PacketSpec};
use crate::fields::ScalarFieldState;
use crate::grid::{LatticeGrid, Spectral};

fn check_mass(mass: f64) -> Result<()> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::Grid(format!(
            "Klein-Gordon mass {mass} must be positive"
        )));
    }
    Ok(())
}

/// Positive-frequency plane wave phi = exp(i p x), dphi/dt = -i omega phi.
pub fn kg_plane_wave(grid: LatticeGrid, mass: f64, momentum: f64) -> Result<ScalarFieldState> {
    check_mass(mass)?;
    let (_, nearest) = grid.nearest_mode(momentum);
    if (momentum - nearest).abs() > 1e-9 * momentum.abs().max(1.0) {
        return Err(Error::IncommensurateMomentum {
            requested: momentum,
            nearest,
        });
    }
    let omega = dispersion(mass, nearest);
    let n = grid.num_points();
    let mut phi = Vec::with_capacity(n);
    let mut dphi_dt = Vec::with_capacity(n);
    for i in 0..n {
        let value = C64::new(0.0, nearest * grid.position(i)).exp();
        phi.push(value);
        dphi_dt.push(C64::new(0.0, -omega) * value);
    }
    Ok(ScalarFieldState {
        grid,
        phi,
        dphi_dt,
        time: 0.0,
        mass,
    })
}

/// Superposition of positive-frequency Gaussian packets, normalized so the
/// total j0 integral is one.
pub fn kg_packet_superposition(
    grid: LatticeGrid,
    mass: f64,
    packets: &[PacketSpec],
) -> Result<ScalarFieldState> {
    check_mass(mass)?;
    if packets.is_empty() {
        return Err(Error::Grid("no packets specified".into()));
    }
    let min_width = 4.0 * grid.dx();
    for p in packets {
        if p.width < min_width {
            return Err(Error::UnderresolvedPacket {
                width: p.width,
                min: min_width,
            });
        }
    }
    let n = grid.num_points();
    let mut phi_hat = vec![C64::new(0.0, 0.0); n];
    let mut pi_hat = vec![C64::new(0.0, 0.0); n];
    for spec in packets {
        let prefactor = C64::new(0.0, spec.phase).exp() * spec.weight;
        for k in 0..n {
            let p = grid.momentum(k);
            let dp = p - spec.momentum;
            let envelope = (-dp * dp * spec.width * spec.width / 4.0).exp();
            if envelope < 1e-300 {
                continue;
            }
            let shift = C64::new(0.0, -p * (spec.center + 0.5 * grid.box_length())).exp();
            let amp = prefactor * envelope * shift;
            phi_hat[k] += amp;
            pi_hat[k] += C64::new(0.0, -dispersion(mass, p)) * amp;
        }
    }
    let spectral = Spectral::new(grid);
    spectral.inverse(&mut phi_hat);
    spectral.inverse(&mut pi_hat);
    let mut state = ScalarFieldState {
        grid,
        phi: phi_hat,
        dphi_dt: pi_hat,
        time: 0.0,
        mass,
    };

    // Normalize the conserved charge integral j0 to one.
    let total: f64 = state
        .phi
        .iter()
        .zip(&state.dphi_dt)
        .map(|(p, dp)| -(p.conj() * dp).im / mass)
        .sum::<f64>()
        * grid.dx();
    if !(total > 0.0) {
        return Err(Error::DegenerateDensity);
    }
    let scale = 1.0 / total.sqrt();
    for v in state.phi.iter_mut().chain(state.dphi_dt.iter_mut()) {
        *v *= scale;
    }
    Ok(state)
}

/// Exact per-mode Klein-Gordon evolution: each Fourier pair
/// (phi_k, pi_k) rotates at omega_k = sqrt(k^2 + m^2).
pub struct KleinGordonEvolver {
    spectral: Spectral,
    mass: f64,
}

impl KleinGordonEvolver {
    pub fn new(grid: LatticeGrid, mass: f64) -> Self {
        Self {
            spectral: Spectral::new(grid),
            mass,
        }
    }

    pub fn step(&self, state: &ScalarFieldState, dt: f64) -> ScalarFieldState {
        let mut phi = state.phi.clone();
        let mut pi = state.dphi_dt.clone();
        self.spectral.forward(&mut phi);
        self.spectral.forward(&mut pi);
        for (k, p) in self.spectral.momenta().iter().enumerate() {
            let omega = dispersion(self.mass, *p);
            let (c, s) = ((omega * dt).cos(), (omega * dt).sin());
            let (f, g) = (phi[k], pi[k]);
            phi[k] = f * c + g * (s / omega);
            pi[k] = -f * (omega * s) + g * c;
        }
        self.spectral.inverse(&mut phi);
        self.spectral.inverse(&mut pi);
        ScalarFieldState {
            grid: state.grid,
            phi,
            dphi_dt: pi,
            time: state.time + dt,
            mass: state.mass,
        }
    }
}

/// Conserved field energy: sum of |dphi/dt|^2 + |dphi/dx|^2 + m^2 |phi|^2 dx.
pub fn kg_energy(state: &ScalarFieldState) -> f64 {
    let spectral = Spectral::new(state.grid);
    let dphi_dx = spectral.derivative(&state.phi);
    let m2 = state.mass * state.mass;
    state
        .phi
        .iter()
        .zip(&state.dphi_dt)
        .zip(&dphi_dx)
        .map(|((p, dp), dx)| dp.norm_sqr() + dx.norm_sqr() + m2 * p.norm_sqr())
        .sum::<f64>()
        * state.grid.dx()
}
