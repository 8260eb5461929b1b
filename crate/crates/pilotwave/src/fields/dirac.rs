//! Dirac equation in 1+1D: representation, initial states, and the exact
//! spectral stepper with optional particle source.
//!
//! The representation is fixed: gamma0 = sigma3, gamma1 = i sigma2.
//! With it the current components j0 = psi^dag psi and j1 = psi^dag sigma1 psi
//! are real and satisfy |j1| <= j0, so the rest density is always real.
//! The free Hamiltonian per Fourier mode is H(p) = p sigma1 + m sigma3.

use num_complex::Complex64 as C64;

use crate::currents::{dirac_current, CurrentField};
use crate::error::{Error, Result};
use crate::fields::{RegularizedDensity, Spinor, SpinorField};
use crate::geometry::SpacetimeVector;
use crate::grid::{LatticeGrid, Spectral};

/// Minimal complex 2x2 matrix for spinor-space algebra.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn zero() -> Self {
        Self([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        m.0[0][0] = C64::new(1.0, 0.0);
        m.0[1][1] = C64::new(1.0, 0.0);
        m
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][0] * rhs.0[0][c] + self.0[r][1] * rhs.0[1][c];
            }
        }
        out
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][c] + rhs.0[r][c];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let mut out = *self;
        for row in &mut out.0 {
            for v in row {
                *v *= s;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[c][r].conj();
            }
        }
        out
    }

    #[inline]
    pub fn apply(&self, s: Spinor) -> Spinor {
        [
            self.0[0][0] * s[0] + self.0[0][1] * s[1],
            self.0[1][0] * s[0] + self.0[1][1] * s[1],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

fn sigma3() -> Mat2 {
    Mat2([
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    ])
}

/// The gamma matrices in use.
#[derive(Clone, Copy, Debug)]
pub struct DiracRepresentation {
    pub gamma0: Mat2,
    pub gamma1: Mat2,
}

impl DiracRepresentation {
    /// gamma0 = sigma3, gamma1 = i sigma2.
    pub fn standard() -> Self {
        let gamma1 = Mat2([
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(-1.0, 0.0), C64::new(0.0, 0.0)],
        ]);
        Self {
            gamma0: sigma3(),
            gamma1,
        }
    }

    /// Check {gamma^a, gamma^b} = 2 g^ab I, gamma0 Hermitian, gamma1
    /// anti-Hermitian, all to 1e-14.
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-14;
        let gammas = [self.gamma0, self.gamma1];
        let diag = [1.0, -1.0];
        for a in 0..2 {
            for b in 0..2 {
                let anti = gammas[a].mul(&gammas[b]).add(&gammas[b].mul(&gammas[a]));
                let expect = if a == b { 2.0 * diag[a] } else { 0.0 };
                let residual = anti.add(&Mat2::identity().scale(C64::new(-expect, 0.0)));
                if residual.max_abs() > tol {
                    return Err(Error::Grid(format!(
                        "gamma anticommutation violated for ({a},{b}): residual {}",
                        residual.max_abs()
                    )));
                }
            }
        }
        let herm = self
            .gamma0
            .add(&self.gamma0.adjoint().scale(C64::new(-1.0, 0.0)));
        if herm.max_abs() > tol {
            return Err(Error::Grid("gamma0 is not Hermitian".into()));
        }
        let antiherm = self.gamma1.add(&self.gamma1.adjoint());
        if antiherm.max_abs() > tol {
            return Err(Error::Grid("gamma1 is not anti-Hermitian".into()));
        }
        Ok(())
    }
}

/// Dispersion relation E = sqrt(p^2 + m^2).
#[inline]
pub fn dispersion(mass: f64, p: f64) -> f64 {
    (p * p + mass * mass).sqrt()
}

/// Positive-energy eigenspinor of H(p) = p sigma1 + m sigma3, unit norm.
pub fn positive_energy_spinor(mass: f64, p: f64) -> Result<Spinor> {
    let energy = dispersion(mass, p);
    if energy <= 0.0 {
        return Err(Error::Grid(
            "massless zero-momentum mode has no positive-energy spinor".into(),
        ));
    }
    let norm = (2.0 * energy * (energy + mass)).sqrt();
    Ok([
        C64::new((energy + mass) / norm, 0.0),
        C64::new(p / norm, 0.0),
    ])
}

/// Relative tolerance for matching a requested momentum to a lattice mode.
const MOMENTUM_MATCH_TOL: f64 = 1e-9;

/// Positive-energy plane wave with unit density psi^dag psi = 1.
///
/// The momentum must be one of the lattice momenta 2 pi n / L.
pub fn plane_wave(grid: LatticeGrid, mass: f64, momentum: f64) -> Result<SpinorField> {
    let (_, nearest) = grid.nearest_mode(momentum);
    if (momentum - nearest).abs() > MOMENTUM_MATCH_TOL * momentum.abs().max(1.0) {
        return Err(Error::IncommensurateMomentum {
            requested: momentum,
            nearest,
        });
    }
    let spinor = positive_energy_spinor(mass, nearest)?;
    let values = (0..grid.num_points())
        .map(|i| {
            let phase = C64::new(0.0, nearest * grid.position(i)).exp();
            [spinor[0] * phase, spinor[1] * phase]
        })
        .collect();
    Ok(SpinorField {
        grid,
        values,
        time: 0.0,
        mass,
    })
}

/// One Gaussian packet in a superposition.
#[derive(Clone, Copy, Debug)]
pub struct PacketSpec {
    pub center: f64,
    pub momentum: f64,
    /// Envelope scale: |psi| ~ exp(-(x - center)^2 / width^2).
    pub width: f64,
    pub phase: f64,
    pub weight: f64,
}

impl PacketSpec {
    pub fn new(center: f64, momentum: f64, width: f64) -> Self {
        Self {
            center,
            momentum,
            width,
            phase: 0.0,
            weight: 1.0,
        }
    }
}

/// Superposition of positive-energy Gaussian packets, total norm one.
///
/// Each packet is assembled in momentum space: Gaussian weights
/// exp(-(p - p0)^2 w^2 / 4) around its mean momentum, each mode carrying the
/// positive-energy spinor, so the state stays on the particle branch.
pub fn packet_superposition(
    grid: LatticeGrid,
    mass: f64,
    packets: &[PacketSpec],
) -> Result<SpinorField> {
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
    let mut hat = vec![[C64::new(0.0, 0.0); 2]; n];
    for spec in packets {
        let prefactor = C64::new(0.0, spec.phase).exp() * spec.weight;
        for (k, slot) in hat.iter_mut().enumerate() {
            let p = grid.momentum(k);
            let dp = p - spec.momentum;
            let envelope = (-dp * dp * spec.width * spec.width / 4.0).exp();
            if envelope < 1e-300 {
                continue;
            }
            // Shift to the packet center; the box origin offset keeps the
            // inverse FFT (which synthesizes exp(i p (x + L/2) ... ) via site
            // indices) centered where requested.
            let shift = C64::new(0.0, -p * (spec.center + 0.5 * grid.box_length())).exp();
            let spinor = positive_energy_spinor(mass, p)?;
            let amp = prefactor * envelope * shift;
            slot[0] += spinor[0] * amp;
            slot[1] += spinor[1] * amp;
        }
    }

    let spectral = Spectral::new(grid);
    let mut comp0: Vec<C64> = hat.iter().map(|s| s[0]).collect();
    let mut comp1: Vec<C64> = hat.iter().map(|s| s[1]).collect();
    spectral.inverse(&mut comp0);
    spectral.inverse(&mut comp1);

    let values: Vec<Spinor> = comp0.into_iter().zip(comp1).map(|(a, b)| [a, b]).collect();
    let mut field = SpinorField {
        grid,
        values,
        time: 0.0,
        mass,
    };
    field.normalize()?;
    Ok(field)
}

/// Exact-in-time spectral evolution of the Dirac field, free or with the
/// particle source term.
pub struct DiracEvolver {
    spectral: Spectral,
    mass: f64,
    /// Hook for an external potential; not implemented, kept to mark the
    /// extension point in the stepper interface.
    #[allow(dead_code)]
    external_potential: Option<()>,
}

impl DiracEvolver {
    pub fn new(grid: LatticeGrid, mass: f64) -> Self {
        Self {
            spectral: Spectral::new(grid),
            mass,
            external_potential: None,
        }
    }

    /// Per-mode free propagator exp(-i H(p) dt), H(p) = p sigma1 + m sigma3.
    pub fn mode_propagator(&self, p: f64, dt: f64) -> Mat2 {
        let energy = dispersion(self.mass, p);
        if energy == 0.0 {
            return Mat2::identity();
        }
        let (c, s) = ((energy * dt).cos(), (energy * dt).sin());
        let a = -s / energy; // coefficient of i*H in cos - i sin H/E
        Mat2([
            [
                C64::new(c, a * self.mass),
                C64::new(0.0, a * p),
            ],
            [
                C64::new(0.0, a * p),
                C64::new(c, -a * self.mass),
            ],
        ])
    }

    /// One exact free step: diagonalize per Fourier mode and rotate.
    pub fn step_free(&self, field: &SpinorField, dt: f64) -> SpinorField {
        let n = field.grid.num_points();
        let mut comp0: Vec<C64> = field.values.iter().map(|s| s[0]).collect();
        let mut comp1: Vec<C64> = field.values.iter().map(|s| s[1]).collect();
        self.spectral.forward(&mut comp0);
        self.spectral.forward(&mut comp1);
        for k in 0..n {
            let u = self.mode_propagator(self.spectral.momenta()[k], dt);
            let rotated = u.apply([comp0[k], comp1[k]]);
            comp0[k] = rotated[0];
            comp1[k] = rotated[1];
        }
        self.spectral.inverse(&mut comp0);
        self.spectral.inverse(&mut comp1);
        SpinorField {
            grid: field.grid,
            values: comp0.into_iter().zip(comp1).map(|(a, b)| [a, b]).collect(),
            time: field.time + dt,
            mass: field.mass,
        }
    }

    /// One Strang-split step of the sourced equation: half free step, full
    /// source step, half free step.
    ///
    /// The source enters as an extra Hamiltonian term W(x) =
    /// k sigma0(x) [(u0 - ubar0) I - (u1 - ubar1) sigma1], which is Hermitian,
    /// so the split step is unitary site by site. The flow velocity is taken
    /// from the intermediate (half-stepped) slice.
    pub fn step_sourced(
        &self,
        field: &SpinorField,
        dt: f64,
        particle_x: f64,
        particle_u: SpacetimeVector,
        sigma_width: f64,
        coupling: f64,
    ) -> Result<SpinorField> {
        let half = self.step_free(field, 0.5 * dt);
        let current = dirac_current(&half);
        let regulator = RegularizedDensity::new(particle_x, sigma_width, particle_u.t)?;
        let sigma0 = regulator.sigma0(field.grid);

        let mut mid = half;
        for i in regulator.support(field.grid) {
            let s0 = sigma0[i];
            if s0 == 0.0 {
                continue;
            }
            let ubar = current.ubar(i).ok_or(Error::UndefinedFlow {
                t: mid.time,
                x: field.grid.position(i),
            })?;
            let a = coupling * s0 * (particle_u.t - ubar.t);
            let b = coupling * s0 * (particle_u.x - ubar.x);
            // exp(-i (a I + b' sigma1) dt) with b' = -b.
            let phase = C64::new(0.0, -a * dt).exp();
            let (c, s) = ((b * dt).cos(), (b * dt).sin());
            let v = mid.values[i];
            // cos(b dt) I + i sin(b dt) sigma1 (sign folded from b' = -b).
            let rotated = [
                phase * (v[0] * c + v[1] * C64::new(0.0, s)),
                phase * (v[0] * C64::new(0.0, s) + v[1] * c),
            ];
            mid.values[i] = rotated;
        }

        Ok(self.step_free(&mid, 0.5 * dt))
    }
}

/// Right-hand side of the sourced Dirac equation in the adjoint convention:
/// k sigma0(x) (u_a - ubar_a(x)) gamma^a psi(x), evaluated per site.
///
/// The current must be derived from the same field slice. Sites outside the
/// regulator window are exactly zero; inside the window an undefined flow
/// velocity is an error rather than a value.
pub fn dirac_source_term(
    field: &SpinorField,
    particle_u: SpacetimeVector,
    sigma0: &RegularizedDensity,
    current: &CurrentField,
    coupling: f64,
) -> Result<Vec<Spinor>> {
    let grid = field.grid;
    let sigma0_values = sigma0.sigma0(grid);
    let mut out = vec![[C64::new(0.0, 0.0); 2]; grid.num_points()];
    for i in sigma0.support(grid) {
        let s0 = sigma0_values[i];
        if s0 == 0.0 {
            continue;
        }
        let ubar = current.ubar(i).ok_or(Error::UndefinedFlow {
            t: field.time,
            x: grid.position(i),
        })?;
        let du0 = particle_u.t - ubar.t; // lower index 0 equals upper
        let du1 = particle_u.x - ubar.x; // lower index 1 flips sign below
        // (du_a gamma^a) = du0 gamma0 - du1 gamma1
        let m = Mat2([
            [C64::new(du0, 0.0), C64::new(-du1, 0.0)],
            [C64::new(du1, 0.0), C64::new(-du0, 0.0)],
        ]);
        let v = m.apply(field.values[i]);
        let scale = coupling * s0;
        out[i] = [v[0] * scale, v[1] * scale];
    }
    Ok(out)
}
