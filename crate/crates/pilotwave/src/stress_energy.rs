//! Canonical energy-momentum tensor, split into field, particle and
//! interaction parts, with divergence and total-momentum diagnostics.
//!
//! Conventions: T^{ab} for the field part is the canonical Noether tensor of
//! the field Lagrangian (see [`crate::fields::lagrangian`]), evaluated with
//! centered time differences across stored slices and spectral space
//! derivatives, with upper derivative indices metric-raised (d^1 = -d_x).
//! The Klein-Gordon tensor is symmetric; the canonical Dirac tensor is not
//! (it tracks orbital angular momentum only), so its asymmetry is reported
//! by diagnostics rather than asserted away.

use num_complex::Complex64 as C64;

use crate::currents::{dirac_current, kg_current};
use crate::dynamics::ParticleState;
use crate::error::{Error, Result};
use crate::fields::lagrangian::{dirac_lagrangian_density, kg_lagrangian_density};
use crate::fields::{FieldHistory, RegularizedDensity, ScalarFieldState, SpinorField};
use crate::geometry::SpacetimeVector;
use crate::grid::{LatticeGrid, Spectral};

/// Which piece of the three-part split a tensor field holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorPart {
    Field,
    Particle,
    Interaction,
    Total,
}

impl TensorPart {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Field => "field",
            Self::Particle => "particle",
            Self::Interaction => "interaction",
            Self::Total => "total",
        }
    }
}

/// Lattice values of T^{ab} (2x2 per site) for one part at one time.
#[derive(Clone, Debug)]
pub struct StressEnergyField {
    pub grid: LatticeGrid,
    pub time: f64,
    pub part: TensorPart,
    pub t00: Vec<f64>,
    pub t01: Vec<f64>,
    pub t10: Vec<f64>,
    pub t11: Vec<f64>,
}

impl StressEnergyField {
    fn zeros(grid: LatticeGrid, time: f64, part: TensorPart) -> Self {
        let n = grid.num_points();
        Self {
            grid,
            time,
            part,
            t00: vec![0.0; n],
            t01: vec![0.0; n],
            t10: vec![0.0; n],
            t11: vec![0.0; n],
        }
    }

    pub fn component(&self, a: usize, b: usize) -> &[f64] {
        match (a, b) {
            (0, 0) => &self.t00,
            (0, 1) => &self.t01,
            (1, 0) => &self.t10,
            (1, 1) => &self.t11,
            _ => panic!("index out of range"),
        }
    }

    /// Integrals of each component over the box.
    pub fn integrals(&self) -> [[f64; 2]; 2] {
        let dx = self.grid.dx();
        let sum = |v: &[f64]| v.iter().sum::<f64>() * dx;
        [
            [sum(&self.t00), sum(&self.t01)],
            [sum(&self.t10), sum(&self.t11)],
        ]
    }

    /// Largest |T^{ab}| over sites and components.
    pub fn max_abs(&self) -> f64 {
        [&self.t00, &self.t01, &self.t10, &self.t11]
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Largest |T^{01} - T^{10}|; zero for spin-zero fields, generally not
    /// for the canonical Dirac tensor.
    pub fn max_asymmetry(&self) -> f64 {
        self.t01
            .iter()
            .zip(&self.t10)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Elementwise sum of parts, labeled Total.
pub fn total_tensor(parts: &[&StressEnergyField]) -> StressEnergyField {
    assert!(!parts.is_empty());
    let mut out = StressEnergyField::zeros(parts[0].grid, parts[0].time, TensorPart::Total);
    for p in parts {
        assert_eq!(p.grid, out.grid, "tensor parts must share a grid");
        for i in 0..out.grid.num_points() {
            out.t00[i] += p.t00[i];
            out.t01[i] += p.t01[i];
            out.t10[i] += p.t10[i];
            out.t11[i] += p.t11[i];
        }
    }
    out
}

/// Canonical field tensor for the Dirac slice at `index`:
/// T^{ab} = -Im(psibar gamma^b d^a psi) - g^{ab} L.
pub fn dirac_field_tensor(
    history: &FieldHistory<SpinorField>,
    index: usize,
) -> Result<StressEnergyField> {
    let field = history.slice(index);
    let grid = field.grid;
    let dpsi_dt = crate::fields::lagrangian::spinor_time_derivative(history, index)?;
    let lag = dirac_lagrangian_density(history, index)?;
    let spectral = Spectral::new(grid);
    let comp0: Vec<C64> = field.values.iter().map(|s| s[0]).collect();
    let comp1: Vec<C64> = field.values.iter().map(|s| s[1]).collect();
    let d0_dx = spectral.derivative(&comp0);
    let d1_dx = spectral.derivative(&comp1);

    let mut out = StressEnergyField::zeros(grid, field.time, TensorPart::Field);
    for i in 0..grid.num_points() {
        let psi = field.values[i];
        let dt = dpsi_dt[i];
        let dx = [d0_dx[i], d1_dx[i]];
        // psibar gamma^0 v = psi^dag v; psibar gamma^1 v = psi^dag sigma1 v.
        let bar0 = |v: [C64; 2]| psi[0].conj() * v[0] + psi[1].conj() * v[1];
        let bar1 = |v: [C64; 2]| psi[0].conj() * v[1] + psi[1].conj() * v[0];
        out.t00[i] = -bar0(dt).im - lag[i];
        out.t01[i] = -bar1(dt).im;
        out.t10[i] = bar0(dx).im;
        out.t11[i] = bar1(dx).im + lag[i];
    }
    Ok(out)
}

/// Canonical (symmetric) field tensor for a Klein-Gordon slice:
/// T^{ab} = 2 Re(d^a phi* d^b phi) - g^{ab} L.
pub fn kg_field_tensor(state: &ScalarFieldState) -> StressEnergyField {
    let grid = state.grid;
    let spectral = Spectral::new(grid);
    let dphi_dx = spectral.derivative(&state.phi);
    let lag = kg_lagrangian_density(state);

    let mut out = StressEnergyField::zeros(grid, state.time, TensorPart::Field);
    for i in 0..grid.num_points() {
        let pi = state.dphi_dt[i];
        let dx = dphi_dx[i];
        out.t00[i] = 2.0 * pi.norm_sqr() - lag[i];
        let t01 = -2.0 * (pi.conj() * dx).re;
        out.t01[i] = t01;
        out.t10[i] = t01;
        out.t11[i] = 2.0 * dx.norm_sqr() + lag[i];
    }
    out
}

/// Particle tensor: k sigma0(x) rho0(x_p) u^a u^b deposited through the
/// Gaussian regulator. Integrates to k rho0 u^a u^b / u0 exactly, since the
/// regulator is lattice-normalized.
pub fn particle_tensor(
    grid: LatticeGrid,
    particle: &ParticleState,
    sigma: &RegularizedDensity,
    rho0_at_particle: f64,
    coupling: f64,
) -> Result<StressEnergyField> {
    if !(rho0_at_particle > 0.0) || !rho0_at_particle.is_finite() {
        return Err(Error::VanishingRestDensity {
            t: particle.t,
            x: particle.position,
        });
    }
    let sigma0 = sigma.sigma0(grid);
    let u = particle.u;
    let mut out = StressEnergyField::zeros(grid, particle.t, TensorPart::Particle);
    for i in sigma.support(grid) {
        let w = coupling * sigma0[i] * rho0_at_particle;
        out.t00[i] = w * u.t * u.t;
        out.t01[i] = w * u.t * u.x;
        out.t10[i] = w * u.x * u.t;
        out.t11[i] = w * u.x * u.x;
    }
    Ok(out)
}

/// The derivative-coupling brace of the interaction tensor.
///
/// With current j^l and functional derivatives dj^l/d(d_b psi), the brace is
/// sigma0 (u_l - ubar_l) { (d^a psi) dj^l/d(d_b psi) + conjugate }. The Dirac
/// current carries no derivative dependence, so the brace vanishes
/// identically there; for Klein-Gordon it contracts to
/// sigma0 (u^b - ubar^b) j^a.
enum InteractionBrace<'a> {
    Dirac,
    KleinGordon(&'a ScalarFieldState),
}

/// Interaction tensor: brace - k sigma0 j^a u^b, restricted to the regulator
/// support window.
#[allow(clippy::too_many_arguments)]
fn interaction_tensor_impl(
    grid: LatticeGrid,
    time: f64,
    j0: &[f64],
    j1: &[f64],
    ubar_of: &dyn Fn(usize) -> Result<SpacetimeVector>,
    brace: InteractionBrace,
    particle: &ParticleState,
    sigma: &RegularizedDensity,
    coupling: f64,
) -> Result<StressEnergyField> {
    let sigma0 = sigma.sigma0(grid);
    let u = particle.u;
    let mut out = StressEnergyField::zeros(grid, time, TensorPart::Interaction);

    // Klein-Gordon brace needs d^a phi at the support sites.
    let kg_derivs = match brace {
        InteractionBrace::Dirac => None,
        InteractionBrace::KleinGordon(state) => {
            let spectral = Spectral::new(grid);
            Some((state, spectral.derivative(&state.phi)))
        }
    };

    for i in sigma.support(grid) {
        let s0 = coupling * sigma0[i];
        if s0 == 0.0 {
            continue;
        }
        let j = SpacetimeVector::new(j0[i], j1[i]);
        let mut t = [[0.0f64; 2]; 2];
        // -k sigma0 j^a u^b
        let u_up = [u.t, u.x];
        let j_up = [j.t, j.x];
        for a in 0..2 {
            for b in 0..2 {
                t[a][b] = -s0 * j_up[a] * u_up[b];
            }
        }
        if let Some((state, dphi_dx)) = &kg_derivs {
            let ubar = ubar_of(i)?;
            let delta = [u.t - ubar.t, u.x - ubar.x];
            // (i/2m)(phi* d^a phi - phi d^a phi*) rebuilt from this slice's
            // derivatives; the brace contracts g^{lb} into Delta^b (upper).
            let da_phi = [state.dphi_dt[i], -dphi_dx[i]];
            for (a, da) in da_phi.iter().enumerate() {
                let ja = -(state.phi[i].conj() * da).im / state.mass;
                for b in 0..2 {
                    t[a][b] += s0 * delta[b] * ja;
                }
            }
        }
        out.t00[i] = t[0][0];
        out.t01[i] = t[0][1];
        out.t10[i] = t[1][0];
        out.t11[i] = t[1][1];
    }
    Ok(out)
}

/// Dirac interaction tensor. The brace term is identically zero because the
/// Dirac current has no derivative dependence, leaving -k sigma0 j^a u^b.
pub fn dirac_interaction_tensor(
    field: &SpinorField,
    particle: &ParticleState,
    sigma: &RegularizedDensity,
    coupling: f64,
) -> Result<StressEnergyField> {
    let current = dirac_current(field);
    interaction_tensor_impl(
        field.grid,
        field.time,
        &current.j0,
        &current.j1,
        &|i| current.require_ubar(i),
        InteractionBrace::Dirac,
        particle,
        sigma,
        coupling,
    )
}

/// Klein-Gordon interaction tensor with the active derivative-coupling brace.
pub fn kg_interaction_tensor(
    state: &ScalarFieldState,
    particle: &ParticleState,
    sigma: &RegularizedDensity,
    coupling: f64,
) -> Result<StressEnergyField> {
    let current = kg_current(state);
    interaction_tensor_impl(
        state.grid,
        state.time,
        &current.j0,
        &current.j1,
        &|i| current.require_ubar(i),
        InteractionBrace::KleinGordon(state),
        particle,
        sigma,
        coupling,
    )
}

/// Divergence residual d_b T^{ab} at the middle of three consecutive slices:
/// centered difference in time, spectral derivative in space. Returns one
/// residual field per free index a.
pub fn divergence(
    prev: &StressEnergyField,
    curr: &StressEnergyField,
    next: &StressEnergyField,
) -> Result<[Vec<f64>; 2]> {
    assert_eq!(prev.part, curr.part);
    assert_eq!(next.part, curr.part);
    let dt_fwd = next.time - curr.time;
    let dt_bwd = curr.time - prev.time;
    if !(dt_fwd > 0.0 && dt_bwd > 0.0) {
        return Err(Error::InsufficientHistory { len: 2 });
    }
    let dt2 = dt_fwd + dt_bwd;
    let spectral = Spectral::new(curr.grid);
    let dx_t01 = spectral.derivative_real(&curr.t01);
    let dx_t11 = spectral.derivative_real(&curr.t11);
    let n = curr.grid.num_points();
    let mut r0 = Vec::with_capacity(n);
    let mut r1 = Vec::with_capacity(n);
    for i in 0..n {
        let dt_t00 = (next.t00[i] - prev.t00[i]) / dt2;
        let dt_t10 = (next.t10[i] - prev.t10[i]) / dt2;
        r0.push(dt_t00 + dx_t01[i]);
        r1.push(dt_t10 + dx_t11[i]);
    }
    Ok([r0, r1])
}

/// Total 2-momentum P^a = sum of T^{a0} dx.
pub fn total_momentum(tensor: &StressEnergyField) -> SpacetimeVector {
    let dx = tensor.grid.dx();
    SpacetimeVector::new(
        tensor.t00.iter().sum::<f64>() * dx,
        tensor.t10.iter().sum::<f64>() * dx,
    )
}
