//! Probability current, rest density and flow velocity on a field slice.
//!
//! From the current j^a the rest density rho0 = sqrt(j.j) and flow velocity
//! ubar = j / rho0 follow uniquely wherever j is timelike. Sites where the
//! density sits below a relative floor, or where j is not timelike (possible
//! for Klein-Gordon), carry an undefined flag instead of a value; nothing is
//! clamped.

use crate::error::{Error, Result};
use crate::fields::{ScalarFieldState, SpinorField};
use crate::geometry::SpacetimeVector;
use crate::grid::{LatticeGrid, Spectral};

/// Sites with j0 below this fraction of the slice maximum are flagged:
/// nodes of the wavefunction genuinely have no flow velocity.
pub const DENSITY_FLOOR_REL: f64 = 1e-12;

/// Current data derived from one field slice.
#[derive(Clone, Debug)]
pub struct CurrentField {
    pub grid: LatticeGrid,
    pub time: f64,
    pub j0: Vec<f64>,
    pub j1: Vec<f64>,
    /// sqrt(j.j); NaN where `flow_defined` is false.
    pub rho0: Vec<f64>,
    pub ubar_t: Vec<f64>,
    pub ubar_x: Vec<f64>,
    /// j1/j0; NaN where `vbar_defined` is false.
    pub vbar: Vec<f64>,
    /// True where rho0 and ubar exist (timelike current above the floor).
    pub flow_defined: Vec<bool>,
    /// True where j0 alone clears the floor, so vbar exists.
    pub vbar_defined: Vec<bool>,
}

impl CurrentField {
    /// Assemble flags and derived quantities from raw (j0, j1).
    fn from_components(grid: LatticeGrid, time: f64, j0: Vec<f64>, j1: Vec<f64>) -> Self {
        let n = grid.num_points();
        let max_j0 = j0.iter().fold(0.0f64, |m, &v| m.max(v));
        let floor = DENSITY_FLOOR_REL * max_j0;
        let mut rho0 = vec![f64::NAN; n];
        let mut ubar_t = vec![f64::NAN; n];
        let mut ubar_x = vec![f64::NAN; n];
        let mut vbar = vec![f64::NAN; n];
        let mut flow_defined = vec![false; n];
        let mut vbar_defined = vec![false; n];
        for i in 0..n {
            let above_floor = j0[i] > floor && j0[i] > 0.0;
            if above_floor {
                vbar_defined[i] = true;
                vbar[i] = j1[i] / j0[i];
            }
            let jj = j0[i] * j0[i] - j1[i] * j1[i];
            if above_floor && jj > 0.0 {
                let r = jj.sqrt();
                rho0[i] = r;
                ubar_t[i] = j0[i] / r;
                ubar_x[i] = j1[i] / r;
                flow_defined[i] = true;
            }
        }
        Self {
            grid,
            time,
            j0,
            j1,
            rho0,
            ubar_t,
            ubar_x,
            vbar,
            flow_defined,
            vbar_defined,
        }
    }

    #[inline]
    pub fn j(&self, i: usize) -> SpacetimeVector {
        SpacetimeVector::new(self.j0[i], self.j1[i])
    }

    /// Flow 4-velocity at a site, if defined there.
    #[inline]
    pub fn ubar(&self, i: usize) -> Option<SpacetimeVector> {
        if self.flow_defined[i] {
            Some(SpacetimeVector::new(self.ubar_t[i], self.ubar_x[i]))
        } else {
            None
        }
    }

    pub fn max_j0(&self) -> f64 {
        self.j0.iter().fold(0.0f64, |m, &v| m.max(v))
    }

    /// Total charge, sum of j0 dx.
    pub fn total_j0(&self) -> f64 {
        self.j0.iter().sum::<f64>() * self.grid.dx()
    }
}

/// Dirac current j0 = psi^dag psi, j1 = psi^dag sigma1 psi.
pub fn dirac_current(field: &SpinorField) -> CurrentField {
    let n = field.grid.num_points();
    let mut j0 = Vec::with_capacity(n);
    let mut j1 = Vec::with_capacity(n);
    for s in &field.values {
        let d = s[0].norm_sqr() + s[1].norm_sqr();
        let f = 2.0 * (s[0].conj() * s[1]).re;
        debug_assert!(
            f.abs() <= d + 1e-12 * d.max(1.0),
            "Dirac current must satisfy |j1| <= j0"
        );
        j0.push(d);
        j1.push(f);
    }
    CurrentField::from_components(field.grid, field.time, j0, j1)
}

/// Klein-Gordon current j^a = (i/2m)(phi* d^a phi - phi d^a phi*).
///
/// The 1/(2m) normalization makes a rest plane wave carry j0 = |phi|^2,
/// matching the Dirac convention; any constant rescaling cancels in ubar.
pub fn kg_current(state: &ScalarFieldState) -> CurrentField {
    let spectral = Spectral::new(state.grid);
    let dphi_dx = spectral.derivative(&state.phi);
    let inv_m = 1.0 / state.mass;
    let n = state.grid.num_points();
    let mut j0 = Vec::with_capacity(n);
    let mut j1 = Vec::with_capacity(n);
    for i in 0..n {
        j0.push(-(state.phi[i].conj() * state.dphi_dt[i]).im * inv_m);
        j1.push((state.phi[i].conj() * dphi_dx[i]).im * inv_m);
    }
    CurrentField::from_components(state.grid, state.time, j0, j1)
}

/// rho0 = sqrt(j.j) for a timelike current.
pub fn rest_density(j: SpacetimeVector) -> Result<f64> {
    let dot = j.norm_sq();
    if dot <= 0.0 {
        return Err(Error::NonTimelike { dot });
    }
    Ok(dot.sqrt())
}

/// ubar = j / rho0, the unit timelike direction of the probability flow.
pub fn flow_velocity(j: SpacetimeVector) -> Result<SpacetimeVector> {
    j.normalize_timelike()
}
