//! Wavefunction slices on the lattice, their time histories, and the
//! regularized particle density.
//!
//! Two backends share the same plumbing: two-component spinors for the Dirac
//! equation and complex scalars (with their time derivative) for
//! Klein-Gordon. Evolution is exact per Fourier mode; see [`dirac`] and
//! [`klein_gordon`].

pub mod dirac;
pub mod klein_gordon;
pub mod lagrangian;
pub mod source;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::LatticeGrid;

/// Two-component spinor at one site.
pub type Spinor = [C64; 2];

/// Relative time tolerance for the uniform-spacing history invariant.
const HISTORY_SPACING_TOL: f64 = 1e-12;

/// Dirac wavefunction on a time slice.
#[derive(Clone, Debug)]
pub struct SpinorField {
    pub grid: LatticeGrid,
    pub values: Vec<Spinor>,
    pub time: f64,
    pub mass: f64,
}

impl SpinorField {
    pub fn zero(grid: LatticeGrid, mass: f64) -> Self {
        Self {
            grid,
            values: vec![[C64::new(0.0, 0.0); 2]; grid.num_points()],
            time: 0.0,
            mass,
        }
    }

    /// Probability density psi^dag psi per site.
    pub fn density(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|s| s[0].norm_sqr() + s[1].norm_sqr())
            .collect()
    }

    /// Total norm, sum of psi^dag psi dx.
    pub fn norm(&self) -> f64 {
        self.density().iter().sum::<f64>() * self.grid.dx()
    }

    /// Rescale so the total norm is exactly one.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::DegenerateDensity);
        }
        let scale = 1.0 / n.sqrt();
        for s in &mut self.values {
            s[0] *= scale;
            s[1] *= scale;
        }
        Ok(())
    }

    /// Density-weighted mean position. Meaningful only while the support
    /// stays away from the periodic seam.
    pub fn centroid(&self) -> f64 {
        let density = self.density();
        let dx = self.grid.dx();
        let mass: f64 = density.iter().sum::<f64>() * dx;
        let first: f64 = density
            .iter()
            .enumerate()
            .map(|(i, &d)| self.grid.position(i) * d)
            .sum::<f64>()
            * dx;
        first / mass
    }
}

/// Klein-Gordon field on a time slice: phi and its time derivative, the
/// conjugate data needed for second-order-in-time evolution.
#[derive(Clone, Debug)]
pub struct ScalarFieldState {
    pub grid: LatticeGrid,
    pub phi: Vec<C64>,
    pub dphi_dt: Vec<C64>,
    pub time: f64,
    pub mass: f64,
}

impl ScalarFieldState {
    pub fn zero(grid: LatticeGrid, mass: f64) -> Self {
        Self {
            grid,
            phi: vec![C64::new(0.0, 0.0); grid.num_points()],
            dphi_dt: vec![C64::new(0.0, 0.0); grid.num_points()],
            time: 0.0,
            mass,
        }
    }
}

/// A field slice that can live in a [`FieldHistory`].
pub trait FieldSlice: Clone {
    fn grid(&self) -> LatticeGrid;
    fn time(&self) -> f64;
    fn with_time(self, t: f64) -> Self;
}

impl FieldSlice for SpinorField {
    fn grid(&self) -> LatticeGrid {
        self.grid
    }
    fn time(&self) -> f64 {
        self.time
    }
    fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }
}

impl FieldSlice for ScalarFieldState {
    fn grid(&self) -> LatticeGrid {
        self.grid
    }
    fn time(&self) -> f64 {
        self.time
    }
    fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }
}

/// Uniformly spaced sequence of field slices.
///
/// Append-only; spacing is pinned by the first two slices and later pushes
/// must match it. Spacetime derivatives (currents, tensors, source terms)
/// difference across these slices.
#[derive(Clone, Debug)]
pub struct FieldHistory<S: FieldSlice> {
    slices: Vec<S>,
}

impl<S: FieldSlice> FieldHistory<S> {
    pub fn new(initial: S) -> Self {
        Self {
            slices: vec![initial],
        }
    }

    pub fn push(&mut self, slice: S) -> Result<()> {
        let t_new = slice.time();
        let t_last = self.t_last();
        if t_new <= t_last {
            return Err(Error::Grid(format!(
                "history times must increase strictly: {t_new} after {t_last}"
            )));
        }
        if self.slices.len() >= 2 {
            let dt = self.dt_store();
            let scale = dt.abs().max(1.0);
            if ((t_new - t_last) - dt).abs() > HISTORY_SPACING_TOL * scale {
                return Err(Error::Grid(format!(
                    "history spacing must stay uniform: got {} expected {dt}",
                    t_new - t_last
                )));
            }
        }
        self.slices.push(slice);
        Ok(())
    }

    /// Drive a stepper for `n_steps` stored steps of size `dt_store`.
    ///
    /// Slice times are pinned to `t0 + i * dt_store` so the uniform-spacing
    /// invariant holds exactly regardless of accumulation order.
    pub fn evolve(
        initial: S,
        dt_store: f64,
        n_steps: usize,
        mut step: impl FnMut(&S, f64) -> Result<S>,
    ) -> Result<Self> {
        let t0 = initial.time();
        let mut history = Self::new(initial);
        for i in 0..n_steps {
            let next = step(history.last(), dt_store)?;
            history.push(next.with_time(t0 + (i + 1) as f64 * dt_store))?;
        }
        Ok(history)
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn slice(&self, i: usize) -> &S {
        &self.slices[i]
    }

    pub fn slices(&self) -> &[S] {
        &self.slices
    }

    pub fn last(&self) -> &S {
        self.slices.last().expect("history is never empty")
    }

    pub fn grid(&self) -> LatticeGrid {
        self.slices[0].grid()
    }

    pub fn t_first(&self) -> f64 {
        self.slices[0].time()
    }

    pub fn t_last(&self) -> f64 {
        self.last().time()
    }

    /// Stored spacing; requires at least two slices.
    pub fn dt_store(&self) -> f64 {
        assert!(self.slices.len() >= 2, "dt_store needs two slices");
        self.slices[1].time() - self.slices[0].time()
    }

    /// Locate `t` between stored slices: (lower index, fraction in [0, 1]).
    pub fn bracket(&self, t: f64) -> Result<(usize, f64)> {
        let (t0, t1) = (self.t_first(), self.t_last());
        if self.slices.len() < 2 {
            return Err(Error::InsufficientHistory { len: 1 });
        }
        let dt = self.dt_store();
        let slack = 1e-9 * dt;
        if t < t0 - slack || t > t1 + slack {
            return Err(Error::OutOfHistory {
                t,
                t_first: t0,
                t_last: t1,
            });
        }
        let s = ((t - t0) / dt).clamp(0.0, (self.slices.len() - 1) as f64);
        let mut i = s.floor() as usize;
        if i >= self.slices.len() - 1 {
            i = self.slices.len() - 2;
        }
        Ok((i, (t - t0) / dt - i as f64))
    }
}

/// The particle's smeared rest-density profile.
///
/// The point-particle matter density is replaced by a normalized Gaussian of
/// the given width, truncated at six widths and renormalized on the lattice
/// so sum(sigma) dx = 1 holds exactly. The rest density divides out the
/// Lorentz factor: sigma0 = sigma / u0.
#[derive(Clone, Copy, Debug)]
pub struct RegularizedDensity {
    center: f64,
    width: f64,
    gamma_factor: f64,
}

/// Truncation radius of the regulator, in units of its width.
pub const REGULATOR_CUTOFF_WIDTHS: f64 = 6.0;

impl RegularizedDensity {
    pub fn new(center: f64, width: f64, gamma_factor: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Grid(format!("regulator width {width} must be positive")));
        }
        if !(gamma_factor >= 1.0) {
            return Err(Error::Grid(format!(
                "gamma factor {gamma_factor} must be >= 1 (u0 of a unit timelike vector)"
            )));
        }
        Ok(Self {
            center,
            width,
            gamma_factor,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn gamma_factor(&self) -> f64 {
        self.gamma_factor
    }

    /// Lab-frame density sigma on the lattice, normalized to unit integral.
    pub fn sigma(&self, grid: LatticeGrid) -> Vec<f64> {
        let cutoff = REGULATOR_CUTOFF_WIDTHS * self.width;
        let inv_two_w2 = 1.0 / (2.0 * self.width * self.width);
        let mut values: Vec<f64> = (0..grid.num_points())
            .map(|i| {
                let d = grid.wrap_displacement(grid.position(i), self.center);
                if d.abs() <= cutoff {
                    (-d * d * inv_two_w2).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = values.iter().sum::<f64>() * grid.dx();
        let scale = 1.0 / total;
        for v in &mut values {
            *v *= scale;
        }
        values
    }

    /// Rest density sigma0 = sigma / u0.
    pub fn sigma0(&self, grid: LatticeGrid) -> Vec<f64> {
        let mut values = self.sigma(grid);
        let scale = 1.0 / self.gamma_factor;
        for v in &mut values {
            *v *= scale;
        }
        values
    }

    /// Site indices inside the truncation window (periodic, so returned as a
    /// list rather than a range).
    pub fn support(&self, grid: LatticeGrid) -> Vec<usize> {
        let cutoff = REGULATOR_CUTOFF_WIDTHS * self.width;
        (0..grid.num_points())
            .filter(|&i| grid.wrap_displacement(grid.position(i), self.center).abs() <= cutoff)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> LatticeGrid {
        LatticeGrid::new(64, 32.0).unwrap()
    }

    #[test]
    fn regulator_normalizes_exactly() {
        let g = grid();
        for width in [0.5, 1.0, 2.0] {
            let reg = RegularizedDensity::new(1.3, width, 1.0).unwrap();
            let total: f64 = reg.sigma(g).iter().sum::<f64>() * g.dx();
            assert!((total - 1.0).abs() <= 1e-10, "width {width}: total {total}");
        }
    }

    #[test]
    fn regulator_divides_out_gamma() {
        let g = grid();
        let gamma = 1.25;
        let reg = RegularizedDensity::new(0.0, 1.0, gamma).unwrap();
        let total0: f64 = reg.sigma0(g).iter().sum::<f64>() * g.dx();
        assert!((total0 - 1.0 / gamma).abs() <= 1e-10);
    }

    #[test]
    fn regulator_support_is_local_and_wraps() {
        let g = grid();
        // Center near the seam: support must wrap around the boundary.
        let reg = RegularizedDensity::new(-15.5, 0.5, 1.0).unwrap();
        let support = reg.support(g);
        assert!(!support.is_empty());
        assert!(support.len() < g.num_points() / 2);
        assert!(support.contains(&0));
        assert!(support.contains(&(g.num_points() - 1)));
    }

    #[test]
    fn history_rejects_nonuniform_spacing() {
        let g = grid();
        let f = SpinorField::zero(g, 1.0);
        let mut h = FieldHistory::new(f.clone());
        h.push(f.clone().with_time(0.5)).unwrap();
        h.push(f.clone().with_time(1.0)).unwrap();
        assert!(h.push(f.clone().with_time(1.6)).is_err());
        assert!(h.push(f.clone().with_time(0.9)).is_err());
        assert_eq!(h.len(), 3);
        assert_eq!(h.dt_store(), 0.5);
    }

    #[test]
    fn bracket_locates_times() {
        let g = grid();
        let f = SpinorField::zero(g, 1.0);
        let mut h = FieldHistory::new(f.clone());
        for i in 1..=4 {
            h.push(f.clone().with_time(i as f64 * 0.25)).unwrap();
        }
        let (i, frac) = h.bracket(0.3).unwrap();
        assert_eq!(i, 1);
        assert!((frac - 0.2).abs() < 1e-12);
        // Exactly at the end lands on the last interval.
        let (i, frac) = h.bracket(1.0).unwrap();
        assert_eq!(i, 3);
        assert!((frac - 1.0).abs() < 1e-12);
        assert!(matches!(h.bracket(1.5), Err(Error::OutOfHistory { .. })));
    }
}
