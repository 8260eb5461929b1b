//! Periodic 1D lattice and its spectral machinery.
//!
//! Sites sit at x_i = -L/2 + i dx. Fourier modes carry momenta 2 pi n / L
//! with n in [-N/2, N/2).

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic lattice: `num_points` sites (power of two, >= 8) over a box of
/// length `box_length`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeGrid {
    num_points: usize,
    box_length: f64,
}

impl LatticeGrid {
    pub fn new(num_points: usize, box_length: f64) -> Result<Self> {
        if num_points < 8 {
            return Err(Error::Grid(format!(
                "num_points = {num_points}, need at least 8"
            )));
        }
        if !num_points.is_power_of_two() {
            return Err(Error::Grid(format!(
                "num_points = {num_points} is not a power of two"
            )));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(Error::Grid(format!(
                "box_length = {box_length} must be finite and positive"
            )));
        }
        Ok(Self {
            num_points,
            box_length,
        })
    }

    #[inline]
    pub fn num_points(&self) -> usize {
        self.num_points
    }

    #[inline]
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.box_length / self.num_points as f64
    }

    /// Coordinate of site `i`.
    #[inline]
    pub fn position(&self, i: usize) -> f64 {
        -0.5 * self.box_length + i as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.position(i)).collect()
    }

    /// Momentum of FFT bin `k` (standard wrap-around ordering).
    #[inline]
    pub fn momentum(&self, k: usize) -> f64 {
        let n = if k < self.num_points / 2 {
            k as i64
        } else {
            k as i64 - self.num_points as i64
        };
        std::f64::consts::TAU * n as f64 / self.box_length
    }

    /// Nearest lattice momentum to `p`, as (mode index, momentum value).
    pub fn nearest_mode(&self, p: f64) -> (i64, f64) {
        let dk = std::f64::consts::TAU / self.box_length;
        let n = (p / dk).round() as i64;
        (n, n as f64 * dk)
    }

    /// Minimal-image displacement `a - b` on the circle, in [-L/2, L/2).
    #[inline]
    pub fn wrap_displacement(&self, a: f64, b: f64) -> f64 {
        let l = self.box_length;
        let mut d = (a - b) % l;
        if d < -0.5 * l {
            d += l;
        } else if d >= 0.5 * l {
            d -= l;
        }
        d
    }

    /// Map a coordinate to (site index, fractional offset in [0, 1)) for
    /// interpolation stencils.
    #[inline]
    pub fn cell_of(&self, x: f64) -> (usize, f64) {
        let n = self.num_points as f64;
        let mut s = (x + 0.5 * self.box_length) / self.dx();
        s = s.rem_euclid(n);
        let mut i = s.floor();
        let mut frac = s - i;
        if i >= n {
            i = 0.0;
            frac = 0.0;
        }
        (i as usize, frac)
    }
}

/// Spectrum bins below this fraction of the largest bin are treated as FFT
/// roundoff and cleared before derivative weighting.
const NOISE_FLOOR_REL: f64 = 1e-14;

/// Cached FFT plans plus the momentum table for one grid.
pub struct Spectral {
    grid: LatticeGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    momenta: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: LatticeGrid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.num_points();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            momenta: (0..n).map(|k| grid.momentum(k)).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> LatticeGrid {
        self.grid
    }

    #[inline]
    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    /// In-place unnormalized forward FFT.
    pub fn forward(&self, data: &mut [C64]) {
        self.forward.process(data);
    }

    /// In-place inverse FFT scaled by 1/N, so `inverse(forward(x)) == x`.
    pub fn inverse(&self, data: &mut [C64]) {
        self.inverse.process(data);
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Spectral spatial derivative d/dx of a complex field.
    ///
    /// The Nyquist mode is zeroed (it has no well-defined odd derivative),
    /// and bins at the FFT roundoff floor are cleared before the momentum
    /// multiplier: the fields here are band-limited, so those bins carry
    /// leakage noise that the high-k weights would otherwise amplify by two
    /// orders of magnitude.
    pub fn derivative(&self, data: &[C64]) -> Vec<C64> {
        let n = data.len();
        let mut hat: Vec<C64> = data.to_vec();
        self.forward(&mut hat);
        let floor = NOISE_FLOOR_REL * hat.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        for (k, v) in hat.iter_mut().enumerate() {
            if k == n / 2 || v.norm() < floor {
                *v = C64::new(0.0, 0.0);
            } else {
                *v *= C64::new(0.0, self.momenta[k]);
            }
        }
        self.inverse(&mut hat);
        hat
    }

    /// Spectral d/dx of a real field; returns the real part.
    pub fn derivative_real(&self, data: &[f64]) -> Vec<f64> {
        let complex: Vec<C64> = data.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.derivative(&complex).iter().map(|c| c.re).collect()
    }

    /// Spectral d^2/dx^2 of a real field, with the same noise-floor clearing
    /// as [`Self::derivative`].
    pub fn second_derivative_real(&self, data: &[f64]) -> Vec<f64> {
        let mut hat: Vec<C64> = data.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.forward(&mut hat);
        let floor = NOISE_FLOOR_REL * hat.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        for (k, v) in hat.iter_mut().enumerate() {
            if v.norm() < floor {
                *v = C64::new(0.0, 0.0);
            } else {
                let p = self.momenta[k];
                *v *= -p * p;
            }
        }
        self.inverse(&mut hat);
        hat.iter().map(|c| c.re).collect()
    }
}
