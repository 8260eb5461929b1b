//! Minkowski vector algebra in 1+1 dimensions, signature (+, -).
//!
//! Every module builds on the two-component [`SpacetimeVector`]: 4-velocities,
//! currents and potentials all live in the same slot. Natural units
//! (hbar = c = 1) throughout.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// The fixed diagonal metric g = diag(+1, -1).
///
/// There is deliberately no way to configure the signature; a single
/// convention keeps the sign surface small.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Metric;

impl Metric {
    pub const DIAG: [f64; 2] = [1.0, -1.0];

    /// g_ab (equal to g^ab for a diagonal +/- metric).
    #[inline]
    pub fn component(self, a: usize, b: usize) -> f64 {
        if a == b {
            Self::DIAG[a]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn lower(self, v: SpacetimeVector) -> SpacetimeVector {
        SpacetimeVector::new(v.t, -v.x)
    }

    #[inline]
    pub fn raise(self, v: SpacetimeVector) -> SpacetimeVector {
        // Same map: the metric is its own inverse.
        self.lower(v)
    }
}

/// A two-component vector (t, x) in 1+1D Minkowski space.
///
/// Components are stored with upper (contravariant) index convention unless a
/// function documents otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpacetimeVector {
    pub t: f64,
    pub x: f64,
}

impl SpacetimeVector {
    #[inline]
    pub const fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    #[inline]
    pub const fn zero() -> Self {
        Self { t: 0.0, x: 0.0 }
    }

    /// Minkowski inner product a.b = a0 b0 - a1 b1.
    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.t * other.t - self.x * other.x
    }

    /// Invariant square v.v.
    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Lower the index: (v0, v1) -> (v0, -v1). Involutive with [`Self::raise`].
    #[inline]
    pub fn lower(self) -> Self {
        Metric.lower(self)
    }

    /// Raise the index; identical map to [`Self::lower`] for this metric.
    #[inline]
    pub fn raise(self) -> Self {
        Metric.raise(self)
    }

    /// Rescale a future-pointing timelike vector to unit norm, v / sqrt(v.v).
    pub fn normalize_timelike(self) -> Result<Self> {
        let dot = self.norm_sq();
        if dot <= 0.0 {
            return Err(Error::NonTimelike { dot });
        }
        if self.t <= 0.0 {
            return Err(Error::NegativeTimeOrientation { t0: self.t });
        }
        let inv = 1.0 / dot.sqrt();
        Ok(Self::new(self.t * inv, self.x * inv))
    }

    /// Apply a boost of the given rapidity.
    #[inline]
    pub fn boost(self, rapidity: f64) -> Self {
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        Self::new(ch * self.t + sh * self.x, sh * self.t + ch * self.x)
    }
}

/// Free-function spelling of [`SpacetimeVector::dot`].
#[inline]
pub fn minkowski_dot(a: SpacetimeVector, b: SpacetimeVector) -> f64 {
    a.dot(b)
}

impl Add for SpacetimeVector {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.t + rhs.t, self.x + rhs.x)
    }
}

impl Sub for SpacetimeVector {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.t - rhs.t, self.x - rhs.x)
    }
}

impl Mul<f64> for SpacetimeVector {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.t * rhs, self.x * rhs)
    }
}

impl Neg for SpacetimeVector {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.t, -self.x)
    }
}
