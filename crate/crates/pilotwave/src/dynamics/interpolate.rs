//! Current data interpolated off the lattice for particle-side use.
//!
//! A [`CurrentHistory`] precomputes, per stored slice, the current components
//! and their spacetime gradients (spectral in space, centered differences in
//! time). Off-lattice samples use quintic Hermite interpolation in space
//! built from the spectral first and second derivative tables, and linear
//! interpolation in time. The reported spatial gradient is the analytic
//! derivative of the value interpolant, so the equation-of-motion identity
//! is not polluted by an interpolation mismatch. Flow quantities (rho0,
//! ubar, vbar, grad rho0) are derived pointwise from the interpolated
//! current, so ubar = j / sqrt(j.j) holds exactly at the sampled point.
//!
//! The coupling constant k rescales j and rho0 in everything particle-facing;
//! it cancels in ubar and vbar by construction.

use crate::currents::{dirac_current, kg_current, CurrentField};
use crate::error::{Error, Result};
use crate::fields::{FieldHistory, ScalarFieldState, SpinorField};
use crate::geometry::SpacetimeVector;
use crate::grid::{LatticeGrid, Spectral};

/// rho0 below this fraction of the slice maximum makes the general equation
/// of motion singular; steps abort rather than divide.
pub const REST_DENSITY_FLOOR_REL: f64 = 1e-10;

/// Value plus spectral first/second spatial derivatives of one lattice field.
struct HermiteTable {
    value: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl HermiteTable {
    fn build(spectral: &Spectral, value: Vec<f64>) -> Self {
        Self {
            d1: spectral.derivative_real(&value),
            d2: spectral.second_derivative_real(&value),
            value,
        }
    }

    /// Quintic Hermite evaluation between sites `i` and `i+1` at fraction
    /// `s`; returns (value, d/dx).
    fn eval(&self, i: usize, ip1: usize, s: f64, dx: f64) -> (f64, f64) {
        let (f0, f1) = (self.value[i], self.value[ip1]);
        let (d0, d1) = (self.d1[i] * dx, self.d1[ip1] * dx);
        let (c0, c1) = (self.d2[i] * dx * dx, self.d2[ip1] * dx * dx);

        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;

        let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h20 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h21 = 0.5 * (s3 - 2.0 * s4 + s5);

        let value = f0 * h00 + d0 * h10 + c0 * h20 + f1 * h01 + d1 * h11 + c1 * h21;

        let g00 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
        let g10 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
        let g20 = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4);
        let g01 = -g00;
        let g11 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
        let g21 = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);

        let deriv =
            (f0 * g00 + d0 * g10 + c0 * g20 + f1 * g01 + d1 * g11 + c1 * g21) / dx;
        (value, deriv)
    }
}

struct SliceTable {
    j0: HermiteTable,
    j1: HermiteTable,
    dt_j0: HermiteTable,
    dt_j1: HermiteTable,
    defined: Vec<bool>,
}

/// Interpolation-ready current history.
pub struct CurrentHistory {
    grid: LatticeGrid,
    t0: f64,
    dt: f64,
    tables: Vec<SliceTable>,
    max_j0: f64,
    max_rho0: f64,
    coupling: f64,
}

/// Everything the particle equations need at one spacetime point.
///
/// All current-derived quantities carry the coupling factor k; `ubar` and
/// `vbar` are k-independent.
#[derive(Clone, Copy, Debug)]
pub struct FlowSample {
    /// Current j^a (upper components), scaled by k.
    pub j: SpacetimeVector,
    /// `grad_j[a][b]` = d_a j^b (coordinate derivative, upper b), scaled by k.
    pub grad_j: [[f64; 2]; 2],
    /// sqrt(j.j) if timelike, NaN otherwise.
    pub rho0: f64,
    /// Unit flow velocity if timelike here.
    pub ubar: Option<SpacetimeVector>,
    /// j1 / j0.
    pub vbar: f64,
    /// Covariant (d_t rho0, d_x rho0); NaN components where rho0 is.
    pub grad_rho0: SpacetimeVector,
    /// Absolute rho0 floor below which the equation of motion is singular.
    pub rho0_floor: f64,
}

impl CurrentHistory {
    pub fn from_dirac(history: &FieldHistory<SpinorField>) -> Result<Self> {
        let currents: Vec<CurrentField> = history.slices().iter().map(dirac_current).collect();
        Self::build(history.grid(), history.t_first(), history.dt_store(), currents)
    }

    pub fn from_scalar(history: &FieldHistory<ScalarFieldState>) -> Result<Self> {
        let currents: Vec<CurrentField> = history.slices().iter().map(kg_current).collect();
        Self::build(history.grid(), history.t_first(), history.dt_store(), currents)
    }

    /// Rescale particle-facing currents by the coupling constant.
    pub fn with_coupling(mut self, k: f64) -> Self {
        self.coupling = k;
        self
    }

    fn build(
        grid: LatticeGrid,
        t0: f64,
        dt: f64,
        currents: Vec<CurrentField>,
    ) -> Result<Self> {
        if currents.len() < 2 {
            return Err(Error::InsufficientHistory {
                len: currents.len(),
            });
        }
        let spectral = Spectral::new(grid);
        let n = currents.len();
        let mut tables = Vec::with_capacity(n);
        let mut max_j0 = 0.0f64;
        let mut max_rho0 = 0.0f64;
        for (i, c) in currents.iter().enumerate() {
            max_j0 = max_j0.max(c.max_j0());
            for site in 0..grid.num_points() {
                if c.flow_defined[site] {
                    max_rho0 = max_rho0.max(c.rho0[site]);
                }
            }
            // Centered time differences, second-order one-sided at the ends.
            let time_deriv = |get: &dyn Fn(&CurrentField) -> &Vec<f64>| -> Vec<f64> {
                let v = |k: usize| get(&currents[k]);
                (0..grid.num_points())
                    .map(|s| {
                        if i > 0 && i + 1 < n {
                            (v(i + 1)[s] - v(i - 1)[s]) / (2.0 * dt)
                        } else if n >= 3 && i == 0 {
                            (-3.0 * v(0)[s] + 4.0 * v(1)[s] - v(2)[s]) / (2.0 * dt)
                        } else if n >= 3 {
                            (3.0 * v(i)[s] - 4.0 * v(i - 1)[s] + v(i - 2)[s]) / (2.0 * dt)
                        } else {
                            (v(1)[s] - v(0)[s]) / dt
                        }
                    })
                    .collect()
            };
            tables.push(SliceTable {
                dt_j0: HermiteTable::build(&spectral, time_deriv(&|c| &c.j0)),
                dt_j1: HermiteTable::build(&spectral, time_deriv(&|c| &c.j1)),
                j0: HermiteTable::build(&spectral, c.j0.clone()),
                j1: HermiteTable::build(&spectral, c.j1.clone()),
                defined: c.flow_defined.clone(),
            });
        }
        Ok(Self {
            grid,
            t0,
            dt,
            tables,
            max_j0,
            max_rho0,
            coupling: 1.0,
        })
    }

    pub fn grid(&self) -> LatticeGrid {
        self.grid
    }

    pub fn t_first(&self) -> f64 {
        self.t0
    }

    pub fn t_last(&self) -> f64 {
        self.t0 + self.dt * (self.tables.len() - 1) as f64
    }

    pub fn dt_store(&self) -> f64 {
        self.dt
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Locate (slice index, time fraction, left cell, cell fraction) and
    /// check the stencil's defined flags.
    #[inline]
    fn locate(&self, t: f64, x: f64) -> Result<(usize, f64, usize, usize, f64)> {
        let slack = 1e-9 * self.dt;
        if t < self.t0 - slack || t > self.t_last() + slack {
            return Err(Error::OutOfHistory {
                t,
                t_first: self.t0,
                t_last: self.t_last(),
            });
        }
        let rel = ((t - self.t0) / self.dt).clamp(0.0, (self.tables.len() - 1) as f64);
        let mut it = rel.floor() as usize;
        if it >= self.tables.len() - 1 {
            it = self.tables.len() - 2;
        }
        let a = rel - it as f64;
        let n = self.grid.num_points();
        let (cell, s) = self.grid.cell_of(x);
        let cell_r = (cell + 1) % n;
        for tab in [&self.tables[it], &self.tables[it + 1]] {
            if !tab.defined[cell] || !tab.defined[cell_r] {
                return Err(Error::UndefinedFlow { t, x });
            }
        }
        Ok((it, a, cell, cell_r, s))
    }

    /// Fast path for trajectory ensembles: just the flow 3-velocity
    /// vbar = j1/j0 at (t, x), with the same domain checks as [`Self::sample`].
    pub fn sample_velocity(&self, t: f64, x: f64) -> Result<f64> {
        let (it, a, cell, cell_r, s) = self.locate(t, x)?;
        let dx = self.grid.dx();
        let pair = |get: fn(&SliceTable) -> &HermiteTable| -> f64 {
            let (v0, _) = get(&self.tables[it]).eval(cell, cell_r, s, dx);
            let (v1, _) = get(&self.tables[it + 1]).eval(cell, cell_r, s, dx);
            (1.0 - a) * v0 + a * v1
        };
        let j0 = pair(|t| &t.j0);
        let j1 = pair(|t| &t.j1);
        if !(j0 > crate::currents::DENSITY_FLOOR_REL * self.max_j0) {
            return Err(Error::UndefinedFlow { t, x });
        }
        Ok(j1 / j0)
    }

    /// Interpolate the current and its gradients at (t, x).
    ///
    /// Errors: [`Error::OutOfHistory`] past the stored window,
    /// [`Error::UndefinedFlow`] if the interpolation stencil touches a
    /// flagged site or the interpolated density sits below the floor.
    pub fn sample(&self, t: f64, x: f64) -> Result<FlowSample> {
        let (it, a, cell, cell_r, s) = self.locate(t, x)?;
        let dx = self.grid.dx();
        let interp = |get: &dyn Fn(&SliceTable) -> &HermiteTable| -> (f64, f64) {
            let (v0, g0) = get(&self.tables[it]).eval(cell, cell_r, s, dx);
            let (v1, g1) = get(&self.tables[it + 1]).eval(cell, cell_r, s, dx);
            ((1.0 - a) * v0 + a * v1, (1.0 - a) * g0 + a * g1)
        };

        let k = self.coupling;
        let (j0, dx_j0) = interp(&|t| &t.j0);
        let (j1, dx_j1) = interp(&|t| &t.j1);
        let (dt_j0, _) = interp(&|t| &t.dt_j0);
        let (dt_j1, _) = interp(&|t| &t.dt_j1);
        let (j0, j1) = (k * j0, k * j1);
        let (dx_j0, dx_j1) = (k * dx_j0, k * dx_j1);
        let (dt_j0, dt_j1) = (k * dt_j0, k * dt_j1);

        if !(j0 > k * crate::currents::DENSITY_FLOOR_REL * self.max_j0) {
            return Err(Error::UndefinedFlow { t, x });
        }

        let j = SpacetimeVector::new(j0, j1);
        let jj = j0 * j0 - j1 * j1;
        let (rho0, ubar, grad_rho0) = if jj > 0.0 {
            let r = jj.sqrt();
            let grad = SpacetimeVector::new(
                (j0 * dt_j0 - j1 * dt_j1) / r,
                (j0 * dx_j0 - j1 * dx_j1) / r,
            );
            (r, Some(SpacetimeVector::new(j0 / r, j1 / r)), grad)
        } else {
            (f64::NAN, None, SpacetimeVector::new(f64::NAN, f64::NAN))
        };

        Ok(FlowSample {
            j,
            grad_j: [[dt_j0, dt_j1], [dx_j0, dx_j1]],
            rho0,
            ubar,
            vbar: j1 / j0,
            grad_rho0,
            rho0_floor: k * REST_DENSITY_FLOOR_REL * self.max_rho0,
        })
    }
}
