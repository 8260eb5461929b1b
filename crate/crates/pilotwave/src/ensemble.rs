//! Ensemble statistics: sample initial positions from the quantum density,
//! propagate every sample under guidance, and compare the final statistics
//! against the quantum current.
//!
//! Sampling is deterministic: each sample draws from its own counter-mode
//! RNG stream keyed by (seed, sample index), so parallel scheduling cannot
//! change results. Lost trajectories (undefined-flow encounters) are
//! counted and excluded from histograms, never silently dropped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::currents::CurrentField;
use crate::dynamics::{rk4_step, CurrentHistory};
use crate::error::{Error, Result};
use crate::grid::LatticeGrid;

/// Velocity assignment for the joint distribution rho(x, v).
///
/// The guidance reduction collapses the velocity dimension: each position
/// carries exactly one velocity, the local flow velocity. That deterministic
/// assignment is the only implementation provided (a genuine phase-space
/// model would need a positive joint distribution, and none is available),
/// but the seam keeps the statistical checks agnostic about where
/// velocities come from.
pub trait VelocitySampler {
    fn velocity_at(
        &self,
        flow: &CurrentHistory,
        t: f64,
        x: f64,
        sample_index: usize,
    ) -> Result<f64>;
}

/// The guidance assignment v = vbar(x, t); ignores the sample index because
/// the distribution is a delta in velocity.
pub struct GuidanceVelocity;

impl VelocitySampler for GuidanceVelocity {
    fn velocity_at(
        &self,
        flow: &CurrentHistory,
        t: f64,
        x: f64,
        _sample_index: usize,
    ) -> Result<f64> {
        flow.sample_velocity(t, x)
    }
}

/// Assign a velocity to every sampled position at time `t`.
pub fn assign_velocities(
    sampler: &impl VelocitySampler,
    flow: &CurrentHistory,
    t: f64,
    positions: &[f64],
) -> Result<Vec<f64>> {
    positions
        .iter()
        .enumerate()
        .map(|(i, &x)| sampler.velocity_at(flow, t, x, i))
        .collect()
}

/// Outcome of one ensemble run plus its consistency metrics.
#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub n: usize,
    pub seed: u64,
    pub initial_positions: Vec<f64>,
    /// Final position per sample; for lost samples, the last defined one.
    pub final_positions: Vec<f64>,
    /// Flow velocity at the final position (NaN for lost samples).
    pub velocities: Vec<f64>,
    pub lost: Vec<bool>,
    pub lost_count: usize,
    pub bins: usize,
    /// Total-variation distance to the final quantum density; NaN until
    /// [`density_check`] runs.
    pub tv_distance: f64,
    /// Max binwise defect of rho(x)*mean-v against j1; NaN until [`current_check`]
    /// runs.
    pub current_match_error: f64,
    /// The same defect in units of the per-bin sampling noise.
    pub current_match_noise_units: f64,
}

/// Draw `n` positions from the piecewise-linear density given by per-site
/// values of j0. Deterministic in (seed, sample index).
pub fn sample_initial_positions(
    j0: &[f64],
    grid: LatticeGrid,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let sites = grid.num_points();
    assert_eq!(j0.len(), sites);
    let dx = grid.dx();
    // Segment masses of the piecewise-linear density (periodic closure).
    // Negative excursions (possible for Klein-Gordon backflow) carry no
    // probability weight.
    let value = |i: usize| j0[i % sites].max(0.0);
    let mut cumulative = Vec::with_capacity(sites + 1);
    cumulative.push(0.0);
    for i in 0..sites {
        let mass = 0.5 * (value(i) + value(i + 1)) * dx;
        cumulative.push(cumulative[i] + mass);
    }
    let total = *cumulative.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::DegenerateDensity);
    }

    let positions = (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let target = rng.gen::<f64>() * total;
            // Locate the segment that brackets the target mass.
            let seg = match cumulative
                .binary_search_by(|c| c.partial_cmp(&target).unwrap())
            {
                Ok(k) => k.min(sites - 1),
                Err(k) => k.saturating_sub(1).min(sites - 1),
            };
            let rest = target - cumulative[seg];
            let f0 = value(seg);
            let f1 = value(seg + 1);
            // Invert the quadratic mass profile within the segment.
            let a = 0.5 * (f1 - f0) * dx;
            let b = f0 * dx;
            let s = if a.abs() < 1e-300 * b.abs().max(1.0) {
                if b > 0.0 {
                    rest / b
                } else {
                    0.5
                }
            } else {
                let disc = (b * b + 4.0 * a * rest).max(0.0);
                (-b + disc.sqrt()) / (2.0 * a)
            };
            grid.position(seg) + s.clamp(0.0, 1.0) * dx
        })
        .collect();
    Ok(positions)
}

/// Propagate every sample under guidance from the first stored time to
/// `t_final`, recording final positions and velocities.
pub fn propagate_ensemble(
    positions: &[f64],
    flow: &CurrentHistory,
    t_final: f64,
    dt: f64,
    seed: u64,
    bins: usize,
) -> Result<EnsembleResult> {
    let t0 = flow.t_first();
    if t_final > flow.t_last() + 1e-9 * flow.dt_store() {
        return Err(Error::OutOfHistory {
            t: t_final,
            t_first: t0,
            t_last: flow.t_last(),
        });
    }
    let n_steps = if t_final > t0 {
        ((t_final - t0) / dt).round().max(1.0) as usize
    } else {
        0
    };
    let h = if n_steps > 0 {
        (t_final - t0) / n_steps as f64
    } else {
        0.0
    };

    let outcomes: Vec<(f64, f64, bool)> = positions
        .par_iter()
        .map(|&x0| {
            let mut x = x0;
            let mut t = t0;
            for _ in 0..n_steps {
                let mut deriv = |tt: f64, y: [f64; 1]| -> Result<[f64; 1]> {
                    Ok([flow.sample_velocity(tt, y[0])?])
                };
                match rk4_step([x], t, h, &mut deriv) {
                    Ok(y) => {
                        x = y[0];
                        t += h;
                    }
                    Err(_) => return (x, f64::NAN, true),
                }
            }
            match flow.sample_velocity(t_final, x) {
                Ok(v) => (x, v, false),
                Err(_) => (x, f64::NAN, true),
            }
        })
        .collect();

    let lost: Vec<bool> = outcomes.iter().map(|o| o.2).collect();
    let lost_count = lost.iter().filter(|&&l| l).count();
    Ok(EnsembleResult {
        n: positions.len(),
        seed,
        initial_positions: positions.to_vec(),
        final_positions: outcomes.iter().map(|o| o.0).collect(),
        velocities: outcomes.iter().map(|o| o.1).collect(),
        lost,
        lost_count,
        bins,
        tv_distance: f64::NAN,
        current_match_error: f64::NAN,
        current_match_noise_units: f64::NAN,
    })
}

/// Bin index for a position, wrapping into the box.
fn bin_of(grid: LatticeGrid, bins: usize, x: f64) -> usize {
    let l = grid.box_length();
    let rel = (x + 0.5 * l).rem_euclid(l) / l;
    ((rel * bins as f64) as usize).min(bins - 1)
}

/// Lattice-aligned bin masses of a per-site density, normalized to one.
///
/// Each bin integrates the same piecewise-linear profile the sampler draws
/// from (trapezoid over its segments); a plain per-site sum would sit half a
/// site off the sampled distribution.
fn binned_density(values: &[f64], grid: LatticeGrid, bins: usize) -> Vec<f64> {
    let sites = grid.num_points();
    assert!(sites.is_multiple_of(bins), "bins must divide the lattice");
    let per = sites / bins;
    let value = |i: usize| values[i % sites].max(0.0);
    let mut out = vec![0.0; bins];
    for b in 0..bins {
        let mut mass = 0.0;
        for i in b * per..(b + 1) * per {
            mass += 0.5 * (value(i) + value(i + 1));
        }
        out[b] = mass;
    }
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        for v in &mut out {
            *v /= total;
        }
    }
    out
}

/// Total-variation distance between the surviving-sample histogram and the
/// normalized quantum density at the final time. Stores and returns it.
pub fn density_check(result: &mut EnsembleResult, j0_final: &[f64], grid: LatticeGrid) -> f64 {
    let bins = result.bins;
    let q = binned_density(j0_final, grid, bins);
    let mut p = vec![0.0f64; bins];
    let mut kept = 0usize;
    for (i, &x) in result.final_positions.iter().enumerate() {
        if result.lost[i] {
            continue;
        }
        p[bin_of(grid, bins, x)] += 1.0;
        kept += 1;
    }
    if kept > 0 {
        for v in &mut p {
            *v /= kept as f64;
        }
    }
    let tv = 0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
    result.tv_distance = tv;
    tv
}

/// Minimum expected sample count for a bin to enter the current check; the
/// max-over-bins statistic is only meaningful where the noise estimate is.
pub const WELL_POPULATED_MIN_EXPECTED: f64 = 250.0;

/// Compare the binned rho(x)*mean-v estimate against the normalized quantum
/// j1 at the final
/// time. Stores and returns the max binwise defect over well-populated bins;
/// also records the defect in units of the per-bin sampling noise.
pub fn current_check(
    result: &mut EnsembleResult,
    current_final: &CurrentField,
    grid: LatticeGrid,
) -> f64 {
    let bins = result.bins;
    let sites = grid.num_points();
    assert!(sites.is_multiple_of(bins), "bins must divide the lattice");
    let per = sites / bins;

    // Normalized target: per-bin integral of j1 over the integral of j0,
    // both with the trapezoid convention matching the sampler.
    let j0_of = |i: usize| current_final.j0[i % sites].max(0.0);
    let j1_of = |i: usize| current_final.j1[i % sites];
    let total_j0: f64 = (0..sites).map(|i| 0.5 * (j0_of(i) + j0_of(i + 1))).sum();
    let mut target = vec![0.0f64; bins];
    let mut q = vec![0.0f64; bins];
    for b in 0..bins {
        for i in b * per..(b + 1) * per {
            target[b] += 0.5 * (j1_of(i) + j1_of(i + 1)) / total_j0;
            q[b] += 0.5 * (j0_of(i) + j0_of(i + 1)) / total_j0;
        }
    }

    let kept: Vec<(usize, f64)> = result
        .final_positions
        .iter()
        .zip(&result.velocities)
        .zip(&result.lost)
        .filter(|(_, &l)| !l)
        .map(|((x, v), _)| (bin_of(grid, bins, *x), *v))
        .collect();
    let n_kept = kept.len().max(1) as f64;

    // Estimator sum(v_i 1_bin)/N and its empirical standard error.
    let mut sum_v = vec![0.0f64; bins];
    let mut sum_v2 = vec![0.0f64; bins];
    for &(b, v) in &kept {
        sum_v[b] += v;
        sum_v2[b] += v * v;
    }

    let mut max_err = 0.0f64;
    let mut max_noise_units = 0.0f64;
    for b in 0..bins {
        if q[b] * n_kept < WELL_POPULATED_MIN_EXPECTED {
            continue;
        }
        let estimate = sum_v[b] / n_kept;
        let err = (estimate - target[b]).abs();
        let variance = (sum_v2[b] / n_kept - estimate * estimate).max(0.0);
        let sigma = (variance / n_kept).sqrt().max(1e-300);
        max_err = max_err.max(err);
        max_noise_units = max_noise_units.max(err / sigma);
    }
    result.current_match_error = max_err;
    result.current_match_noise_units = max_noise_units;
    max_err
}

/// 1D no-crossing check: sorted initial order must be preserved at the end
/// (lost samples excluded). Returns the number of order violations.
pub fn crossing_violations(result: &EnsembleResult) -> usize {
    let mut pairs: Vec<(f64, f64)> = result
        .initial_positions
        .iter()
        .zip(&result.final_positions)
        .zip(&result.lost)
        .filter(|(_, &l)| !l)
        .map(|((a, b), _)| (*a, *b))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs
        .windows(2)
        .filter(|w| w[1].1 < w[0].1 - 1e-9)
        .count()
}
