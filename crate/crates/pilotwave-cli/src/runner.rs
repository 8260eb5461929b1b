//! The five run modes: evolve, trajectory, ensemble, conserve, classical.
//!
//! Every run is one orchestration pass: build the field, evolve, derive the
//! requested diagnostics, and hand the output bytes to the manifest writer.
//! Runs are deterministic in (config bytes, seed).

use std::path::Path;

use serde::Serialize;

use pilotwave::currents::{dirac_current, kg_current, CurrentField};
use pilotwave::dynamics::classical::{
    hyperbolic_motion, integrate_classical, EmBackground, ScalarBackground,
};
use pilotwave::dynamics::general_eom::{eom_residual, general_eom_step, velocity_stationarity};
use pilotwave::dynamics::guidance::{guidance_step, integrate_guidance, particle_on_flow};
use pilotwave::dynamics::{CurrentHistory, ParticleState, Worldline};
use pilotwave::ensemble::{
    crossing_violations, current_check, density_check, propagate_ensemble,
    sample_initial_positions,
};
use pilotwave::fields::dirac::{packet_superposition, plane_wave, DiracEvolver, PacketSpec};
use pilotwave::fields::klein_gordon::{
    kg_packet_superposition, kg_plane_wave, KleinGordonEvolver,
};
use pilotwave::fields::{FieldHistory, FieldSlice, RegularizedDensity, ScalarFieldState, SpinorField};
use pilotwave::geometry::SpacetimeVector;
use pilotwave::grid::LatticeGrid;
use pilotwave::stress_energy::{
    dirac_field_tensor, dirac_interaction_tensor, divergence, kg_field_tensor,
    kg_interaction_tensor, particle_tensor, total_momentum, total_tensor, StressEnergyField,
};
use pilotwave::{io as pio, Error};

use crate::config::{ClassicalKind, ParticleMode, ScenarioConfig, WaveEquation};
use crate::manifest::write_run;
use crate::CliError;

/// Output sink: (file name, bytes) pairs written at the end of a run.
type Files = Vec<(String, Vec<u8>)>;

pub struct RunOptions<'a> {
    pub out_dir: &'a Path,
    pub seed_override: Option<u64>,
    pub quiet: bool,
}

/// Field history for either backend.
pub enum BackendHistory {
    Dirac(FieldHistory<SpinorField>),
    Scalar(FieldHistory<ScalarFieldState>),
}

impl BackendHistory {
    pub fn current_history(&self, coupling: f64) -> Result<CurrentHistory, Error> {
        let flow = match self {
            Self::Dirac(h) => CurrentHistory::from_dirac(h)?,
            Self::Scalar(h) => CurrentHistory::from_scalar(h)?,
        };
        Ok(flow.with_coupling(coupling))
    }

    pub fn current_at(&self, index: usize) -> CurrentField {
        match self {
            Self::Dirac(h) => dirac_current(h.slice(index)),
            Self::Scalar(h) => kg_current(h.slice(index)),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Dirac(h) => h.len(),
            Self::Scalar(h) => h.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn grid(&self) -> LatticeGrid {
        match self {
            Self::Dirac(h) => h.grid(),
            Self::Scalar(h) => h.grid(),
        }
    }

    fn field_csv(&self, index: usize) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Self::Dirac(h) => pio::write_spinor_field_csv(&mut out, h.slice(index)),
            Self::Scalar(h) => pio::write_scalar_field_csv(&mut out, h.slice(index)),
        }
        .expect("writing to memory cannot fail");
        out
    }

    fn history_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Self::Dirac(h) => pio::write_spinor_history(&mut out, h),
            Self::Scalar(h) => pio::write_scalar_history(&mut out, h),
        }
        .expect("writing to memory cannot fail");
        out
    }
}

/// Setup-stage failures are config problems; mid-run failures are numerical.
fn setup_err(e: Error) -> CliError {
    match e {
        Error::Grid(_)
        | Error::IncommensurateMomentum { .. }
        | Error::UnderresolvedPacket { .. }
        | Error::InsufficientHistory { .. } => CliError::Config(vec![e.to_string()]),
        other => CliError::Numerical(other),
    }
}

fn run_err(e: Error) -> CliError {
    CliError::Numerical(e)
}

fn build_grid(config: &ScenarioConfig) -> Result<LatticeGrid, CliError> {
    LatticeGrid::new(config.grid.num_points, config.grid.box_length).map_err(setup_err)
}

fn build_dirac_initial(config: &ScenarioConfig, grid: LatticeGrid) -> Result<SpinorField, CliError> {
    if let Some(pw) = &config.initial_state.plane_wave {
        plane_wave(grid, config.mass, pw.momentum).map_err(setup_err)
    } else {
        let packets: Vec<PacketSpec> = config
            .initial_state
            .packets
            .as_ref()
            .expect("validated")
            .iter()
            .map(|&p| p.into())
            .collect();
        packet_superposition(grid, config.mass, &packets).map_err(setup_err)
    }
}

fn build_scalar_initial(
    config: &ScenarioConfig,
    grid: LatticeGrid,
) -> Result<ScalarFieldState, CliError> {
    if let Some(pw) = &config.initial_state.plane_wave {
        kg_plane_wave(grid, config.mass, pw.momentum).map_err(setup_err)
    } else {
        let packets: Vec<PacketSpec> = config
            .initial_state
            .packets
            .as_ref()
            .expect("validated")
            .iter()
            .map(|&p| p.into())
            .collect();
        kg_packet_superposition(grid, config.mass, &packets).map_err(setup_err)
    }
}

/// Free evolution of the configured initial state over the stored window.
pub fn evolve_free(config: &ScenarioConfig) -> Result<BackendHistory, CliError> {
    let grid = build_grid(config)?;
    let dt = config.evolution.dt_store;
    let steps = config.stored_steps();
    match config.wave_equation {
        WaveEquation::Dirac => {
            let initial = build_dirac_initial(config, grid)?;
            let ev = DiracEvolver::new(grid, config.mass);
            let history = FieldHistory::evolve(initial, dt, steps, |f, h| Ok(ev.step_free(f, h)))
                .map_err(setup_err)?;
            Ok(BackendHistory::Dirac(history))
        }
        WaveEquation::KleinGordon => {
            let initial = build_scalar_initial(config, grid)?;
            let ev = KleinGordonEvolver::new(grid, config.mass);
            let history = FieldHistory::evolve(initial, dt, steps, |s, h| Ok(ev.step(s, h)))
                .map_err(setup_err)?;
            Ok(BackendHistory::Scalar(history))
        }
    }
}

/// Co-evolve a sourced Dirac field with a guided particle: the field steps
/// with the particle frozen across each stored interval, then the particle
/// rides the freshly stored current bracket.
fn evolve_sourced_with_guidance(
    config: &ScenarioConfig,
) -> Result<(BackendHistory, Worldline), CliError> {
    let grid = build_grid(config)?;
    let pcfg = config.particle.as_ref().expect("validated");
    let dt = config.evolution.dt_store;
    let steps = config.stored_steps();
    let width = config.sigma_width();
    let k = config.coupling_k;
    let ev = DiracEvolver::new(grid, config.mass);
    let initial = build_dirac_initial(config, grid)?;
    let t0 = initial.time;

    // Pin the particle to the flow of the initial slice.
    let bootstrap = {
        let mut h = FieldHistory::new(initial.clone());
        h.push(ev.step_free(&initial, dt).with_time(t0 + dt))
            .map_err(setup_err)?;
        CurrentHistory::from_dirac(&h).map_err(setup_err)?.with_coupling(k)
    };
    let mut particle =
        particle_on_flow(&bootstrap, t0, pcfg.initial_x, config.mass).map_err(run_err)?;

    let substeps = (dt / pcfg.step).round().max(1.0) as usize;
    let h_sub = dt / substeps as f64;

    let mut worldline = Worldline::new(pilotwave::dynamics::IntegratorMethod::Guidance, h_sub);
    worldline.record(&particle);
    let mut history = FieldHistory::new(initial);
    for i in 0..steps {
        let next = ev
            .step_sourced(history.last(), dt, particle.position, particle.u, width, k)
            .map_err(run_err)?;
        history
            .push(next.with_time(t0 + (i + 1) as f64 * dt))
            .map_err(setup_err)?;

        // Guidance across the new bracket.
        let mut window = FieldHistory::new(history.slice(i).clone());
        window.push(history.slice(i + 1).clone()).map_err(setup_err)?;
        let flow = CurrentHistory::from_dirac(&window)
            .map_err(setup_err)?
            .with_coupling(k);
        for _ in 0..substeps {
            particle = guidance_step(&particle, &flow, h_sub).map_err(run_err)?;
            worldline.record(&particle);
        }
    }
    Ok((BackendHistory::Dirac(history), worldline))
}

fn gnuplot_script(files: &[&str]) -> Vec<u8> {
    let mut text = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    for f in files {
        text.push_str(&format!("plot '{f}' using 1:2 with lines\npause -1\n"));
    }
    text.into_bytes()
}

/// evolve: store the field history and export the final slice and current.
pub fn run_evolve(config: &ScenarioConfig, opts: &RunOptions) -> Result<(), CliError> {
    let history = evolve_free(config)?;
    let last = history.len() - 1;
    let mut files: Files = Vec::new();
    if config.outputs.field_csv {
        files.push(("field.csv".into(), history.field_csv(last)));
    }
    if config.outputs.current_csv {
        let mut out = Vec::new();
        pio::write_current_csv(&mut out, &history.current_at(last)).expect("memory write");
        files.push(("current.csv".into(), out));
    }
    if config.outputs.history_binary {
        files.push(("history.bin".into(), history.history_binary()));
    }
    if config.outputs.gnuplot {
        files.push(("plot.gp".into(), gnuplot_script(&["current.csv"])));
    }
    write_run(opts.out_dir, "evolve", None, config, &files, opts.quiet)
}

#[derive(Serialize)]
struct TrajectoryReport {
    mode: &'static str,
    samples: usize,
    max_u_normalization_defect: f64,
    /// Largest action-gradient norm along the worldline; ~0 in guidance mode.
    max_stationarity_gradient: f64,
    /// Largest equation-of-motion residual (needs at least 3 samples).
    #[serde(skip_serializing_if = "Option::is_none")]
    max_eom_residual: Option<f64>,
    final_t: f64,
    final_x: f64,
    final_tau: f64,
}

/// trajectory: integrate one worldline and report its diagnostics.
pub fn run_trajectory(config: &ScenarioConfig, opts: &RunOptions) -> Result<(), CliError> {
    let pcfg = config
        .particle
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["particle: section required for trajectory".into()]))?;
    if pcfg.mode == ParticleMode::None {
        return Err(CliError::Config(vec![
            "particle.mode: must be guidance or general_eom for trajectory".into(),
        ]));
    }

    let (history, worldline) = if pcfg.source_feedback {
        evolve_sourced_with_guidance(config)?
    } else {
        let history = evolve_free(config)?;
        let flow = history.current_history(config.coupling_k).map_err(setup_err)?;
        let worldline = match pcfg.mode {
            ParticleMode::Guidance => {
                let n = (config.evolution.t_final / pcfg.step).round().max(1.0) as usize;
                let dt = config.evolution.t_final / n as f64;
                integrate_guidance(&flow, pcfg.initial_x, 0.0, dt, n, config.mass)
                    .map_err(run_err)?
            }
            ParticleMode::GeneralEom => {
                let u0 = match pcfg.initial_u {
                    Some([u0, u1]) => SpacetimeVector::new(u0, u1)
                        .normalize_timelike()
                        .map_err(run_err)?,
                    None => {
                        let s = flow.sample(0.0, pcfg.initial_x).map_err(run_err)?;
                        s.ubar.ok_or(Error::UndefinedFlow {
                            t: 0.0,
                            x: pcfg.initial_x,
                        })
                        .map_err(run_err)?
                    }
                };
                let start = ParticleState::new(pcfg.initial_x, 0.0, u0, config.mass);
                integrate_eom_until(&flow, start, pcfg.step, config.evolution.t_final)?
            }
            ParticleMode::None => unreachable!(),
        };
        (history, worldline)
    };

    // Diagnostics along the recorded worldline.
    let flow = history.current_history(config.coupling_k).map_err(setup_err)?;
    let mut max_defect = 0.0f64;
    let mut max_grad = 0.0f64;
    for s in &worldline.samples {
        max_defect = max_defect.max((s.u.norm_sq() - 1.0).abs());
        let f = flow.sample(s.t, s.x).map_err(run_err)?;
        if f.rho0.is_finite() {
            let g = velocity_stationarity(s.u, f.rho0, f.j).map_err(run_err)?;
            max_grad = max_grad.max((g.t * g.t + g.x * g.x).sqrt());
        }
    }
    let residuals = if worldline.samples.len() >= 3 {
        Some(eom_residual(&worldline, &flow).map_err(run_err)?)
    } else {
        None
    };
    let max_residual = residuals
        .as_ref()
        .map(|r| r.iter().fold(0.0f64, |m, &v| m.max(v)));

    let last = worldline.samples.last().expect("worldline has samples");
    let report = TrajectoryReport {
        mode: worldline.method.as_str(),
        samples: worldline.samples.len(),
        max_u_normalization_defect: max_defect,
        max_stationarity_gradient: max_grad,
        max_eom_residual: max_residual,
        final_t: last.t,
        final_x: last.x,
        final_tau: last.tau,
    };

    let mut files: Files = Vec::new();
    let mut csv = Vec::new();
    pio::write_worldline_csv(&mut csv, &worldline, residuals.as_deref()).expect("memory write");
    files.push(("worldline.csv".into(), csv));
    files.push((
        "trajectory_report.json".into(),
        to_json_bytes(&report)?,
    ));
    if config.outputs.field_csv {
        files.push(("field.csv".into(), history.field_csv(history.len() - 1)));
    }
    write_run(opts.out_dir, "trajectory", None, config, &files, opts.quiet)
}

/// Advance the general equation of motion in proper time until the next step
/// would leave the stored window.
fn integrate_eom_until(
    flow: &CurrentHistory,
    start: ParticleState,
    dtau: f64,
    t_final: f64,
) -> Result<Worldline, CliError> {
    let mut worldline = Worldline::new(pilotwave::dynamics::IntegratorMethod::GeneralEom, dtau);
    let mut state = start;
    worldline.record(&state);
    loop {
        // Conservative look-ahead: u0 grows slowly along smooth flows.
        if state.t + dtau * state.u.t * 1.05 > t_final {
            break;
        }
        state = general_eom_step(&state, flow, dtau).map_err(run_err)?;
        worldline.record(&state);
    }
    Ok(worldline)
}

#[derive(Serialize)]
struct EnsembleReport {
    n: usize,
    seed: u64,
    bins: usize,
    step: f64,
    t_final: f64,
    tv_distance: f64,
    current_match_error: f64,
    current_match_noise_units: f64,
    lost_count: usize,
    lost_fraction: f64,
    crossing_violations: usize,
}

/// ensemble: draw from j0, propagate under guidance, compare statistics.
pub fn run_ensemble(config: &ScenarioConfig, opts: &RunOptions) -> Result<(), CliError> {
    let ecfg = config
        .ensemble
        .ok_or_else(|| CliError::Config(vec!["ensemble: section required for ensemble".into()]))?;
    let seed = opts.seed_override.unwrap_or(ecfg.seed);
    let history = evolve_free(config)?;
    let grid = history.grid();
    let flow = history.current_history(config.coupling_k).map_err(setup_err)?;

    let j0_initial = history.current_at(0).j0.clone();
    let positions =
        sample_initial_positions(&j0_initial, grid, ecfg.samples, seed).map_err(run_err)?;
    let step = ecfg.step.unwrap_or(config.evolution.dt_store);
    let mut result = propagate_ensemble(
        &positions,
        &flow,
        config.evolution.t_final,
        step,
        seed,
        ecfg.bins,
    )
    .map_err(run_err)?;

    let final_current = history.current_at(history.len() - 1);
    density_check(&mut result, &final_current.j0, grid);
    current_check(&mut result, &final_current, grid);

    let report = EnsembleReport {
        n: result.n,
        seed,
        bins: ecfg.bins,
        step,
        t_final: config.evolution.t_final,
        tv_distance: result.tv_distance,
        current_match_error: result.current_match_error,
        current_match_noise_units: result.current_match_noise_units,
        lost_count: result.lost_count,
        lost_fraction: result.lost_count as f64 / result.n.max(1) as f64,
        crossing_violations: crossing_violations(&result),
    };

    let mut files: Files = vec![("ensemble.json".into(), to_json_bytes(&report)?)];
    if config.outputs.samples_csv {
        let mut csv = Vec::new();
        csv.extend_from_slice(b"initial_x,final_x,velocity,lost\n");
        for i in 0..result.n {
            csv.extend_from_slice(
                format!(
                    "{:e},{:e},{:e},{}\n",
                    result.initial_positions[i],
                    result.final_positions[i],
                    result.velocities[i],
                    u8::from(result.lost[i])
                )
                .as_bytes(),
            );
        }
        files.push(("samples.csv".into(), csv));
    }
    write_run(opts.out_dir, "ensemble", Some(seed), config, &files, opts.quiet)
}

#[derive(Serialize)]
struct ResidualStats {
    max_abs: f64,
    mean_abs: f64,
    /// max_abs over the largest tensor component magnitude.
    relative_max: f64,
}

#[derive(Serialize)]
struct PartReport {
    part: &'static str,
    divergence_time_component: ResidualStats,
    divergence_space_component: ResidualStats,
    p0_first: f64,
    p0_last: f64,
    p0_max_drift: f64,
    p1_first: f64,
    p1_last: f64,
    p1_max_drift: f64,
}

#[derive(Serialize)]
struct MomentumSample {
    t: f64,
    p0: f64,
    p1: f64,
}

#[derive(Serialize)]
struct ConservationReport {
    parts: Vec<PartReport>,
    tensor_scale: f64,
    momentum_series: Vec<MomentumSample>,
}

/// conserve: assemble the tensor parts per stored slice, difference the
/// conservation law, and track total momentum.
pub fn run_conserve(config: &ScenarioConfig, opts: &RunOptions) -> Result<(), CliError> {
    let history = evolve_free(config)?;
    let grid = history.grid();
    let dt = config.evolution.dt_store;
    let n_slices = history.len();
    if n_slices < 3 {
        return Err(CliError::Config(vec![
            "evolution: conservation checks need at least 3 stored slices".into(),
        ]));
    }
    let k = config.coupling_k;

    // Optional Bohm-mode particle riding the free field, sampled at slice
    // times so tensors line up.
    let with_particle = matches!(
        config.particle.as_ref().map(|p| p.mode),
        Some(ParticleMode::Guidance)
    );
    let worldline = if with_particle {
        let pcfg = config.particle.as_ref().expect("checked");
        let flow = history.current_history(1.0).map_err(setup_err)?;
        Some((
            integrate_guidance(&flow, pcfg.initial_x, 0.0, dt, n_slices - 1, config.mass)
                .map_err(run_err)?,
            flow,
        ))
    } else {
        None
    };

    // Assemble per-slice tensor parts.
    let mut field_parts: Vec<StressEnergyField> = Vec::with_capacity(n_slices);
    let mut particle_parts: Vec<StressEnergyField> = Vec::with_capacity(n_slices);
    let mut interaction_parts: Vec<StressEnergyField> = Vec::with_capacity(n_slices);
    let mut totals: Vec<StressEnergyField> = Vec::with_capacity(n_slices);
    let width = config.sigma_width();
    for i in 0..n_slices {
        let field_part = match &history {
            BackendHistory::Dirac(h) => dirac_field_tensor(h, i).map_err(run_err)?,
            BackendHistory::Scalar(h) => kg_field_tensor(h.slice(i)),
        };
        let mut parts_here: Vec<&StressEnergyField> = vec![&field_part];
        let (particle_part, interaction_part) = if let Some((w, flow)) = &worldline {
            let s = &w.samples[i];
            let p = ParticleState {
                position: s.x,
                t: s.t,
                proper_time: s.tau,
                u: s.u,
                mass: config.mass,
            };
            let sigma = RegularizedDensity::new(s.x, width, s.u.t).map_err(run_err)?;
            let rho0 = flow.sample(s.t, s.x).map_err(run_err)?.rho0;
            if !rho0.is_finite() {
                return Err(run_err(Error::VanishingRestDensity { t: s.t, x: s.x }));
            }
            let pt = particle_tensor(grid, &p, &sigma, rho0, k).map_err(run_err)?;
            let it = match &history {
                BackendHistory::Dirac(h) => {
                    dirac_interaction_tensor(h.slice(i), &p, &sigma, k).map_err(run_err)?
                }
                BackendHistory::Scalar(h) => {
                    kg_interaction_tensor(h.slice(i), &p, &sigma, k).map_err(run_err)?
                }
            };
            (Some(pt), Some(it))
        } else {
            (None, None)
        };
        if let Some(pt) = &particle_part {
            parts_here.push(pt);
        }
        if let Some(it) = &interaction_part {
            parts_here.push(it);
        }
        totals.push(total_tensor(&parts_here));
        field_parts.push(field_part);
        if let Some(pt) = particle_part {
            particle_parts.push(pt);
        }
        if let Some(it) = interaction_part {
            interaction_parts.push(it);
        }
    }

    let tensor_scale = totals.iter().map(|t| t.max_abs()).fold(0.0f64, f64::max);

    let part_report = |label: &'static str, series: &[StressEnergyField]| -> PartReport {
        let mut max0 = 0.0f64;
        let mut max1 = 0.0f64;
        let mut sum0 = 0.0f64;
        let mut sum1 = 0.0f64;
        let mut count = 0usize;
        for i in 1..series.len() - 1 {
            let [r0, r1] =
                divergence(&series[i - 1], &series[i], &series[i + 1]).expect("uniform slices");
            for v in &r0 {
                max0 = max0.max(v.abs());
                sum0 += v.abs();
            }
            for v in &r1 {
                max1 = max1.max(v.abs());
                sum1 += v.abs();
            }
            count += r0.len();
        }
        let momenta: Vec<SpacetimeVector> = series.iter().map(total_momentum).collect();
        let p_first = momenta[0];
        let p_last = *momenta.last().unwrap();
        let drift0 = momenta
            .iter()
            .map(|p| (p.t - p_first.t).abs())
            .fold(0.0f64, f64::max);
        let drift1 = momenta
            .iter()
            .map(|p| (p.x - p_first.x).abs())
            .fold(0.0f64, f64::max);
        let scale = tensor_scale.max(1e-300);
        PartReport {
            part: label,
            divergence_time_component: ResidualStats {
                max_abs: max0,
                mean_abs: sum0 / count.max(1) as f64,
                relative_max: max0 / scale,
            },
            divergence_space_component: ResidualStats {
                max_abs: max1,
                mean_abs: sum1 / count.max(1) as f64,
                relative_max: max1 / scale,
            },
            p0_first: p_first.t,
            p0_last: p_last.t,
            p0_max_drift: drift0,
            p1_first: p_first.x,
            p1_last: p_last.x,
            p1_max_drift: drift1,
        }
    };

    let mut parts = vec![part_report("field", &field_parts)];
    if with_particle {
        parts.push(part_report("particle", &particle_parts));
        parts.push(part_report("interaction", &interaction_parts));
    }
    parts.push(part_report("total", &totals));

    let momentum_series: Vec<MomentumSample> = totals
        .iter()
        .map(|t| {
            let p = total_momentum(t);
            MomentumSample {
                t: t.time,
                p0: p.t,
                p1: p.x,
            }
        })
        .collect();

    let report = ConservationReport {
        parts,
        tensor_scale,
        momentum_series,
    };

    let mut files: Files = vec![("conservation.json".into(), to_json_bytes(&report)?)];
    if config.outputs.tensor_csv {
        let mid = n_slices / 2;
        let mut refs: Vec<&StressEnergyField> = vec![&field_parts[mid]];
        if with_particle {
            refs.push(&particle_parts[mid]);
            refs.push(&interaction_parts[mid]);
        }
        refs.push(&totals[mid]);
        let mut csv = Vec::new();
        pio::write_tensor_csv(&mut csv, &refs).expect("memory write");
        files.push(("tensor.csv".into(), csv));
    }
    write_run(opts.out_dir, "conserve", None, config, &files, opts.quiet)
}

#[derive(Serialize)]
struct ClassicalReport {
    kind: &'static str,
    samples: usize,
    max_u_normalization_defect: f64,
    /// Max deviation from closed-form hyperbolic motion (em runs from rest).
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_max_error: Option<f64>,
    /// Max drift of the conserved (m + phi) u_0 (static scalar runs).
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_max_drift: Option<f64>,
    final_t: f64,
    final_x: f64,
    final_tau: f64,
}

/// classical: the electromagnetic and scalar-potential testbeds.
pub fn run_classical(config: &ScenarioConfig, opts: &RunOptions) -> Result<(), CliError> {
    let ccfg = config
        .classical
        .ok_or_else(|| CliError::Config(vec!["classical: section required for classical".into()]))?;
    let u0 = SpacetimeVector::new(ccfg.initial_u[0], ccfg.initial_u[1])
        .normalize_timelike()
        .map_err(|e| CliError::Config(vec![format!("classical.initial_u: {e}")]))?;
    let start = ParticleState::new(ccfg.initial_x, 0.0, u0, config.mass);
    let n = (ccfg.tau_final / ccfg.step).round().max(1.0) as usize;
    let dtau = ccfg.tau_final / n as f64;

    let (worldline, kind_label, em, scalar): (_, _, Option<EmBackground>, Option<ScalarBackground>) =
        match ccfg.kind {
            ClassicalKind::Em => {
                let bg = EmBackground::UniformElectric {
                    e0: ccfg.e_field.expect("validated"),
                };
                let w = integrate_classical(
                    start,
                    ccfg.charge.expect("validated"),
                    Some(&bg),
                    None,
                    dtau,
                    n,
                )
                .map_err(run_err)?;
                (w, "em", Some(bg), None)
            }
            ClassicalKind::Scalar => {
                let bg = ScalarBackground::StaticGaussian {
                    amplitude: ccfg.amplitude.expect("validated"),
                    center: ccfg.center.unwrap_or(0.0),
                    width: ccfg.width.expect("validated"),
                };
                let w = integrate_classical(start, 0.0, None, Some(&bg), dtau, n)
                    .map_err(run_err)?;
                (w, "scalar", None, Some(bg))
            }
        };

    // Closed-form oracle for a uniform field from rest.
    let closed_form = match (em, u0.x == 0.0) {
        (Some(EmBackground::UniformElectric { e0 }), true) if e0 != 0.0 => {
            let a = ccfg.charge.expect("validated") * e0 / config.mass;
            let mut max_err = 0.0f64;
            for s in &worldline.samples {
                let (t, x, uu0, uu1) = hyperbolic_motion(a, s.tau);
                max_err = max_err
                    .max((s.t - t).abs())
                    .max((s.x - ccfg.initial_x - x).abs())
                    .max((s.u.t - uu0).abs())
                    .max((s.u.x - uu1).abs());
            }
            Some(max_err)
        }
        _ => None,
    };

    let energy_drift = scalar.map(|bg| {
        let e = |s: &pilotwave::dynamics::WorldlineSample| {
            (config.mass + bg.phi(s.t, s.x)) * s.u.lower().t
        };
        let e0 = e(&worldline.samples[0]);
        worldline
            .samples
            .iter()
            .map(|s| (e(s) - e0).abs())
            .fold(0.0f64, f64::max)
    });

    let last = worldline.samples.last().expect("samples");
    let report = ClassicalReport {
        kind: kind_label,
        samples: worldline.samples.len(),
        max_u_normalization_defect: worldline.max_normalization_defect(),
        closed_form_max_error: closed_form,
        energy_max_drift: energy_drift,
        final_t: last.t,
        final_x: last.x,
        final_tau: last.tau,
    };

    let mut csv = Vec::new();
    pio::write_worldline_csv(&mut csv, &worldline, None).expect("memory write");
    let files: Files = vec![
        ("worldline.csv".into(), csv),
        ("classical_report.json".into(), to_json_bytes(&report)?),
    ];
    write_run(opts.out_dir, "classical", None, config, &files, opts.quiet)
}

fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Config(vec![format!("report serialization: {e}")]))?;
    bytes.push(b'\n');
    Ok(bytes)
}
