//! Scenario files: one TOML document per run, strict about unknown keys.
//!
//! Silent typo absorption is the top reproducibility hazard, so every table
//! rejects keys it does not know, and validation reports each offending
//! field by name.

use serde::{Deserialize, Serialize};

use pilotwave::fields::dirac::PacketSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveEquation {
    Dirac,
    KleinGordon,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub wave_equation: WaveEquation,
    pub mass: f64,
    /// Coupling constant between particle and current; cancels in all flow
    /// velocities and trajectories.
    #[serde(default = "default_coupling")]
    pub coupling_k: f64,
    pub grid: GridConfig,
    pub initial_state: InitialStateConfig,
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub particle: Option<ParticleConfig>,
    #[serde(default)]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default)]
    pub classical: Option<ClassicalConfig>,
}

fn default_coupling() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub num_points: usize,
    pub box_length: f64,
}

/// Exactly one of the two initial-state flavors must be present.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_wave: Option<PlaneWaveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packets: Option<Vec<PacketConfig>>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWaveConfig {
    pub momentum: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

impl From<PacketConfig> for PacketSpec {
    fn from(p: PacketConfig) -> Self {
        PacketSpec {
            center: p.center,
            momentum: p.momentum,
            width: p.width,
            phase: p.phase,
            weight: p.weight,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub t_final: f64,
    pub dt_store: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParticleMode {
    Guidance,
    GeneralEom,
    None,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub mode: ParticleMode,
    pub initial_x: f64,
    /// Upper components (u0, u1); omit for u = ubar at the start point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_u: Option<[f64; 2]>,
    /// Regulator width; defaults to 3 dx.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_width: Option<f64>,
    /// Integrator step: coordinate time for guidance, proper time for the
    /// general equation of motion.
    pub step: f64,
    /// Evolve the field with the particle source term active.
    #[serde(default)]
    pub source_feedback: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub samples: usize,
    pub seed: u64,
    pub bins: usize,
    /// Guidance step for ensemble propagation; defaults to dt_store.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "default_true")]
    pub field_csv: bool,
    #[serde(default = "default_true")]
    pub current_csv: bool,
    #[serde(default)]
    pub history_binary: bool,
    #[serde(default)]
    pub samples_csv: bool,
    #[serde(default)]
    pub tensor_csv: bool,
    #[serde(default)]
    pub gnuplot: bool,
}

fn default_true() -> bool {
    true
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            field_csv: true,
            current_csv: true,
            history_binary: false,
            samples_csv: false,
            tensor_csv: false,
            gnuplot: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalKind {
    Em,
    Scalar,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    pub kind: ClassicalKind,
    /// Electromagnetic testbed: particle charge and uniform field strength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_field: Option<f64>,
    /// Scalar testbed: static Gaussian potential parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default)]
    pub initial_x: f64,
    pub initial_u: [f64; 2],
    pub tau_final: f64,
    pub step: f64,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, Vec<String>> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| vec![format!("parse error: {e}")])?;
        let problems = config.validate();
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(problems)
        }
    }

    /// Field-level validation; returns one message per problem.
    pub fn validate(&self) -> Vec<String> {
        fn check(problems: &mut Vec<String>, ok: bool, msg: &str) {
            if !ok {
                problems.push(msg.to_string());
            }
        }
        let mut problems = Vec::new();

        check(
            &mut problems,
            self.grid.num_points >= 8,
            "grid.num_points: must be at least 8",
        );
        check(
            &mut problems,
            self.grid.num_points.is_power_of_two(),
            "grid.num_points: must be a power of two",
        );
        check(
            &mut problems,
            self.grid.box_length > 0.0 && self.grid.box_length.is_finite(),
            "grid.box_length: must be finite and positive",
        );
        let dx = self.grid.box_length / self.grid.num_points as f64;

        match self.wave_equation {
            WaveEquation::Dirac => check(
                &mut problems,
                self.mass >= 0.0 && self.mass.is_finite(),
                "mass: must be finite and non-negative",
            ),
            WaveEquation::KleinGordon => check(
                &mut problems,
                self.mass > 0.0 && self.mass.is_finite(),
                "mass: must be finite and positive for klein_gordon",
            ),
        }
        check(
            &mut problems,
            self.coupling_k > 0.0 && self.coupling_k.is_finite(),
            "coupling_k: must be finite and positive",
        );

        match (&self.initial_state.plane_wave, &self.initial_state.packets) {
            (Some(_), Some(_)) => {
                problems.push("initial_state: give either plane_wave or packets, not both".into())
            }
            (None, None) => {
                problems.push("initial_state: one of plane_wave or packets is required".into())
            }
            (None, Some(packets)) => {
                if packets.is_empty() {
                    problems.push("initial_state.packets: must not be empty".into());
                }
                for (i, p) in packets.iter().enumerate() {
                    if !(p.width >= 4.0 * dx) {
                        problems.push(format!(
                            "initial_state.packets[{i}].width: {} under-resolves the lattice (need >= 4 dx = {})",
                            p.width,
                            4.0 * dx
                        ));
                    }
                    if p.center.abs() > 0.5 * self.grid.box_length {
                        problems.push(format!(
                            "initial_state.packets[{i}].center: outside the box"
                        ));
                    }
                }
            }
            (Some(_), None) => {}
        }

        check(
            &mut problems,
            self.evolution.t_final > 0.0,
            "evolution.t_final: must be positive",
        );
        check(
            &mut problems,
            self.evolution.dt_store > 0.0,
            "evolution.dt_store: must be positive",
        );
        if self.evolution.dt_store > 0.0 {
            let slices = self.evolution.t_final / self.evolution.dt_store;
            check(
                &mut problems,
                slices <= 50_000.0,
                "evolution: t_final / dt_store exceeds 50000 stored slices",
            );
        }

        if let Some(p) = &self.particle {
            check(&mut problems, p.step > 0.0, "particle.step: must be positive");
            check(
                &mut problems,
                p.initial_x.abs() <= 0.5 * self.grid.box_length,
                "particle.initial_x: outside the box",
            );
            if let Some(w) = p.sigma_width {
                check(&mut problems, w > 0.0, "particle.sigma_width: must be positive");
            }
            if let Some(u) = p.initial_u {
                let dot = u[0] * u[0] - u[1] * u[1];
                check(
                    &mut problems,
                    dot > 0.0 && u[0] > 0.0,
                    "particle.initial_u: must be timelike and future-pointing",
                );
                if p.mode == ParticleMode::Guidance {
                    problems.push(
                        "particle.initial_u: guidance mode pins u = ubar; omit initial_u".into(),
                    );
                }
            }
            if p.source_feedback {
                check(
                    &mut problems,
                    self.wave_equation == WaveEquation::Dirac,
                    "particle.source_feedback: only the dirac backend has a sourced stepper",
                );
                check(
                    &mut problems,
                    p.mode == ParticleMode::Guidance,
                    "particle.source_feedback: requires guidance mode",
                );
            }
        }

        if let Some(e) = &self.ensemble {
            check(&mut problems, e.samples >= 1, "ensemble.samples: must be at least 1");
            check(&mut problems, e.bins >= 1, "ensemble.bins: must be at least 1");
            if e.bins >= 1 {
                check(
                    &mut problems,
                    self.grid.num_points.is_multiple_of(e.bins),
                    "ensemble.bins: must divide grid.num_points",
                );
            }
            if let Some(step) = e.step {
                check(&mut problems, step > 0.0, "ensemble.step: must be positive");
            }
        }

        if let Some(c) = &self.classical {
            match c.kind {
                ClassicalKind::Em => {
                    check(&mut problems, c.charge.is_some(), "classical.charge: required for kind = em");
                    check(
                        &mut problems,
                        c.e_field.is_some(),
                        "classical.e_field: required for kind = em",
                    );
                }
                ClassicalKind::Scalar => {
                    check(
                        &mut problems,
                        c.amplitude.is_some(),
                        "classical.amplitude: required for kind = scalar",
                    );
                    check(
                        &mut problems,
                        c.width.is_some_and(|w| w > 0.0),
                        "classical.width: required and positive for kind = scalar",
                    );
                }
            }
            let dot = c.initial_u[0] * c.initial_u[0] - c.initial_u[1] * c.initial_u[1];
            check(
                &mut problems,
                dot > 0.0 && c.initial_u[0] > 0.0,
                "classical.initial_u: must be timelike and future-pointing",
            );
            check(&mut problems, c.tau_final > 0.0, "classical.tau_final: must be positive");
            check(&mut problems, c.step > 0.0, "classical.step: must be positive");
            check(
                &mut problems,
                self.mass > 0.0,
                "mass: classical testbeds need a positive mass",
            );
        }

        problems
    }

    /// Number of stored evolution steps.
    pub fn stored_steps(&self) -> usize {
        (self.evolution.t_final / self.evolution.dt_store).round().max(1.0) as usize
    }

    /// Regulator width for the particle, defaulting to three lattice spacings.
    pub fn sigma_width(&self) -> f64 {
        let dx = self.grid.box_length / self.grid.num_points as f64;
        self.particle
            .as_ref()
            .and_then(|p| p.sigma_width)
            .unwrap_or(3.0 * dx)
    }
}
