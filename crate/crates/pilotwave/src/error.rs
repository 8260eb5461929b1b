use thiserror::Error;

/// Errors shared across the simulation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A vector that must be timelike has `v·v <= 0`.
    #[error("vector is not timelike (v.v = {dot:e})")]
    NonTimelike { dot: f64 },

    /// A timelike vector points into the past (`v0 <= 0`).
    #[error("timelike vector has non-positive time component (v0 = {t0:e})")]
    NegativeTimeOrientation { t0: f64 },

    /// Requested plane-wave momentum does not fit the periodic box.
    #[error("momentum {requested:e} is not a lattice momentum; nearest is {nearest:e}")]
    IncommensurateMomentum { requested: f64, nearest: f64 },

    /// Packet width too small for the lattice spacing.
    #[error("packet width {width:e} is under-resolved; need at least 4 dx = {min:e}")]
    UnderresolvedPacket { width: f64, min: f64 },

    /// A time derivative was requested but the history holds too few slices.
    #[error("insufficient history ({len} slices) for a time derivative")]
    InsufficientHistory { len: usize },

    /// The flow velocity is undefined (node or non-timelike current) at the
    /// requested spacetime point.
    #[error("flow velocity undefined at t = {t:e}, x = {x:e}")]
    UndefinedFlow { t: f64, x: f64 },

    /// Requested time lies outside the stored field history.
    #[error("time {t:e} outside stored history [{t_first:e}, {t_last:e}]")]
    OutOfHistory { t: f64, t_first: f64, t_last: f64 },

    /// The rest density fell below the floor where the equation of motion
    /// becomes singular.
    #[error("rest density below floor at t = {t:e}, x = {x:e}")]
    VanishingRestDensity { t: f64, x: f64 },

    /// Effective mass `m + phi` must stay positive for the scalar testbed.
    #[error("effective mass m + phi = {value:e} is not positive at tau = {tau:e}")]
    EffectiveMassNonPositive { value: f64, tau: f64 },

    /// Cannot draw samples from an identically-zero density.
    #[error("density is identically zero; nothing to sample")]
    DegenerateDensity,

    /// Lattice parameters violate the grid contract.
    #[error("invalid grid: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
