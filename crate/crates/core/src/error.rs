use thiserror::Error;

/// Errors shared across the estimation, control, and simulation layers.
#[derive(Error, Debug)]
pub enum Error {
    #[error("attitude at gimbal lock, yaw undefined")]
    SingularAttitude,

    #[error("least-squares system is rank deficient (condition {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("matrix is numerically degenerate (smallest singular value {sigma_min:.3e})")]
    Degenerate { sigma_min: f64 },

    #[error("configuration matrix has rank < 4; torque about some axis is uncontrollable")]
    SingularConfiguration,

    #[error("simulation state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("filter cutoff {cutoff} Hz must lie below Nyquist ({nyquist} Hz)")]
    InvalidCutoff { cutoff: f64, nyquist: f64 },

    #[error("polygon is degenerate (area {area:.3e} m^2)")]
    DegeneratePolygon { area: f64 },

    #[error("segment duration {duration} s too short to fit a polynomial")]
    IllConditioned { duration: f64 },

    #[error("time {t} s outside plan range [0, {total}]")]
    OutOfRange { t: f64, total: f64 },

    #[error("metric window [{start}, {end}] contains no samples")]
    EmptyWindow { start: f64, end: f64 },

    #[error("nominal hover input demands negative thrust (min {min_thrust:.3} N)")]
    InfeasibleTrim { min_thrust: f64 },

    #[error("scenario failed in phase {phase}: {reason}")]
    ScenarioFailed { phase: String, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
