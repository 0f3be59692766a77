use thiserror::Error;

use crate::integrate::Trajectory;

/// Errors raised by the library API.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    /// Config text error; `line` is 1-based, 0 when the whole file is at fault.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not {0}")]
    MatrixRole(&'static str),
    #[error("dimension {0} outside the supported range 2..=16")]
    Dimension(usize),
    #[error("lambda = {lambda} lies within {tolerance:e} of a pole a_i")]
    PoleProximity { lambda: f64, tolerance: f64 },
    #[error("family {family} requires control {control} = 0")]
    FamilyNotApplicable {
        family: &'static str,
        control: &'static str,
    },
    #[error("point is not an equilibrium (|x × m| = {residual:e})")]
    NotAnEquilibrium { residual: f64 },
    #[error("level {level} lies below the minimum {minimum} of H: the ellipsoid is empty")]
    EmptyLevel { level: f64, minimum: f64 },
    #[error("stability theorems cover only epsilon > 0 (got {0})")]
    EpsilonNotPositive(f64),
    #[error("Lyapunov function requires lambda < 0 (got {0})")]
    LambdaNotNegative(f64),
    #[error("probe inconclusive: max excursion {max_excursion:e} is above the stay bound {stay_bound:e} and below the escape radius {escape_radius:e}")]
    Inconclusive {
        max_excursion: f64,
        stay_bound: f64,
        escape_radius: f64,
    },
    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// Integration failures. The variants that can occur mid-run carry the
/// trajectory accumulated up to the failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("non-finite stage value at t = {t}")]
    StepFailure { t: f64 },
    #[error("step size {h:e} underflowed at t = {t}")]
    StepSizeUnderflow {
        t: f64,
        h: f64,
        partial: Box<Trajectory>,
    },
    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded {
        t: f64,
        max_steps: u64,
        partial: Box<Trajectory>,
    },
}

impl IntegrationError {
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            IntegrationError::StepFailure { .. } => None,
            IntegrationError::StepSizeUnderflow { partial, .. }
            | IntegrationError::MaxStepsExceeded { partial, .. } => Some(partial),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
