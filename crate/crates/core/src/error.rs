use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("state outside the model domain: x = {x} (prey density must be positive)")]
    Domain { x: f64 },

    #[error("point is not an equilibrium: residual {residual:e} exceeds {tolerance:e}")]
    NotEquilibrium { residual: f64, tolerance: f64 },

    #[error("cubic has a vanishing leading coefficient")]
    DegenerateLeading,

    #[error("attack rate {lambda} violates the triple-point existence bound lambda < {bound}")]
    ExistenceBound { lambda: f64, bound: f64 },

    #[error("equilibrium multiplicity {multiplicity} contradicts Jacobian determinant {det:e}")]
    InconsistentMultiplicity { multiplicity: usize, det: f64 },

    #[error("wrong normal-form branch: {0}")]
    WrongBranch(String),

    #[error("truncated composition check failed: {0}")]
    Truncation(String),

    #[error("step size underflow at t = {t} (last state x = {x}, y = {y})")]
    StepUnderflow { t: f64, x: f64, y: f64 },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("no fold point in the requested range")]
    NoFold,

    #[error("failed to parse parameter document {path}: {message}")]
    ParamsDocument { path: PathBuf, message: String },

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_)
            | Error::ExistenceBound { .. }
            | Error::InvalidRange(_)
            | Error::ParamsDocument { .. } => 3,
            Error::Domain { .. } | Error::NotEquilibrium { .. } | Error::DegenerateLeading => 4,
            Error::InconsistentMultiplicity { .. }
            | Error::WrongBranch(_)
            | Error::Truncation(_)
            | Error::NoFold => 5,
            Error::StepUnderflow { .. } => 6,
            Error::Csv(_) | Error::Io(_) => 7,
        }
    }
}
