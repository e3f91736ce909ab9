use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {constraint}")]
    InvalidParameter { field: String, constraint: String },

    #[error("background value W({t}) = {value} leaves the open interval ({lo}, {hi})")]
    BackgroundOutOfRange { t: f64, value: f64, lo: f64, hi: f64 },

    #[error("background measure integrates to {integral}, expected 1")]
    NotNormalized { integral: f64 },

    #[error("deposit position w = {w} outside [{lo}, {hi}]")]
    DepositOutOfRange { w: f64, lo: f64, hi: f64 },

    #[error("cell ({i}, {j}) became negative ({value:e}) after withdrawal")]
    NegativeCell { i: usize, j: usize, value: f64 },

    #[error("CFL condition violated: nu = {nu} > 1")]
    Cfl { nu: f64 },

    #[error("explicit stability bound violated: dt = {dt:e} > {bound:e}")]
    Stability { dt: f64, bound: f64 },

    #[error("Fokker-Planck state lost positivity at ({i}, {j}): {value:e}")]
    LostPositivity { i: usize, j: usize, value: f64 },

    #[error("time series is empty")]
    EmptySeries,

    #[error("time series of length {len} is too short, need more than {needed}")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("background vanishes at t = {t}, bandwidth undefined")]
    ZeroBackground { t: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("run with seed {seed} failed at step {step}: {source}")]
    Run {
        seed: u64,
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            constraint: constraint.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
