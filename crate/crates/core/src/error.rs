use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_um} um outside validity range [{min_um}, {max_um}] um of model `{model}`")]
    Range {
        model: String,
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },

    #[error("degenerate process: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("model validity: {0}")]
    ModelValidity(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("noise floor {floor:e} with N_D = {num_domains} does not constrain sigma_bar")]
    Unbounded { floor: f64, num_domains: u64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Broad category used by the command-line front end to select an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Model,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) => ErrorClass::Config,
            Error::Parse { .. }
            | Error::Data(_)
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Fit(_) => ErrorClass::Data,
            Error::Range { .. }
            | Error::Degenerate(_)
            | Error::Domain(_)
            | Error::ModelValidity(_)
            | Error::Unbounded { .. } => ErrorClass::Model,
            Error::Io(_) => ErrorClass::Io,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Model => 4,
            ErrorClass::Io => 5,
        }
    }
}
