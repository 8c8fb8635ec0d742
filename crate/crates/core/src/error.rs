use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid level scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid drive configuration: {0}")]
    InvalidDrive(String),

    #[error("invalid polarization geometry: {0}")]
    Geometry(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("steady state is not unique or the system is singular (pivot ratio {pivot_ratio:.3e}, residual {residual:.3e})")]
    SingularSteadyState { pivot_ratio: f64, residual: f64 },

    #[error("density matrix is not stationary under the generator (residual {0:.3e})")]
    NotStationary(f64),

    #[error("fluctuation system is singular at delta = {delta} (pivot ratio {pivot_ratio:.3e})")]
    SingularFrequency { delta: f64, pivot_ratio: f64 },

    #[error("non-finite result: {0}")]
    NonFinite(String),

    #[error("frequency grids do not match: {0}")]
    GridMismatch(String),

    #[error("correlations did not decay within the integration horizon: {0}")]
    HorizonTooShort(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("table error: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable code used in result tables.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidScheme(_) => "invalid_scheme",
            Error::InvalidDrive(_) => "invalid_drive",
            Error::Geometry(_) => "geometry",
            Error::Dimension(_) => "dimension",
            Error::SingularSteadyState { .. } => "singular_steady_state",
            Error::NotStationary(_) => "not_stationary",
            Error::SingularFrequency { .. } => "singular_frequency",
            Error::NonFinite(_) => "non_finite",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::HorizonTooShort(_) => "horizon_too_short",
            Error::Config(_) => "config",
            Error::Table(_) => "table",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
