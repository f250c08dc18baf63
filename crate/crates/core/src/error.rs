use thiserror::Error;

/// Errors raised across the homogenization pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("depth must be positive everywhere (minimum {min})")]
    NonPositiveDepth { min: f64 },

    #[error("gravity must be positive, got {0}")]
    NonPositiveGravity(f64),

    #[error("invalid cell grid: {0}")]
    InvalidGrid(String),

    #[error("grid size mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("profile is not translation-even; fifth-order nonlinear terms are unavailable")]
    NotTranslationEven,

    #[error("flat bottom: no dispersive balance (mu_hat = 0)")]
    FlatBottom,

    #[error("subcritical speed: V^2 - c^2 = {gamma1} must be positive")]
    Subcritical { gamma1: f64 },

    #[error("no solitary wave at this speed: {0}")]
    NoSolitaryWave(String),

    #[error("energy {energy} outside the admissible band ({min}, 0)")]
    EnergyOutOfBand { energy: f64, min: f64 },

    #[error("periodic orbit longer than the window ({window})")]
    PeriodExceedsWindow { window: f64 },

    #[error("Newton iteration failed to converge: residual {residual:e} after {iterations} iterations")]
    NewtonDiverged { residual: f64, iterations: usize },

    #[error("Newton iteration collapsed to the trivial solution (max |eta| = {max_abs:e})")]
    TrivialSolution { max_abs: f64 },

    #[error("amplitude {target} not attainable for speeds in [{v_lo}, {v_hi}]")]
    AmplitudeNotAttainable { target: f64, v_lo: f64, v_hi: f64 },

    #[error("elliptic symbol is non-positive at wavenumber {k} (value {symbol})")]
    EllipticSymbol { k: f64, symbol: f64 },

    #[error("time step underflow at t = {t} (dt = {dt:e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("non-finite value in solution at t = {t}")]
    NonFinite { t: f64 },

    #[error("dry cell at x = {x} (h = {h})")]
    DryCell { x: f64, h: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("no separated crest found: {0}")]
    NoCrest(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidProfile(_) => "invalid_profile",
            Error::NonPositiveDepth { .. } => "nonpositive_depth",
            Error::NonPositiveGravity(_) => "nonpositive_gravity",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::GridMismatch { .. } => "grid_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NotTranslationEven => "not_translation_even",
            Error::FlatBottom => "flat_bottom",
            Error::Subcritical { .. } => "subcritical",
            Error::NoSolitaryWave(_) => "no_solitary_wave",
            Error::EnergyOutOfBand { .. } => "energy_out_of_band",
            Error::PeriodExceedsWindow { .. } => "period_exceeds_window",
            Error::NewtonDiverged { .. } => "newton_diverged",
            Error::TrivialSolution { .. } => "trivial_solution",
            Error::AmplitudeNotAttainable { .. } => "amplitude_not_attainable",
            Error::EllipticSymbol { .. } => "elliptic_symbol",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::NonFinite { .. } => "non_finite",
            Error::DryCell { .. } => "dry_cell",
            Error::Singular => "singular",
            Error::NoCrest(_) => "no_crest",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
