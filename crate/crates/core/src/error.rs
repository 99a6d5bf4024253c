use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("metric is not symmetric at ({x}, {y}): asymmetry {asym:e}")]
    NotSymmetric { x: f64, y: f64, asym: f64 },

    #[error("metric is not positive definite at ({x}, {y}): smallest eigenvalue {min_eig:e}")]
    NotPositiveDefinite { x: f64, y: f64, min_eig: f64 },

    #[error("geodesic step underflow at t = {t} (boundary tangency)")]
    Tangency { t: f64 },

    #[error("exit time exceeded the cap {cap} (metric is probably not simple)")]
    ExitTimeCap { cap: f64 },

    #[error("polar chart: {0}")]
    Chart(String),

    #[error("point outside the influx grid coverage: {0}")]
    Coverage(String),

    #[error("linear solve failed: {reason} (residual {residual:e})")]
    Solver { reason: String, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("point {0} is within one cell of the Cauchy domain boundary")]
    Margin(String),

    #[error("symbol evaluated at the zero covector")]
    ZeroCovector,

    #[error("rank-deficient covector design (smallest singular value {sigma_min:e})")]
    Conditioning { sigma_min: f64 },

    #[error("closed-form check failed: path discrepancy {0:e}")]
    NotClosed(f64),

    #[error("support: {0}")]
    Support(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
