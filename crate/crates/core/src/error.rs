use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value (orders, sizes, counts).
    #[error("configuration error: {0}")]
    Config(String),

    /// Caller violated an operation's contract (index, layout, length).
    #[error("usage error: {0}")]
    Usage(String),

    /// Argument outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive step size collapsed.
    #[error("step size underflow at t = {t}: h = {h:e}")]
    Stiffness { t: f64, h: f64 },

    #[error("no steady state after {steps} steps: residual {residual:e}")]
    NonConvergence { steps: usize, residual: f64 },

    /// NaN or infinity appeared in the loss or gradient.
    #[error("non-finite {what} at epoch {epoch}")]
    NonFinite {
        what: &'static str,
        epoch: usize,
        params: Vec<f64>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures the caller caused through inputs or configuration.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Usage(_) | Error::Domain(_))
    }

    /// True for numerical aborts (non-finite values, divergence, stiffness).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::NonConvergence { .. } | Error::Stiffness { .. }
        )
    }
}
