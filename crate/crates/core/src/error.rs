use thiserror::Error;

/// Errors raised by the analysis, behavior, OCP and closed-loop routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: dimension mismatches, windows of the wrong length, too little data.
    #[error("input error: {0}")]
    Input(String),

    /// The system does not satisfy a structural hypothesis (non-regular pencil, not R-observable, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A factorization was too ill-conditioned to trust.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An input/output window is not a segment of any system trajectory.
    #[error("window is not a system trajectory (residual {residual:.3e})")]
    InconsistentWindow { residual: f64 },

    /// The equality constraints of a QP admit no solution.
    #[error("infeasible constraints (residual {residual:.3e})")]
    Infeasible { residual: f64 },

    /// Random excitation signal generation gave up.
    #[error("generation error: {0}")]
    Generation(String),

    /// A closed-loop step failed at time `t`.
    #[error("closed-loop step failed at t = {t}: {source}")]
    Step {
        t: i64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
