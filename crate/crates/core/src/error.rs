use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("operator not positive definite: curvature {curvature:e} at iteration {iteration}")]
    NotPositiveDefinite { iteration: usize, curvature: f64 },

    #[error("numerical breakdown at iteration {iteration}: {what}")]
    Breakdown { iteration: usize, what: &'static str },

    #[error("rank deficient system: {0}")]
    RankDeficient(String),

    #[error("outer iteration {outer}: {source}")]
    Outer {
        outer: usize,
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

impl Error {
    /// True for failures of the numerics (as opposed to bad input or IO).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. } | Error::Breakdown { .. } | Error::RankDeficient(_) => true,
            Error::Outer { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn at_outer(self, outer: usize) -> Self {
        Error::Outer { outer, source: Box::new(self) }
    }
}

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!("{what}: length {got}, expected {want}")));
    }
    Ok(())
}
