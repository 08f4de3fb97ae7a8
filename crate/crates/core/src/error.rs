use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Configuration failed validation; every violated invariant is listed.
    #[error("invalid system configuration: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// An operator expected to conserve excitation number has off-block
    /// elements above tolerance.
    #[error("operator is not block-diagonal in excitation number (off-block element {off_block:.3e}, tolerance {tolerance:.3e})")]
    BlockStructure { off_block: f64, tolerance: f64 },

    /// Left/right eigenvector overlap below threshold: the matrix is at or
    /// near an exceptional point.
    #[error("near-defective matrix: min |<L|R>| = {min_overlap:.3e} below {threshold:.1e}")]
    NearDefective { min_overlap: f64, threshold: f64 },

    /// The Liouvillian null space is not one-dimensional.
    #[error("steady state is not unique: second-smallest singular value ratio {ratio:.3e}")]
    DegenerateSteadyState { ratio: f64 },

    /// Resolvent evaluated on the spectrum.
    #[error("singular resolvent at energy {energy}")]
    SingularResolvent { energy: f64 },

    /// Output intensity too small to normalise a correlation function.
    #[error("division underflow: first-order intensity {intensity:.3e}")]
    DivisionUnderflow { intensity: f64 },

    /// Adaptive integrator could not meet its tolerance.
    #[error("integrator step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// Scenario or command-line configuration problem.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

impl Error {
    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Validation(_) | Error::Config(_) | Error::Json(_) | Error::Io(_)
        )
    }
}
