use thiserror::Error;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A precondition on user-supplied parameters was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Parameters are individually valid but the requested construction is impossible
    /// (overlapping bins, overlapping spheres, too few points for the sites, ...).
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    /// `directions` holds unit vectors spanning the (numerical) null space.
    #[error("{what} is singular ({} unidentified direction(s))", directions.len())]
    Singular {
        what: &'static str,
        directions: Vec<Vec<f64>>,
    },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl DesignError {
    /// Process exit code used by the CLI: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            DesignError::DimensionMismatch { .. }
            | DesignError::InvalidParameter(_)
            | DesignError::Infeasible(_)
            | DesignError::Csv(_)
            | DesignError::Json(_) => 2,
            DesignError::Io(_) => 2,
            DesignError::Singular { .. }
            | DesignError::NotSymmetric(_)
            | DesignError::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, DesignError>;

pub(crate) fn invalid(msg: impl Into<String>) -> DesignError {
    DesignError::InvalidParameter(msg.into())
}
