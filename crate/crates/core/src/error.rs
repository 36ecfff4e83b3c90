use drmco_lp::LpError;

/// Errors raised by the modelling, oracle and evaluation layers.
#[derive(Debug, thiserror::Error)]
pub enum DrmcoError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("stage {stage}: uncertainty enters both the objective and the right-hand side")]
    MixedUncertainty { stage: usize },
    #[error("stage {stage}: no finite Lipschitz bound is derivable; supply the regularization explicitly")]
    UnboundedLipschitz { stage: usize },
    #[error("stage {stage}: cut gradient norm {norm} exceeds the Lipschitz bound {bound}")]
    CutRejected { stage: usize, norm: f64, bound: f64 },
    #[error("stage {stage}: this oracle requires a bounded uncertainty set")]
    UnboundedUncertainty { stage: usize },
    #[error("uncertainty atom has {count} lifted vertices, above the cap of {cap}")]
    TooManyVertices { count: usize, cap: usize },
    #[error("stage {stage}: unbounded uncertainty set without a declared growth rate")]
    MissingGrowthRate { stage: usize },
    #[error("stage {stage}: subproblem is infeasible")]
    Infeasible { stage: usize },
    #[error("stage {stage}: subproblem is unbounded")]
    Unbounded { stage: usize },
    #[error("oracle failure at stage {stage}, iteration {iteration}: {source}")]
    OracleFailure {
        stage: usize,
        iteration: usize,
        #[source]
        source: Box<DrmcoError>,
    },
    #[error("covariance matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue})")]
    NonPsdCovariance { min_eigenvalue: f64 },
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = DrmcoError> = std::result::Result<T, E>;
