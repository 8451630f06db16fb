use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("metric is not positive definite")]
    NotPositiveDefinite,
    #[error("2-form is degenerate")]
    DegenerateForm,
    #[error("endomorphism is not nilpotent and the series did not converge within {terms} terms")]
    NonConvergent { terms: usize },
    #[error("support cap exceeded: {size} modes*terms > cap {cap}")]
    SupportCap { size: usize, cap: usize },
    #[error("reality constraint violated at frequency {freq:?} (defect {defect:e})")]
    Reality { freq: Vec<i32>, defect: f64 },
    #[error("singular block at frequency {freq:?}: min singular value {sigma:e}")]
    SingularBlock { freq: Vec<i32>, sigma: f64 },
    #[error("wrong structure kind: {0}")]
    WrongKind(String),
    #[error("not in the fibre subspace: relative residual {0:e}")]
    NotInSubspace(f64),
    #[error("seed is not closed: residual {0:e}")]
    SeedNotClosed(f64),
    #[error("two obstruction paths disagree at order {order}: {diff:e}")]
    ObstructionMismatch { order: usize, diff: f64 },
    #[error("order {order}: {source}")]
    AtOrder { order: usize, source: Box<Error> },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
