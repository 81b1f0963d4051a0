use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty domain interval")]
    EmptyDomain,
    #[error("disk misses the epigraph by {gap:.3e}")]
    EmptyIntersection { gap: f64 },
    #[error("steiner quadrature did not settle: K vs 2K differ by {diff:.3e} (tolerance {tol:.1e})")]
    QuadratureNonConvergence { diff: f64, tol: f64 },
    #[error("point {x} is not in the constraint set")]
    NotInSet { x: f64 },
    #[error("grid function has fewer than two finite values")]
    AllInfinite,
    #[error("no closed-form conjugate for {0}")]
    NoClosedForm(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no admissible velocity at t={t}, x={x}")]
    EmptyVelocitySet { t: f64, x: f64 },
    #[error("start node (t={t}, x={x}) has infinite value")]
    InfeasibleStart { t: f64, x: f64 },
    #[error("rollout left the grid at t={t}, x={x}")]
    LeftGrid { t: f64, x: f64 },
    #[error("certificate data missing: {0}")]
    MissingCertificate(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
