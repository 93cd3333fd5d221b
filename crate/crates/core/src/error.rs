use thiserror::Error;

/// Errors raised by network loading, the planners and the resilience evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("layer `{0}` is empty")]
    EmptyLayer(&'static str),
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("`{from}` -> `{to}` is not an edge of the layered network")]
    InvalidEdge { from: String, to: String },
    #[error("no cost available for edge `{0}`")]
    MissingEdgeCost(String),
    #[error("negative cost variance {value} on edge `{edge}`")]
    NegativeVariance { edge: String, value: f64 },
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("demand sums to {0}, expected 1")]
    DemandNotNormalized(f64),
    #[error("negative demand {value} at outlet `{outlet}`")]
    NegativeDemand { outlet: String, value: f64 },
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("matrix has no nonzero entry")]
    ZeroMatrix,
    #[error("walk step {from} -> {to} is not an edge")]
    NonAdjacentStep { from: usize, to: usize },
    #[error("plan puts mass on a path with zero prior probability")]
    ZeroPriorMass,
    #[error("cost model and occupancy cover different edge sets ({cost} vs {occupancy})")]
    DomainMismatch { cost: usize, occupancy: usize },
    #[error("sum of phi^2 sigma^2 is zero; worst-case shift undefined")]
    ZeroVarianceMass,
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("quadrature failed on [{lo}, {hi}]")]
    QuadratureFailure { lo: f64, hi: f64 },
    #[error("brute-force search too large: {0}")]
    TooLarge(String),
    #[error("plan does not match network: {0}")]
    PlanMismatch(String),
    #[error("infeasible plan: {0}")]
    InfeasiblePlan(String),
}

pub type Result<T> = std::result::Result<T, Error>;
