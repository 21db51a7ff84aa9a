use thiserror::Error;

/// Errors raised across the analysis and oracle modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: String, hi: String },
    #[error("iteration budget of {0} exhausted")]
    MaxIters(usize),
    #[error("leading coefficient is zero")]
    DegenerateLeadingCoefficient,
    #[error("enumeration of {states} states exceeds the budget of {budget}")]
    TooLarge { states: String, budget: u64 },
    #[error("graph is not regular")]
    NotRegular,
    #[error("n*Delta = {0} is not divisible by the arity {1}")]
    Indivisible(u64, usize),
    #[error("colouring is not proper: hyperedge {0} is monochromatic")]
    NotProper(usize),
    #[error("hypergraph is {0}-colourable")]
    NotUncolourable(u32),
    #[error("hyperedge {0} has no vertex shared with the rest of the hypergraph")]
    EmptyS(usize),
    #[error("equality gadget needs q = 2, got q = {0}")]
    WrongQ(u32),
    #[error("gadget verification failed: {0}")]
    GadgetVerification(String),
    #[error("no asymmetric 2-spin fixpoint found")]
    NoAsymmetricFixpoint,
    #[error("solver did not converge: residual {residual} after {iters} iterations")]
    NotConverged { residual: String, iters: usize },
    #[error("point is not critical: residual {0}")]
    NotCritical(String),
    #[error("infeasible point: interaction sum is not positive")]
    InfeasiblePoint,
    #[error("zero interaction: R^T B C = 0")]
    ZeroInteraction,
    #[error("zero marginal at index {0}")]
    ZeroMarginal(usize),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("d = {d} does not match the required 5 q^k = {required}")]
    RegimeMismatch { d: u64, required: u64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
