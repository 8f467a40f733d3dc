use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid rational `{0}` (expected `num/den` or an integer)")]
    Rational(String),
    #[error("invalid cost `{0}` (expected a non-negative integer)")]
    Cost(String),
    #[error("formula syntax error at column {pos}: {msg}")]
    Formula { pos: usize, msg: String },
    #[error("malformed JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` declared twice")]
    DuplicateState(String),
    #[error("probability {prob} on {from} -> {to} is not in (0, 1]")]
    BadProbability { from: String, to: String, prob: String },
    #[error("model does not name its {0} state")]
    Missing(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("process is not a cost chain: state `{0}` has several enabled actions")]
    NotAChain(String),
    #[error("process has a cycle in its control graph")]
    Cyclic,
    #[error("threshold {0} is outside [0, 1]")]
    TauOutOfRange(String),
    #[error("threshold 1 has no finite a-priori budget bound")]
    TauIsOne,
    #[error("scheduler has no action for state `{state}` at cost {cost}")]
    SchedulerIncomplete { state: String, cost: String },
    #[error("scheduler picks action `{action}` which is not enabled in `{state}`")]
    SchedulerDisabled { state: String, action: String },
    #[error("unknown solver strategy `{0}`")]
    UnknownStrategy(String),
    #[error("sampling guard tripped after {0} steps")]
    StepGuard(u64),
    #[error("sample count must be at least 1")]
    NoSamples,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("instance exceeds the size guard: {0}")]
    SizeGuard(String),
}
