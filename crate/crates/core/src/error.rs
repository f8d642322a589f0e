use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("relation contains a cycle through {0}")]
    Cycle(String),
    #[error("size {size} outside supported range {min}..={max}")]
    Size { size: usize, min: usize, max: usize },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("({0}, {1}) is not a strict relation of the poset")]
    NotARelation(String, String),
    #[error("functional is not of all-ones form")]
    Form,
    #[error("functional is not small")]
    NotSmall,
    #[error("functional is not Frobenius (kernel dimension {0})")]
    NotFrobenius(usize),
    #[error("hypothesis failed: {0}")]
    Condition(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("rule {rule}: {reason}")]
    Rule { rule: String, reason: String },
    #[error("toral functional undefined: step {step} uses rule {rule}")]
    FunctionalUndefined { step: usize, rule: String },
    #[error("line {line}, token `{token}`: {msg}")]
    Parse { line: usize, token: String, msg: String },
    #[error("no Frobenius functional found after {0} attempts")]
    FunctionalSearchExhausted(usize),
    #[error("invalid rational `{0}`")]
    InvalidRational(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
