use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResourceError {
    #[error("binary clause pool exceeded {cap} clauses at iteration {iteration}")]
    PoolCap { cap: usize, iteration: usize },
    #[error("mode enumeration for {pred} needs 2^{arity} modes; the limit is arity {limit}")]
    ModeArity {
        pred: String,
        arity: usize,
        limit: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModesError {
    #[error("malformed modes file: {0}")]
    Malformed(String),
    #[error("bad relation indicator `{0}`")]
    BadIndicator(String),
    #[error("unknown relation `{0}`")]
    UnknownPred(String),
    #[error("position {position} out of range for {pred}")]
    Position { pred: String, position: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("resource limit: {0}")]
    Resource(#[from] ResourceError),
    #[error("modes: {0}")]
    Modes(#[from] ModesError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
