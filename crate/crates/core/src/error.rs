use thiserror::Error;

/// Errors raised by graph construction, identification and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FidError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid node label `{0}`: labels must be non-empty and use only [A-Za-z0-9_.]")]
    InvalidLabel(String),

    #[error("duplicate node `{0}`")]
    DuplicateNode(String),

    #[error("graphs are limited to {max} nodes, got {got}")]
    TooManyNodes { got: usize, max: usize },

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("directed cycle through `{0}`")]
    Cycle(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("node `{node}` is not fixable: its descendant `{blocker}` shares its district")]
    NotFixable { node: String, blocker: String },

    #[error("node `{0}` is not random")]
    NotRandom(String),

    #[error("invalid arguments: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("node sets differ between the two graphs")]
    NodeSetMismatch,

    #[error("the pair set is empty")]
    EmptyPairs,

    #[error("CPDAG has no consistent DAG extension")]
    InconsistentCpdag,

    #[error("retry budget of {0} attempts exhausted")]
    BudgetExhausted(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FidError {
    fn from(e: std::io::Error) -> Self {
        FidError::Io(e.to_string())
    }
}

impl From<csv::Error> for FidError {
    fn from(e: csv::Error) -> Self {
        FidError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FidError>;
