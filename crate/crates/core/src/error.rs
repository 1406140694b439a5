use thiserror::Error;

/// Errors raised by parsing, transformation and evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error(
        "illegal product at {line}:{col}: an expectation can only be scaled by an arithmetic term"
    )]
    IllegalProduct { line: usize, col: usize },
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(String),
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("reserved variable `{0}` cannot appear in a program")]
    ReservedName(String),
    #[error("program contains a while loop")]
    ContainsLoop,
    #[error("program is not a while loop")]
    NotALoop,
    #[error("expectation is not quantifier-free")]
    NotQuantifierFree,
    #[error("formula is not in prenex form")]
    NotPrenex,
    #[error("normal form needs {found} summands, cap is {cap}")]
    SummandBlowup { found: usize, cap: usize },
    #[error("term exceeds {cap} nodes")]
    TermTooLarge { cap: usize },
    #[error("fuel exceeded: {0}")]
    FuelExceeded(String),
    #[error("index {index} is out of range for a sequence of length {length}")]
    IndexOutOfRange { index: usize, length: usize },
    #[error("free variable `{0}` is not among the encoded variables")]
    FreeVarsOutsideVarSet(String),
    #[error("decode error: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, Error>;
