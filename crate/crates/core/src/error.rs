use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed distribution spec: {0}")]
    Malformed(String),
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: u64, value: f64 },
    #[error("infeasible distribution: {0}")]
    Infeasible(String),
    #[error("distribution is not critical (mean {mean})")]
    NotCritical { mean: f64 },
    #[error("distribution is concentrated at 0")]
    ConcentratedAtZero,
    #[error("mu_0 = 0: the tree is almost surely infinite")]
    NoLeaves,
    #[error("mu_0 + mu_1 = 1: conditioned trees are degenerate paths")]
    Degenerate,
    #[error("tree size {n} is not attainable (span {span})")]
    InfeasibleSize { n: usize, span: u64 },
    #[error("walk did not terminate within {cap} steps")]
    CapExceeded { cap: usize },
    #[error("no accepted draw in {tries} tries (acceptance rate below {rate_bound:.3e})")]
    MaxTriesExhausted { tries: u64, rate_bound: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("{what} = {value} is outside its domain")]
    OutOfDomain { what: &'static str, value: f64 },
    #[error("invalid degree sequence: {0}")]
    InvalidDegrees(String),
    #[error("word is not in S_d: {0}")]
    NotInSd(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("level {level}: no admissible n below the cap; condition ({condition}) binds")]
    NoFeasibleLevel {
        level: usize,
        condition: &'static str,
    },
}
