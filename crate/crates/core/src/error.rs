use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("vertex {vertex} out of range 1..={d}")]
    InvalidVertex { vertex: usize, d: usize },
    #[error("({0}, {1}) is not an edge")]
    NotAnEdge(usize, usize),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("negative coefficient {value} at index {index}")]
    NegativeCoefficient { index: usize, value: f64 },
    #[error("trees are not a single re-anchoring pair: {0}")]
    NotSingleMove(String),
    #[error("means differ: {0} vs {1}")]
    MeansDiffer(f64, f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("antisymmetry violated between shapes {0} and {1}")]
    Antisymmetry(String, String),
}

pub type Result<T> = std::result::Result<T, Error>;
