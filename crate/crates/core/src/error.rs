use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Indices carried in variants are 1-based so messages line up with the CSV files
/// users edit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph is disconnected: {zero_eigenvalues} eigenvalues below the zero threshold (expected exactly 1)")]
    DisconnectedGraph { zero_eigenvalues: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vertex count mismatch: physical graph has {physical} vertices, measurement graph has {measurement}")]
    VertexCountMismatch { physical: usize, measurement: usize },

    #[error("constraint matrix is rank deficient (smallest/largest singular value {ratio:e})")]
    RankDeficientConstraint { ratio: f64 },

    #[error("bandwidth R = {r} out of range 1..={m}")]
    BandOutOfRange { r: usize, m: usize },

    #[error("cost power p = {0} must be >= 1")]
    InvalidPower(f64),

    #[error("frequency band is empty")]
    EmptyBand,

    #[error("information matrix is singular (condition number {cond:e})")]
    SingularInformation { cond: f64 },

    #[error("noise covariance is not valid: {0}")]
    BadCovariance(String),

    #[error("invalid variance {0}: must be positive")]
    InvalidVariance(f64),

    #[error("infeasible budget: D = {d} < R = {r}")]
    InfeasibleBudget { d: usize, r: usize },

    #[error("every removal candidate yields a singular information matrix")]
    AllCandidatesSingular,

    #[error("no feasible random subset after {attempts} attempts")]
    NoFeasibleSubset { attempts: usize },

    #[error("edge set is not a spanning tree: {0}")]
    InvalidTree(String),

    #[error("graph generation failed: {0}")]
    GenerationFailed(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("self-loop at node {node} (line {line})")]
    SelfLoop { line: usize, node: usize },

    #[error("duplicate edge {src}-{dst} (line {line})")]
    DuplicateEdge { line: usize, src: usize, dst: usize },

    #[error("negative weight {weight} (line {line})")]
    NegativeWeight { line: usize, weight: f64 },

    #[error("zero weight on edge {src}-{dst} (line {line}); omit the row instead")]
    ZeroWeight { line: usize, src: usize, dst: usize },

    #[error("node index {index} out of range (line {line})")]
    NodeIndexOutOfRange { line: usize, index: i64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("at grid point {index} (sweep value {value}): {source}")]
    AtGridPoint {
        index: usize,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input data.
    Data,
    /// The numbers themselves do not admit an answer.
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::SelfLoop { .. }
            | Error::DuplicateEdge { .. }
            | Error::NegativeWeight { .. }
            | Error::ZeroWeight { .. }
            | Error::NodeIndexOutOfRange { .. }
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::Config(_)
            | Error::InvalidGraph(_)
            | Error::InvalidVariance(_) => ErrorKind::Data,
            Error::AtGridPoint { source, .. } => source.kind(),
            _ => ErrorKind::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
