use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("unknown group element `{0}`")]
    UnknownElement(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("loop `{0}` has a gain in the stabilizer of its vertex")]
    DegenerateLoop(String),
    #[error("position of `{vertex}` leaves its fixed subspace (residual {residual:e})")]
    StabilizerViolation { vertex: String, residual: f64 },
    #[error("{edges} edges exceed the exhaustive enumeration bound of {bound}")]
    TooLarge { edges: usize, bound: usize },
    #[error("no S-directed orientation; blocking vertices {witness:?}")]
    NoOrientation { witness: Vec<String> },
    #[error("block-triangular verification failed at ({row}, {col}): {value:e}")]
    VerificationFailed { row: usize, col: usize, value: f64 },
    #[error("diagonal block {block} is {rows}x{cols}")]
    NonSquareBlock { block: usize, rows: usize, cols: usize },
    #[error("gain graph is not pinned S-isostatic")]
    NotIsostatic,
    #[error("gain graph is not S-Assur")]
    NotAssur,
    #[error("orbit matrix is singular at the sampled configuration")]
    SingularMatrix,
    #[error("group action is not free: {0}")]
    ActionNotFree(String),
    #[error("extension rejected: {0}")]
    GainViolation(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
