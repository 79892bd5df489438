use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid brick shape: {0}")]
    InvalidShape(String),

    #[error("block index out of range: ({i1},{j1}):({i2},{j2}) with delta = {delta}")]
    BlockIndex {
        i1: usize,
        j1: usize,
        i2: usize,
        j2: usize,
        delta: usize,
    },

    #[error("mixing layer must be invertible")]
    NotInvertible,

    #[error("modulus {modulus:#x} is not an irreducible polynomial of degree {m}")]
    NotIrreducible { m: u32, modulus: u32 },

    #[error("minor enumeration limited to order <= {max}, got {order}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("field F_2^{m} has too few elements for an MDS matrix of order {order}")]
    FieldTooSmall { m: u32, order: usize },

    #[error("matrix is not MDS")]
    NotMds,

    #[error("set must be nonempty")]
    EmptySet,

    #[error("{what}: {got} exceeds the desk-scale limit {limit}")]
    GuardExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("search budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}
