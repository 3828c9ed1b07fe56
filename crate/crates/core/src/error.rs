use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("wire {wire} out of range for {n} wires")]
    WireOutOfRange { wire: usize, n: usize },

    #[error("wire {0} listed more than once")]
    DuplicateWire(usize),

    #[error("oracle cap exceeded: dimension {dim} > {cap}")]
    OracleCapExceeded { dim: usize, cap: usize },

    #[error("unknown gate id `{0}`")]
    UnknownGate(String),

    #[error("matrix is singular")]
    Singular,

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("inputs do not commute: commutator norm {norm:.6}")]
    NonCommuting { norm: f64 },

    #[error("group order exceeds cap of {cap}")]
    GroupOrderCap { cap: usize },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("gates use different Q matrices; a single shared Q is required for the whole gate set")]
    MixedQ,

    #[error("property (G) violated: max sum {max_sum:.6} > 1")]
    PropertyGViolated { max_sum: f64 },

    #[error("coin bits m = {m} below the minimum {min}")]
    CoinBitsTooSmall { m: u32, min: u32 },

    #[error("observable acts on {m} qubits, above the cap of {cap}")]
    ObservableTooLarge { m: usize, cap: usize },

    #[error("expectation requires family-four gates: {0}")]
    NotFamilyFour(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
