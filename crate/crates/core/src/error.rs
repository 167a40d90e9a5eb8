use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("undefined alpha: the Jordan type is empty")]
    UndefinedAlpha,

    #[error("not a sub-multiset: {sub} is not contained in {sup}")]
    NotSubMultiset { sup: String, sub: String },

    #[error("invalid partition syntax {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),

    #[error("matrix not nilpotent")]
    NotNilpotent,

    #[error("matrix not invertible")]
    Singular,

    #[error("subspace is not invariant under the operator")]
    NotInvariant,

    #[error("psl equals sl; use restrict_to_sl")]
    PslEqualsSl,

    #[error("divisibility violated: {0}")]
    Divisibility(String),

    #[error("inconsistent input type: {0}")]
    InconsistentInput(String),

    #[error("bad characteristic: p = {0} is not good for {1}")]
    BadCharacteristic(u32, String),

    #[error("partition {partition} is not admissible for {group}")]
    Inadmissible { partition: String, group: String },

    #[error("module {module} is incompatible with {group}")]
    IncompatibleModule { module: String, group: String },

    #[error("module decomposition violated: {0}")]
    DecompositionViolated(String),

    #[error("unknown {kind} {input:?}")]
    Unknown { kind: &'static str, input: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
