use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FheError {
    #[error("{0} is not invertible modulo {1}")]
    NotInvertible(String, String),
    #[error("bad modulus: {0}")]
    BadModulus(String),
    #[error("no value found: {0}")]
    NotFound(String),
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("automorphism exponent {0} is not a unit modulo 2n")]
    BadExponent(i64),
    #[error("transform tables do not match the operand")]
    TableMismatch,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("gadget base^level does not divide the modulus")]
    InexactGadget,
    #[error("RNS bases share a modulus")]
    BaseOverlap,
    #[error("auxiliary modulus is unusable: {0}")]
    BadAuxModulus(String),
    #[error("input too large for exact conversion")]
    InputTooLarge,
    #[error("target base is not a sub-base of the source")]
    NotSubBase,
    #[error("expected {expected} keys, got {got}")]
    KeyCountMismatch { expected: usize, got: usize },
    #[error("gamma too small for the accumulated error")]
    GammaTooSmall,
    #[error("key mismatch: {0}")]
    KeyMismatch(String),
    #[error("target modulus too small: {0}")]
    TargetTooSmall(String),
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("lookup table spans {0} values, more than half the plaintext space")]
    DomainTooLarge(usize),
    #[error("unsupported gate {0}")]
    UnsupportedGate(String),
    #[error("no multiplicative level left")]
    LevelExhausted,
    #[error("no rotation key for exponent {0}")]
    MissingGaloisKey(u64),
    #[error("scaled plaintext overflows the modulus")]
    ScaleOverflow,
    #[error("{0} does not divide the ring degree")]
    BadSubring(usize),
    #[error("bad target modulus: {0}")]
    BadTargetModulus(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, FheError>;
