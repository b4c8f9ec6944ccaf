use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, KmError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KmError {
    #[error("cannot parse group spec {spec:?}: {reason}")]
    GroupParse { spec: String, reason: String },
    #[error("cyclic factor of order 0")]
    ZeroOrder,
    #[error("group of {size} cells exceeds the size cap of {cap}")]
    SizeOverflow { size: u128, cap: usize },
    #[error("operands live in different groups ({left} vs {right})")]
    GroupMismatch { left: String, right: String },
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("duplicate element {0}")]
    DuplicateElement(String),
    #[error("empty set has no normalised indicator")]
    EmptySet,
    #[error("dilation factor {k} is not coprime to |G| = {size}")]
    NotCoprime { k: i64, size: usize },
    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),
    #[error("function is not a probability measure: {0}")]
    NotAMeasure(String),
    #[error("moment order {k} exceeds the cap {cap}")]
    MomentCap { k: u32, cap: u32 },
    #[error("{freqs} frequencies but {widths} widths")]
    LengthMismatch { freqs: usize, widths: usize },
    #[error("width {0} outside [0, 2]")]
    WidthOutOfRange(f64),
    #[error("dilation factor {0} must be positive")]
    InvalidDilation(f64),
    #[error("Bohr set has empty frequency set")]
    EmptyFrequencySet,
    #[error("no regular dilate found in [1/2, 1]: {0}")]
    RegularSearchFailed(String),
    #[error("group {0} is not cyclic of prime order")]
    NonPrimeModulus(String),
    #[error("group {0} is not F_q^n with q an odd prime")]
    NotVectorSpace(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("constant-busting instance ({constant}): {detail}")]
    ConstantBusting { constant: String, detail: String },
    #[error("shift search exhausted after {tried} candidates; best density margin {best_density_margin:.3e}, best inner margin {best_inner_margin:.3e}")]
    SiftExhausted {
        tried: u64,
        best_density_margin: f64,
        best_inner_margin: f64,
    },
    #[error("almost-periodicity oracle found nothing within budget (best margin {best_margin:.3e})")]
    OracleBudgetExceeded { best_margin: f64 },
    #[error("narrowing trichotomy failed: {0}")]
    TrichotomyFailure(String),
    #[error("element {value} outside [1, {n}]")]
    OutOfRange { value: u64, n: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
