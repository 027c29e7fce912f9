use alloc::string::String;
use core::fmt;

/// Errors raised by the numerical core.
///
/// Every variant names the violated precondition; block-level failures carry
/// the `(m, k)` block key.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidParams(String),
    /// δ1 on an element with `k != 0` support needs a truncation window.
    MissingWindow,
    /// The `p`-sum of the defining representation left `[-P, P]`.
    WindowOverflow {
        p: i64,
        bound: i64,
    },
    SupportViolation(String),
    MarginViolation {
        radius: i64,
        margin: i64,
    },
    EigenFailure {
        m: i64,
        k: i64,
    },
    SingularBase {
        m: i64,
        k: i64,
        eigenvalue: f64,
    },
    KappaViolation(String),
    UnresolvedCrossing {
        m: i64,
        k: i64,
        t: f64,
    },
    DegreeMismatch {
        left: usize,
        right: usize,
    },
    DegreeTooLarge(usize),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid model parameters: {msg}"),
            Error::MissingWindow => {
                write!(f, "delta_1 of an element with k != 0 support requires a window")
            }
            Error::WindowOverflow { p, bound } => {
                write!(f, "p-index {p} leaves the grid range [-{bound}, {bound}]")
            }
            Error::SupportViolation(msg) => write!(f, "support violation: {msg}"),
            Error::MarginViolation { radius, margin } => {
                write!(f, "element support radius {radius} exceeds the window margin {margin}")
            }
            Error::EigenFailure { m, k } => write!(f, "eigensolver failed on block ({m}, {k})"),
            Error::SingularBase { m, k, eigenvalue } => {
                write!(f, "base operator singular on block ({m}, {k}): eigenvalue {eigenvalue:e}")
            }
            Error::KappaViolation(msg) => write!(f, "kappa invariant violated: {msg}"),
            Error::UnresolvedCrossing { m, k, t } => {
                write!(f, "unresolved zero crossing on block ({m}, {k}) near t = {t}")
            }
            Error::DegreeMismatch { left, right } => {
                write!(f, "form degrees differ: {left} vs {right}")
            }
            Error::DegreeTooLarge(d) => write!(f, "form degree {d} exceeds the supported maximum"),
        }
    }
}

impl core::error::Error for Error {}
