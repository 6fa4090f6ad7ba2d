use crate::coeffs::CoeffKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Degree/order pair outside the triangular coefficient layout.
    #[error("degree/order out of range: l={l}, m={m}, bandlimit n={n}")]
    IndexOutOfRange { l: usize, m: i64, n: usize },

    /// Rotation index too large for the exact 64-bit integer construction of
    /// the Givens sines and cosines.
    #[error("rotation index exceeds the 64-bit exactness bound: j={j}, m={m}")]
    ExactnessOverflow { j: usize, m: usize },

    #[error("coefficient kind mismatch: expected {expected:?}, got {actual:?}")]
    KindMismatch {
        expected: CoeffKind,
        actual: CoeffKind,
    },

    #[error("bandlimit mismatch: plan n={plan_n}, input n={input_n}")]
    BandlimitMismatch { plan_n: usize, input_n: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
