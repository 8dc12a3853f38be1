use alloc::string::String;

/// Errors raised anywhere in the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M[i][j] - conj(M[j][i])| = {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular linear system: {0}")]
    Singular(&'static str),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("parameter `{name}` out of range: {value} (allowed {allowed})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("state fully filtered: transmission probability {0:.3e}")]
    FullyFiltered(f64),

    #[error("vanishing denominator in {0}")]
    VanishingDenominator(&'static str),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("count table: {0}")]
    Counts(String),

    #[error("too many failed Monte Carlo trials: {skipped} of {total}")]
    TooManySkips { skipped: usize, total: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            allowed: "[0, 1]",
        })
    }
}
