use thiserror::Error;

/// Errors shared across the library.
///
/// Numeric routines refuse to guess: degenerate denominators, length
/// mismatches and non-finite inputs surface as errors so the caller decides
/// policy. The training loss is the one exception — see
/// [`crate::soft_rank::LossResult::degenerate`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("input too short: need at least {needed} elements, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("degenerate variance in {what}: denominator is zero")]
    DegenerateVariance { what: &'static str },

    #[error("tied values present: the closed-form rank correlation requires distinct values")]
    TiesPresent,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("label conflict for id {id:?}: stored {stored}, incoming {incoming}")]
    LabelConflict {
        id: String,
        stored: f64,
        incoming: f64,
    },

    #[error("duplicate sample id {id:?}")]
    DuplicateId { id: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("training diverged at epoch {epoch}: loss became non-finite")]
    Divergence { epoch: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_same_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

pub(crate) fn ensure_min_len(got: usize, needed: usize) -> Result<()> {
    if got < needed {
        return Err(Error::TooShort { needed, got });
    }
    Ok(())
}

pub(crate) fn ensure_finite(what: &'static str, values: &[f64]) -> Result<()> {
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what, index });
    }
    Ok(())
}
