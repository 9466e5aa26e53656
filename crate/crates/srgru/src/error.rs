use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Dialogue-act string did not match the `act(slot=value; ...)` grammar.
    #[error("dialogue act parse error at byte {offset}: {message}")]
    DaParse { offset: usize, message: String },

    /// A dataset record was structurally malformed.
    #[error("dataset record {index}: {message}")]
    BadRecord { index: usize, message: String },

    /// A serialized artifact (model, vocab, schema, realizations) could not be read.
    #[error("{path}: {message}")]
    BadArtifact { path: String, message: String },

    /// Artifacts that must agree (model vs vocab/schema hashes, hypothesis vs
    /// reference alignment) do not.
    #[error("artifact mismatch: {0}")]
    Mismatch(String),

    /// A dialogue act uses an act type the frozen schema has never seen.
    #[error("unknown act type `{0}` (not in schema)")]
    UnknownActType(String),

    /// A numeric quantity that must stay finite became NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}, sentence {sentence}: loss = {loss}")]
    Diverged {
        epoch: usize,
        sentence: usize,
        loss: f64,
    },

    /// Invalid configuration (bad flag values, impossible sizes, missing paths).
    #[error("configuration error: {0}")]
    Config(String),

    /// A verification run (gradient check) found errors above tolerance.
    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
