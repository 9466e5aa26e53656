//! Beam-search over-generation, slot-error scoring, reranking, and the
//! full act-to-utterance pipeline.

pub mod beam;
pub mod err;
pub mod generate;
pub mod rerank;

pub use beam::{beam_search, greedy_decode, BeamOutcome, Hypothesis, StepAudit};
pub use err::{compute_err, SlotStats};
pub use generate::{
    generate, parse_realizations, read_realizations, render_realizations, write_realizations,
    GenOptions, GenerateOutcome, Realization, RealizationBlock, StoredRealization,
    REALIZATIONS_FORMAT,
};
pub use rerank::{rerank, reverse_ids, RerankCandidate};
