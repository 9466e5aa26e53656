//! Semantic-refinement gated recurrent generators for task-oriented dialogue.
//!
//! The crate trains recurrent language generators conditioned on a dialogue
//! act, decodes candidate utterances with beam search, reranks them by a
//! combined likelihood and slot-error score, and reports corpus BLEU and
//! slot error rate. Everything runs from a single `srgru` binary; the library
//! layers are usable on their own.

pub mod cells;
pub mod cli;
pub mod corpus;
pub mod decoding;
pub mod error;
pub mod math;
pub mod metrics;
pub mod training;

pub use error::{Error, Result};
