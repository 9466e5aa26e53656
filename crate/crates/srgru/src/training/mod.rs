//! Teacher-forced SGD training: data preparation, dropout, embedding
//! initialization, the single-model loop, and the tied bidirectional pair.

pub mod config;
pub mod data;
pub mod dropout;
pub mod embed;
pub mod tied;
pub mod train;

pub use config::TrainConfig;
pub use data::{decode_groups, prepare, DecodeGroup, Instance, PreparedCorpus};
pub use dropout::{apply_dropout, dropout_mask, sentence_masks};
pub use embed::{init_embeddings, EmbedCoverage};
pub use tied::{tied_gradient_check, train_tied_backward, TiedPair, TIED_SHARED};
pub use train::{
    greedy_bleu, mean_nll, train, EpochRow, TrainHistory, HISTORY_FORMAT,
};
