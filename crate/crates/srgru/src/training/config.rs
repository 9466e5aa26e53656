//! Training hyperparameters and their validation.

use crate::error::Error;
use crate::Result;

/// Knobs for the teacher-forced SGD loop. Defaults follow the evaluation
/// protocol: hidden and embedding size 80, dropout 0.7, penalty gradient
/// every 10 sentences, patience 5, 5 seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub embed_size: usize,
    pub learn_rate: f64,
    /// Learning-rate multiplier applied after each epoch without
    /// validation-BLEU improvement. 1.0 disables the schedule.
    pub lr_decay: f64,
    /// Drop probability for inverted dropout on the input embedding and the
    /// pre-output hidden state. Fresh mask per timestep, training only.
    pub dropout_rate: f64,
    pub l2_coeff: f64,
    /// Sentences between ℓ2 penalty-gradient applications.
    pub l2_every: usize,
    pub max_epochs: usize,
    /// Epochs without validation-BLEU improvement before stopping.
    pub patience: usize,
    /// Independent runs in the multi-seed protocol.
    pub seeds: usize,
    /// Global-norm gradient clip. Non-finite or 0 disables clipping.
    pub grad_clip: f64,
    /// Length cap for validation greedy decoding and generation.
    pub max_decode_len: usize,
    /// Include bias vectors in every affine map (the equations have none).
    pub biases: bool,
    /// Stop once mean per-token training NLL falls below this, keeping the
    /// current parameters. Overfitting utility for memorization runs.
    pub stop_train_nll: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_size: 80,
            embed_size: 80,
            learn_rate: 0.1,
            lr_decay: 0.5,
            dropout_rate: 0.7,
            l2_coeff: 1e-5,
            l2_every: 10,
            max_epochs: 100,
            patience: 5,
            seeds: 5,
            grad_clip: 5.0,
            max_decode_len: 100,
            biases: false,
            stop_train_nll: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.hidden_size == 0 || self.embed_size == 0 {
            return fail("hidden_size and embed_size must be positive");
        }
        if !(self.dropout_rate >= 0.0 && self.dropout_rate < 1.0) {
            return fail("dropout_rate must satisfy 0 <= rate < 1");
        }
        if !(self.learn_rate > 0.0 && self.learn_rate.is_finite()) {
            return fail("learn_rate must be positive and finite");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return fail("lr_decay must lie in (0, 1]");
        }
        if self.l2_coeff < 0.0 || !self.l2_coeff.is_finite() {
            return fail("l2_coeff must be non-negative and finite");
        }
        if self.l2_every == 0 {
            return fail("l2_every must be positive");
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be positive");
        }
        if self.patience == 0 {
            return fail("patience must be at least 1");
        }
        if self.seeds == 0 {
            return fail("seeds must be at least 1");
        }
        if self.max_decode_len == 0 {
            return fail("max_decode_len must be positive");
        }
        if let Some(t) = self.stop_train_nll {
            if !(t > 0.0 && t.is_finite()) {
                return fail("stop_train_nll must be positive and finite");
            }
        }
        Ok(())
    }
}
