//! Teacher-forced SGD with dropout, scheduled ℓ2, gradient clipping,
//! learning-rate decay on stagnation, and best-validation-BLEU checkpointing.

use std::path::Path;

use crate::cells::{
    backward_sequence, forward_sequence, sequence_nll, CellKind, CellSpec, CellView, Dims,
    ModelParams, Param,
};
use crate::corpus::{lexicalize, tokenize, Vocab};
use crate::decoding::greedy_decode;
use crate::error::Error;
use crate::math::{ParamStore, Rng};
use crate::metrics::corpus_bleu;
use crate::Result;

use super::config::TrainConfig;
use super::data::{DecodeGroup, Instance, PreparedCorpus};
use super::dropout::sentence_masks;
use super::embed::{init_embeddings, EmbedCoverage};

pub const HISTORY_FORMAT: &str = "srgru-history v1";

/// One epoch's summary line.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    /// Mean per-token training NLL (teacher forcing, dropout active).
    pub train_nll: f64,
    /// Mean per-token validation NLL (no dropout).
    pub valid_nll: f64,
    /// Corpus BLEU of greedy decodes against the validation references.
    pub valid_bleu: f64,
}

/// Per-epoch trace of a run plus which epoch's checkpoint was kept.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub rows: Vec<EpochRow>,
    pub best_epoch: usize,
    pub best_valid_bleu: f64,
    /// Pretrained-embedding coverage, when a vector file was supplied.
    pub coverage: Option<EmbedCoverage>,
}

impl TrainHistory {
    /// Sidecar text: header, then one epoch per line with tab-separated
    /// epoch, train loss, validation loss, validation BLEU.
    pub fn render(&self) -> String {
        let mut out = String::from(HISTORY_FORMAT);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                row.epoch, row.train_nll, row.valid_nll, row.valid_bleu
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

pub(crate) struct UpdateCtx<'a> {
    pub cfg: &'a TrainConfig,
    pub lr: f64,
    pub epoch: usize,
}

/// One sentence-minibatch SGD update against `spec`'s slice of `store`.
/// Returns the sentence NLL under the sampled dropout masks.
pub(crate) fn sgd_update(
    store: &mut ParamStore,
    spec: &CellSpec,
    ids: &[usize],
    z: &[f64],
    ctx: &UpdateCtx,
    rng: &mut Rng,
    update_in_epoch: usize,
    sentence: usize,
) -> Result<f64> {
    let masks = sentence_masks(
        ids.len() - 1,
        spec.dims.embed,
        spec.dims.hidden,
        ctx.cfg.dropout_rate,
        rng,
    );
    let view = spec.view(store);
    let (loss, traces) = forward_sequence(&view, ids, z, masks.as_deref())?;
    if !loss.is_finite() {
        return Err(Error::Diverged { epoch: ctx.epoch, sentence, loss });
    }
    let grads = backward_sequence(&view, &traces, ids, z)?;
    store.zero_grads();
    grads.accumulate(spec, store);
    if (update_in_epoch + 1) % ctx.cfg.l2_every == 0 {
        store.add_l2_penalty_grad(ctx.cfg.l2_coeff);
    }
    store.clip_grads(ctx.cfg.grad_clip);
    store.sgd_step(ctx.lr);
    Ok(loss)
}

/// Mean per-token NLL of `instances`, dropout off.
pub fn mean_nll(view: &CellView, instances: &[Instance]) -> Result<f64> {
    let mut sum = 0.0;
    let mut tokens = 0usize;
    for inst in instances {
        sum += sequence_nll(view, &inst.ids, &inst.z)?;
        tokens += inst.ids.len() - 1;
    }
    if tokens == 0 {
        return Err(Error::Mismatch("no tokens to score".to_string()));
    }
    Ok(sum / tokens as f64)
}

/// Greedy-decodes every group, lexicalizes, and scores corpus BLEU against
/// the raw references. This is the model-selection metric.
pub fn greedy_bleu(
    view: &CellView,
    groups: &[DecodeGroup],
    vocab: &Vocab,
    max_len: usize,
) -> Result<f64> {
    let mut hyps = Vec::with_capacity(groups.len());
    let mut refs = Vec::with_capacity(groups.len());
    for group in groups {
        let ids = greedy_decode(view, &group.z, max_len);
        let lex = lexicalize(&vocab.decode(&ids), &group.da);
        hyps.push(tokenize(&lex.text));
        refs.push(group.ref_tokens.clone());
    }
    Ok(corpus_bleu(&hyps, &refs, false)?.bleu)
}

/// Trains one model. Per sentence: dropout masks, forward, backward, ℓ2 on
/// schedule, clip, SGD step. Per epoch: validation loss + greedy BLEU; the
/// checkpoint with the highest validation BLEU is returned. The learning
/// rate multiplies by `lr_decay` after each epoch without improvement, and
/// training stops after `patience` such epochs, at `max_epochs`, or when
/// `stop_train_nll` is reached (returning the current parameters).
pub fn train(
    kind: CellKind,
    data: &PreparedCorpus,
    config: &TrainConfig,
    seed: u64,
    pretrained: Option<&Path>,
) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    if data.train.is_empty() {
        return Err(Error::Config("no training instances".to_string()));
    }
    if data.valid_groups.is_empty() {
        return Err(Error::Config(
            "no validation act could be encoded against the schema".to_string(),
        ));
    }
    let dims = Dims {
        vocab: data.vocab.len(),
        embed: config.embed_size,
        hidden: config.hidden_size,
        da: data.schema.size(),
    };
    let mut rng = Rng::new(seed);
    let mut model = ModelParams::init(kind, dims, config.biases, &mut rng);
    let (embed, cov) = init_embeddings(&data.vocab, pretrained, config.embed_size, &mut rng)?;
    *model.value_mut(Param::Embed) = embed;
    model.vocab_hash = data.vocab.hash();
    model.schema_hash = data.schema.hash();
    let spec = model.spec.clone();

    let mut history = TrainHistory {
        rows: Vec::new(),
        best_epoch: 0,
        best_valid_bleu: f64::NEG_INFINITY,
        coverage: pretrained.map(|_| cov),
    };
    let mut best: Option<ModelParams> = None;
    let mut lr = config.learn_rate;
    let mut stagnant = 0usize;
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    for epoch in 1..=config.max_epochs {
        rng.shuffle(&mut order);
        let ctx = UpdateCtx { cfg: config, lr, epoch };
        let mut loss_sum = 0.0;
        let mut tokens = 0usize;
        for (k, &i) in order.iter().enumerate() {
            let inst = &data.train[i];
            loss_sum += sgd_update(&mut model.store, &spec, &inst.ids, &inst.z, &ctx, &mut rng, k, i)?;
            tokens += inst.ids.len() - 1;
        }
        let train_nll = loss_sum / tokens as f64;
        let view = spec.view(&model.store);
        let valid_nll = mean_nll(&view, &data.valid)?;
        let valid_bleu = greedy_bleu(&view, &data.valid_groups, &data.vocab, config.max_decode_len)?;
        history.rows.push(EpochRow { epoch, train_nll, valid_nll, valid_bleu });
        if valid_bleu > history.best_valid_bleu {
            history.best_valid_bleu = valid_bleu;
            history.best_epoch = epoch;
            best = Some(model.clone());
            stagnant = 0;
        } else {
            stagnant += 1;
            lr *= config.lr_decay;
            if stagnant >= config.patience {
                break;
            }
        }
        if config.stop_train_nll.is_some_and(|t| train_nll < t) {
            history.best_epoch = epoch;
            history.best_valid_bleu = valid_bleu;
            best = Some(model.clone());
            break;
        }
    }
    Ok((best.expect("at least one epoch runs"), history))
}
