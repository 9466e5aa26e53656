//! The tied bidirectional pair: a forward and a backward context cell whose
//! refinement-gate matrices W_dz and W_dh live in shared storage, so every
//! update from either direction lands in both views.

use std::path::Path;

use crate::cells::{CellKind, CellSpec, CellView, Dims, ModelParams, Param};
use crate::decoding::reverse_ids;
use crate::error::Error;
use crate::math::check::{finite_diff_grad, relative_error};
use crate::math::{ParamStore, Rng};
use crate::Result;

use super::config::TrainConfig;
use super::data::PreparedCorpus;
use super::embed::init_embeddings;
use super::train::{greedy_bleu, mean_nll, sgd_update, EpochRow, TrainHistory, UpdateCtx};

/// Roles whose storage the two directions share.
pub const TIED_SHARED: [Param; 2] = [Param::Wdz, Param::Wdh];

/// Forward + backward SRGRU-Context models over one parameter store.
/// `fw.W_dz` and `bw.W_dz` resolve to the same matrix (likewise W_dh); no
/// sequence of updates can make the two views diverge.
#[derive(Debug, Clone)]
pub struct TiedPair {
    pub store: ParamStore,
    pub fw: CellSpec,
    pub bw: CellSpec,
    pub vocab_hash: String,
    pub schema_hash: String,
}

impl TiedPair {
    pub fn init(dims: Dims, biases: bool, rng: &mut Rng) -> Self {
        let fw = CellSpec::prefixed(CellKind::SrgruContext, dims, biases, "fw", &TIED_SHARED);
        let bw = CellSpec::prefixed(CellKind::SrgruContext, dims, biases, "bw", &TIED_SHARED);
        let mut store = ParamStore::new();
        fw.insert_params(&mut store, rng);
        // Shared keys already exist and are skipped, tying the storage.
        bw.insert_params(&mut store, rng);
        TiedPair {
            store,
            fw,
            bw,
            vocab_hash: String::new(),
            schema_hash: String::new(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.fw.dims
    }

    pub fn forward_view(&self) -> CellView<'_> {
        self.fw.view(&self.store)
    }

    pub fn backward_view(&self) -> CellView<'_> {
        self.bw.view(&self.store)
    }

    /// Deep copy of one direction as a standalone model (for saving or for
    /// untied use; edits to the copy do not touch the pair).
    pub fn standalone(&self, backward: bool) -> ModelParams {
        let spec = if backward { &self.bw } else { &self.fw };
        let standard = CellSpec::standard(spec.kind, spec.dims, spec.biases);
        let mut store = ParamStore::new();
        for role in spec.roles() {
            store.insert(standard.key(role), self.store.value(spec.key(role)).clone());
        }
        ModelParams {
            spec: standard,
            store,
            vocab_hash: self.vocab_hash.clone(),
            schema_hash: self.schema_hash.clone(),
        }
    }

    /// Writes the two directions as ordinary model files.
    pub fn save(&self, fw_path: &Path, bw_path: &Path) -> Result<()> {
        self.standalone(false).save(fw_path)?;
        self.standalone(true).save(bw_path)
    }

    /// Rebuilds the pair from two model files, re-tying the shared matrices
    /// after verifying they are bit-identical across the files.
    pub fn load(fw_path: &Path, bw_path: &Path) -> Result<Self> {
        let fw_model = ModelParams::load(fw_path)?;
        let bw_model = ModelParams::load(bw_path)?;
        for (m, path) in [(&fw_model, fw_path), (&bw_model, bw_path)] {
            if m.kind() != CellKind::SrgruContext {
                return Err(Error::BadArtifact {
                    path: path.display().to_string(),
                    message: format!("tied pair needs srgru-context, found {}", m.kind().label()),
                });
            }
        }
        let mismatch = |what: &str| {
            Err(Error::Mismatch(format!(
                "tied pair files disagree on {what}: {} vs {}",
                fw_path.display(),
                bw_path.display()
            )))
        };
        if fw_model.dims() != bw_model.dims() || fw_model.spec.biases != bw_model.spec.biases {
            return mismatch("dimensions");
        }
        if fw_model.vocab_hash != bw_model.vocab_hash
            || fw_model.schema_hash != bw_model.schema_hash
        {
            return mismatch("vocab/schema hashes");
        }
        for role in TIED_SHARED {
            let a = fw_model.value(role);
            let b = bw_model.value(role);
            let equal = a
                .data()
                .iter()
                .zip(b.data())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            if !equal {
                return mismatch(role.name());
            }
        }
        let dims = fw_model.dims();
        let biases = fw_model.spec.biases;
        let fw = CellSpec::prefixed(CellKind::SrgruContext, dims, biases, "fw", &TIED_SHARED);
        let bw = CellSpec::prefixed(CellKind::SrgruContext, dims, biases, "bw", &TIED_SHARED);
        let mut store = ParamStore::new();
        for role in fw.roles() {
            store.insert(fw.key(role), fw_model.value(role).clone());
        }
        for role in bw.roles() {
            let key = bw.key(role);
            if !store.contains(key) {
                store.insert(key, bw_model.value(role).clone());
            }
        }
        Ok(TiedPair {
            store,
            fw,
            bw,
            vocab_hash: fw_model.vocab_hash,
            schema_hash: fw_model.schema_hash,
        })
    }
}

/// Trains the tied pair. The backward model sees every sentence with its
/// emitted tokens reversed between the sentinels. Joint mode (default)
/// alternates one forward update and one backward update per sentence;
/// sequential mode trains the forward direction to completion, restores its
/// best checkpoint, then trains the backward direction (whose updates keep
/// flowing into the shared gate matrices).
///
/// Model selection tracks forward validation BLEU in joint mode and during
/// the sequential forward phase; the sequential backward phase tracks
/// backward validation NLL.
pub fn train_tied_backward(
    data: &PreparedCorpus,
    config: &TrainConfig,
    seed: u64,
    pretrained: Option<&Path>,
    sequential: bool,
) -> Result<(TiedPair, TrainHistory)> {
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
    let mut pair = TiedPair::init(dims, config.biases, &mut rng);
    let (embed_fw, cov) = init_embeddings(&data.vocab, pretrained, config.embed_size, &mut rng)?;
    let (embed_bw, _) = init_embeddings(&data.vocab, pretrained, config.embed_size, &mut rng)?;
    *pair.store.value_mut(pair.fw.key(Param::Embed)) = embed_fw;
    *pair.store.value_mut(pair.bw.key(Param::Embed)) = embed_bw;
    pair.vocab_hash = data.vocab.hash();
    pair.schema_hash = data.schema.hash();

    let reversed: Vec<Vec<usize>> = data.train.iter().map(|i| reverse_ids(&i.ids)).collect();
    let reversed_valid: Vec<(Vec<usize>, usize)> = data
        .valid
        .iter()
        .map(|i| (reverse_ids(&i.ids), i.group))
        .collect();

    let mut history = TrainHistory {
        rows: Vec::new(),
        best_epoch: 0,
        best_valid_bleu: f64::NEG_INFINITY,
        coverage: pretrained.map(|_| cov),
    };
    let mut best: Option<TiedPair> = None;
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut epoch = 0usize;

    // Phase layout: joint mode is a single phase touching both directions;
    // sequential mode is a forward-only phase then a backward-only phase.
    let phases: &[(bool, bool)] = if sequential { &[(true, false), (false, true)] } else { &[(true, true)] };
    for &(do_fw, do_bw) in phases {
        let mut lr = config.learn_rate;
        let mut stagnant = 0usize;
        let mut best_bw_nll = f64::INFINITY;
        for _ in 0..config.max_epochs {
            epoch += 1;
            rng.shuffle(&mut order);
            let ctx = UpdateCtx { cfg: config, lr, epoch };
            let mut loss_sum = 0.0;
            let mut tokens = 0usize;
            let mut updates = 0usize;
            for &i in &order {
                let inst = &data.train[i];
                if do_fw {
                    loss_sum +=
                        sgd_update(&mut pair.store, &pair.fw, &inst.ids, &inst.z, &ctx, &mut rng, updates, i)?;
                    tokens += inst.ids.len() - 1;
                    updates += 1;
                }
                if do_bw {
                    loss_sum +=
                        sgd_update(&mut pair.store, &pair.bw, &reversed[i], &inst.z, &ctx, &mut rng, updates, i)?;
                    tokens += reversed[i].len() - 1;
                    updates += 1;
                }
            }
            let train_nll = loss_sum / tokens as f64;
            let fw_view = pair.fw.view(&pair.store);
            let valid_nll = mean_nll(&fw_view, &data.valid)?;
            let valid_bleu =
                greedy_bleu(&fw_view, &data.valid_groups, &data.vocab, config.max_decode_len)?;
            history.rows.push(EpochRow { epoch, train_nll, valid_nll, valid_bleu });

            let improved = if do_fw {
                valid_bleu > history.best_valid_bleu
            } else {
                // Backward-only phase: select on backward validation NLL.
                let bw_view = pair.bw.view(&pair.store);
                let mut sum = 0.0;
                let mut toks = 0usize;
                for (ids, group) in &reversed_valid {
                    sum += crate::cells::sequence_nll(&bw_view, ids, &data.valid_groups[*group].z)?;
                    toks += ids.len() - 1;
                }
                let bw_nll = sum / toks as f64;
                if bw_nll < best_bw_nll {
                    best_bw_nll = bw_nll;
                    true
                } else {
                    false
                }
            };
            if improved {
                if do_fw {
                    history.best_valid_bleu = valid_bleu;
                    history.best_epoch = epoch;
                }
                best = Some(pair.clone());
                stagnant = 0;
            } else {
                stagnant += 1;
                lr *= config.lr_decay;
                if stagnant >= config.patience {
                    break;
                }
            }
            if config.stop_train_nll.is_some_and(|t| train_nll < t) {
                best = Some(pair.clone());
                if do_fw {
                    history.best_epoch = epoch;
                    history.best_valid_bleu = valid_bleu;
                }
                break;
            }
        }
        // The next phase continues from the best checkpoint of this one.
        pair = best.clone().expect("at least one epoch runs");
    }
    Ok((pair, history))
}

/// Finite-difference certification of the joint tied objective
/// NLL_fw(sentence) + NLL_bw(reversed sentence): analytic gradients from
/// both directions accumulate into the shared store and must match central
/// differences on every parameter, shared ones included.
pub fn tied_gradient_check(
    pair: &mut TiedPair,
    ids: &[usize],
    z: &[f64],
    eps: f64,
) -> Result<Vec<(String, f64)>> {
    use crate::cells::{backward_sequence, forward_sequence};
    let rev = reverse_ids(ids);
    let fw_spec = pair.fw.clone();
    let bw_spec = pair.bw.clone();

    pair.store.zero_grads();
    let (_, traces) = forward_sequence(&fw_spec.view(&pair.store), ids, z, None)?;
    let grads = backward_sequence(&fw_spec.view(&pair.store), &traces, ids, z)?;
    grads.accumulate(&fw_spec, &mut pair.store);
    let (_, traces) = forward_sequence(&bw_spec.view(&pair.store), &rev, z, None)?;
    let grads = backward_sequence(&bw_spec.view(&pair.store), &traces, &rev, z)?;
    grads.accumulate(&bw_spec, &mut pair.store);

    let analytic: Vec<(String, crate::math::Matrix)> = pair
        .store
        .iter()
        .map(|(name, _, grad)| (name.to_string(), grad.clone()))
        .collect();
    let mut f = |store: &ParamStore| {
        let fw = forward_sequence(&fw_spec.view(store), ids, z, None).map(|(l, _)| l);
        let bw = forward_sequence(&bw_spec.view(store), &rev, z, None).map(|(l, _)| l);
        match (fw, bw) {
            (Ok(a), Ok(b)) => a + b,
            _ => f64::NAN,
        }
    };
    let numeric = finite_diff_grad(&mut f, &mut pair.store, eps)?;
    let mut out = Vec::new();
    for (name, grad) in &analytic {
        let num = numeric
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .expect("finite differences cover every parameter");
        out.push((name.clone(), relative_error(grad, num)));
    }
    Ok(out)
}
