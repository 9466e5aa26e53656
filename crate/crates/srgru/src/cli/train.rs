//! `train`: multi-seed training runs, per-seed checkpoints and histories,
//! and a summary that keeps the best-validation-BLEU seed.

use std::path::PathBuf;

use crate::cli::{run_parallel, CellChoice, RunConfig};
use crate::corpus::load_corpus;
use crate::error::Result;
use crate::training::{prepare, train, train_tied_backward, PreparedCorpus, TrainHistory};

pub const SUMMARY_FORMAT: &str = "srgru-train-summary v1";

struct SeedOutcome {
    seed: u64,
    best_epoch: usize,
    epochs: usize,
    valid_bleu: f64,
    valid_nll: f64,
    model_path: PathBuf,
    bw_path: Option<PathBuf>,
}

pub fn run(cfg: RunConfig) -> Result<()> {
    let data_path = cfg.require_data()?.to_path_buf();
    cfg.train_config().validate()?;
    let corpus = load_corpus(&data_path, cfg.split_seed)?;
    let prepared = prepare(&corpus.train, &corpus.valid)?;
    cfg.write_echo()?;
    prepared.vocab.save(&cfg.out.join("vocab.txt"))?;
    prepared.schema.save(&cfg.out.join("schema.txt"))?;
    println!(
        "data: {} train / {} valid / {} test acts; vocab {} tokens, schema {} features \
         ({} references kept a missing slot value, {} valid acts skipped)",
        corpus.train.len(),
        corpus.valid.len(),
        corpus.test.len(),
        prepared.vocab.len(),
        prepared.schema.size(),
        prepared.delex_misses,
        prepared.skipped_valid,
    );

    let seeds: Vec<u64> = (1..=cfg.seeds as u64).collect();
    let outcomes = run_parallel(cfg.jobs, seeds.len(), |i| {
        run_seed(&cfg, &prepared, seeds[i])
    })?;
    for o in &outcomes {
        println!(
            "seed {}: best epoch {} of {}, valid BLEU {:.4}, valid NLL {:.4}",
            o.seed, o.best_epoch, o.epochs, o.valid_bleu, o.valid_nll
        );
    }

    let best = outcomes
        .iter()
        .max_by(|a, b| a.valid_bleu.total_cmp(&b.valid_bleu).then(b.seed.cmp(&a.seed)))
        .expect("at least one seed runs");
    let mean: f64 = outcomes.iter().map(|o| o.valid_bleu).sum::<f64>() / outcomes.len() as f64;

    std::fs::copy(&best.model_path, cfg.out.join("model.txt"))?;
    if let Some(bw) = &best.bw_path {
        std::fs::copy(bw, cfg.out.join("model_bw.txt"))?;
    }
    std::fs::write(&cfg.out.join("summary.txt"), render_summary(&cfg, &outcomes, best, mean))?;
    println!(
        "best seed {} -> {}; mean valid BLEU over {} seeds {:.4}",
        best.seed,
        cfg.out.join("model.txt").display(),
        outcomes.len(),
        mean
    );
    Ok(())
}

fn run_seed(cfg: &RunConfig, prepared: &PreparedCorpus, seed: u64) -> Result<SeedOutcome> {
    let dir = cfg.out.join(format!("seed{seed}"));
    std::fs::create_dir_all(&dir)?;
    let tc = cfg.train_config();
    let pretrained = cfg.embeddings.as_deref();
    let model_path = dir.join("model.txt");
    let (history, bw_path) = match cfg.cell {
        CellChoice::TiedBackward => {
            let (pair, history) =
                train_tied_backward(prepared, &tc, seed, pretrained, cfg.sequential)?;
            let bw_path = dir.join("model_bw.txt");
            pair.save(&model_path, &bw_path)?;
            (history, Some(bw_path))
        }
        CellChoice::Single(kind) => {
            let (model, history) = train(kind, prepared, &tc, seed, pretrained)?;
            model.save(&model_path)?;
            (history, None)
        }
    };
    history.save(&dir.join("history.txt"))?;
    Ok(SeedOutcome {
        seed,
        best_epoch: history.best_epoch,
        epochs: history.rows.len(),
        valid_bleu: history.best_valid_bleu,
        valid_nll: valid_nll_at_best(&history),
        model_path,
        bw_path,
    })
}

/// Validation NLL at the kept epoch (the tied trainer may keep an epoch by
/// backward NLL, so fall back to the last row when the index is foreign).
fn valid_nll_at_best(history: &TrainHistory) -> f64 {
    history
        .rows
        .iter()
        .find(|r| r.epoch == history.best_epoch)
        .or(history.rows.last())
        .map(|r| r.valid_nll)
        .unwrap_or(f64::NAN)
}

fn render_summary(
    cfg: &RunConfig,
    outcomes: &[SeedOutcome],
    best: &SeedOutcome,
    mean: f64,
) -> String {
    let mut out = format!("{SUMMARY_FORMAT}\ncell {}\n", cfg.cell.label());
    out.push_str("seed\tbest_epoch\tepochs\tvalid_bleu\tvalid_nll\n");
    for o in outcomes {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            o.seed, o.best_epoch, o.epochs, o.valid_bleu, o.valid_nll
        ));
    }
    out.push_str(&format!("best_seed {}\n", best.seed));
    out.push_str(&format!("mean_valid_bleu {mean}\n"));
    out
}
