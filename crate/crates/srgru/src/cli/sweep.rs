//! `sweep`: (x, BLEU, ERR) series over one of three axes — training-data
//! proportion on nested subsets, beam width, or kept-candidates k at a
//! fixed wide beam.

use std::path::PathBuf;

use crate::cells::ModelParams;
use crate::cli::{load_artifacts, run_parallel, CellChoice, RunConfig, SweepAxis};
use crate::corpus::{load_corpus, tokenize, DaGroup, DaSchema, Vocab};
use crate::decoding::{generate, GenOptions};
use crate::error::{Error, Result};
use crate::math::Rng;
use crate::metrics::{corpus_bleu, mean_err_percent};
use crate::training::prepare;

pub const SERIES_FORMAT: &str = "srgru-series v1";

struct SeriesRow {
    x: usize,
    bleu: f64,
    err_percent: f64,
}

struct ModelBundle {
    model: ModelParams,
    backward: Option<ModelParams>,
    vocab: Vocab,
    schema: DaSchema,
}

pub fn run(mut cfg: RunConfig) -> Result<()> {
    let axis = cfg.axis.ok_or_else(|| {
        Error::Config("no sweep axis given (--axis proportion | beam | top-k)".to_string())
    })?;
    // The k sweep's protocol holds the beam wide open so every k draws from
    // one deep pool; an explicit width still wins.
    if axis == SweepAxis::TopK && !cfg.beam_explicit {
        cfg.beam_width = 100;
    }
    let points = effective_points(&cfg, axis)?;
    cfg.points = Some(points.clone());

    let data_path = cfg.require_data()?.to_path_buf();
    let corpus = load_corpus(&data_path, cfg.split_seed)?;
    if corpus.test.is_empty() {
        return Err(Error::Config("dataset has an empty test split".to_string()));
    }

    let rows = match axis {
        SweepAxis::Proportion => sweep_proportion(&cfg, &corpus, &points)?,
        SweepAxis::Beam | SweepAxis::TopK => {
            let bundle = obtain_model(&mut cfg, &corpus)?;
            sweep_decode(&cfg, &corpus, &bundle, &points, axis)?
        }
    };

    cfg.write_echo()?;
    let path = write_series(&cfg.out, axis, &rows)?;
    for row in &rows {
        println!("{} {}: BLEU {:.4}, ERR {:.2}%", axis.label(), row.x, row.bleu, row.err_percent);
    }
    println!("{} points -> {}", rows.len(), path.display());
    Ok(())
}

fn effective_points(cfg: &RunConfig, axis: SweepAxis) -> Result<Vec<usize>> {
    let points = match &cfg.points {
        Some(p) => p.clone(),
        None => match axis {
            SweepAxis::Proportion => (1..=10).map(|i| i * 10).collect(),
            SweepAxis::Beam => vec![1, 3, 5, 10, 20, 50, 100],
            SweepAxis::TopK => vec![1, 5, 10, 20],
        },
    };
    if axis == SweepAxis::Proportion && points.iter().any(|&p| p > 100) {
        return Err(Error::Config("proportion points are percentages (1..=100)".to_string()));
    }
    Ok(points)
}

/// Train on nested prefixes of a shuffled training split, so each larger
/// proportion strictly contains the smaller ones, then score the test split.
fn sweep_proportion(
    cfg: &RunConfig,
    corpus: &crate::corpus::Corpus,
    points: &[usize],
) -> Result<Vec<SeriesRow>> {
    let mut order: Vec<usize> = (0..corpus.train.len()).collect();
    Rng::new(cfg.split_seed).shuffle(&mut order);
    let mut rows = Vec::with_capacity(points.len());
    for &percent in points {
        let take = ((corpus.train.len() * percent).div_ceil(100)).clamp(1, corpus.train.len());
        let subset: Vec<DaGroup> = order[..take].iter().map(|&i| corpus.train[i].clone()).collect();
        let bundle = train_bundle(cfg, &subset, &corpus.valid)?;
        let score = score_groups(cfg, &bundle, &corpus.test, &cfg.gen_options(), cfg.err_top, false)?;
        println!(
            "proportion {percent}%: trained on {take} acts, scored {} test acts ({} skipped)",
            score.scored, score.skipped
        );
        rows.push(SeriesRow { x: percent, bleu: score.bleu, err_percent: score.err_percent });
    }
    Ok(rows)
}

/// Score the test split at each decode setting, holding the model fixed.
fn sweep_decode(
    cfg: &RunConfig,
    corpus: &crate::corpus::Corpus,
    bundle: &ModelBundle,
    points: &[usize],
    axis: SweepAxis,
) -> Result<Vec<SeriesRow>> {
    let mut rows = Vec::with_capacity(points.len());
    for &x in points {
        let mut opts = cfg.gen_options();
        let all_ranks = match axis {
            SweepAxis::Beam => {
                opts.beam_width = x;
                false
            }
            SweepAxis::TopK => {
                opts.top_k = x;
                opts.need = opts.need.max(x);
                true
            }
            SweepAxis::Proportion => unreachable!("proportion sweeps retrain per point"),
        };
        let err_top = if all_ranks { x } else { cfg.err_top };
        let score = score_groups(cfg, bundle, &corpus.test, &opts, err_top, all_ranks)?;
        if score.skipped > 0 {
            println!("{} {}: {} test acts skipped (unseen act type)", axis.label(), x, score.skipped);
        }
        rows.push(SeriesRow { x, bleu: score.bleu, err_percent: score.err_percent });
    }
    Ok(rows)
}

/// Either load the checkpoint the flags point at, or train one run (seed 1)
/// on the full training split.
fn obtain_model(cfg: &mut RunConfig, corpus: &crate::corpus::Corpus) -> Result<ModelBundle> {
    if cfg.model.is_some() {
        let (model, vocab, schema) = load_artifacts(cfg)?;
        let backward = super::generate::load_backward(cfg, &vocab, &schema)?;
        return Ok(ModelBundle { model, backward, vocab, schema });
    }
    train_bundle(cfg, &corpus.train, &corpus.valid)
}

fn train_bundle(cfg: &RunConfig, train: &[DaGroup], valid: &[DaGroup]) -> Result<ModelBundle> {
    let prepared = prepare(train, valid)?;
    let tc = cfg.train_config();
    let pretrained = cfg.embeddings.as_deref();
    let (model, backward) = match cfg.cell {
        CellChoice::TiedBackward => {
            let (pair, _) =
                crate::training::train_tied_backward(&prepared, &tc, 1, pretrained, cfg.sequential)?;
            (pair.standalone(false), Some(pair.standalone(true)))
        }
        CellChoice::Single(kind) => {
            let (model, _) = crate::training::train(kind, &prepared, &tc, 1, pretrained)?;
            (model, None)
        }
    };
    Ok(ModelBundle { model, backward, vocab: prepared.vocab, schema: prepared.schema })
}

struct PointScore {
    bleu: f64,
    err_percent: f64,
    scored: usize,
    skipped: usize,
}

/// Generate for every encodable test act and score: BLEU over the top
/// realization (or over every kept rank when `all_ranks_bleu`), slot error
/// over the first `err_top` ranks.
fn score_groups(
    cfg: &RunConfig,
    bundle: &ModelBundle,
    groups: &[DaGroup],
    opts: &GenOptions,
    err_top: usize,
    all_ranks_bleu: bool,
) -> Result<PointScore> {
    let usable: Vec<&DaGroup> = groups
        .iter()
        .filter(|g| bundle.schema.encode_da(&g.da).is_ok())
        .collect();
    if usable.is_empty() {
        return Err(Error::Mismatch(
            "no test act is encodable against the trained schema".to_string(),
        ));
    }
    let outcomes = run_parallel(cfg.jobs, usable.len(), |i| {
        let backward = bundle.backward.as_ref().map(|m| m.view());
        generate(
            &bundle.model.view(),
            backward.as_ref(),
            &bundle.vocab,
            &bundle.schema,
            &usable[i].da,
            opts,
        )
    })?;

    let mut hyps = Vec::new();
    let mut refs = Vec::new();
    let mut rates = Vec::new();
    for (group, outcome) in usable.iter().zip(&outcomes) {
        let group_refs: Vec<Vec<String>> = group.references.iter().map(|r| tokenize(r)).collect();
        let ranked_for_bleu = if all_ranks_bleu { outcome.realizations.len() } else { 1 };
        for real in outcome.realizations.iter().take(ranked_for_bleu) {
            hyps.push(tokenize(&real.text));
            refs.push(group_refs.clone());
        }
        rates.extend(outcome.realizations.iter().take(err_top).map(|r| r.err));
    }
    let bleu = corpus_bleu(&hyps, &refs, false)?;
    Ok(PointScore {
        bleu: bleu.bleu,
        err_percent: mean_err_percent(&rates)?,
        scored: usable.len(),
        skipped: groups.len() - usable.len(),
    })
}

fn write_series(out: &std::path::Path, axis: SweepAxis, rows: &[SeriesRow]) -> Result<PathBuf> {
    let mut text = format!("{SERIES_FORMAT}\naxis {}\nx\tbleu\terr_percent\n", axis.label());
    for row in rows {
        text.push_str(&format!("{}\t{}\t{}\n", row.x, row.bleu, row.err_percent));
    }
    let path = out.join(format!("sweep_{}.tsv", axis.label()));
    std::fs::write(&path, text)?;
    Ok(path)
}
