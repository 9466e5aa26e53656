//! `generate`: realize dialogue acts with a trained model — whole test
//! split to a realizations file, or one act from stdin with per-candidate
//! slot diagnostics.

use std::io::Read;

use crate::cells::ModelParams;
use crate::cli::{check_exists, load_artifacts, run_parallel, verify_hashes, RunConfig};
use crate::corpus::{load_corpus, parse_da, DaGroup, DaSchema, Vocab};
use crate::decoding::{compute_err, generate, write_realizations, RealizationBlock};
use crate::error::{Error, Result};

pub fn run(mut cfg: RunConfig, stdin_mode: bool) -> Result<()> {
    let (model, vocab, schema) = load_artifacts(&mut cfg)?;
    let tb = load_backward(&cfg, &vocab, &schema)?;
    if stdin_mode {
        return run_stdin(&cfg, &model, tb.as_ref(), &vocab, &schema);
    }

    let data_path = cfg.require_data()?.to_path_buf();
    let corpus = load_corpus(&data_path, cfg.split_seed)?;
    if corpus.test.is_empty() {
        return Err(Error::Config("dataset has an empty test split".to_string()));
    }
    cfg.write_echo()?;
    let opts = cfg.gen_options();
    let blocks = run_parallel(cfg.jobs, corpus.test.len(), |i| {
        realize_group(&corpus.test[i], &model, tb.as_ref(), &vocab, &schema, &opts)
    })?;
    let short = blocks.iter().filter(|(_, short, _)| *short).count();
    let starved = blocks.iter().filter(|(_, _, starved)| *starved).count();
    let blocks: Vec<RealizationBlock> = blocks.into_iter().map(|(b, _, _)| b).collect();
    let out_path = cfg
        .realizations
        .clone()
        .unwrap_or_else(|| cfg.out.join("realizations.txt"));
    write_realizations(&out_path, &blocks)?;
    println!(
        "realized {} acts -> {} ({} short of top_k={}, {} pools under need={})",
        blocks.len(),
        out_path.display(),
        short,
        cfg.top_k,
        starved,
        cfg.need,
    );
    Ok(())
}

pub(crate) fn load_backward(
    cfg: &RunConfig,
    vocab: &Vocab,
    schema: &DaSchema,
) -> Result<Option<ModelParams>> {
    let Some(path) = &cfg.tb_model else {
        return Ok(None);
    };
    check_exists(path, "backward model")?;
    let tb = ModelParams::load(path)?;
    let vocab_path = cfg.vocab.as_deref().expect("load_artifacts resolved the vocab path");
    let schema_path = cfg.schema.as_deref().expect("load_artifacts resolved the schema path");
    verify_hashes(&tb, path, vocab, vocab_path, schema, schema_path)?;
    Ok(Some(tb))
}

fn realize_group(
    group: &DaGroup,
    model: &ModelParams,
    tb: Option<&ModelParams>,
    vocab: &Vocab,
    schema: &DaSchema,
    opts: &crate::decoding::GenOptions,
) -> Result<(RealizationBlock, bool, bool)> {
    let backward = tb.map(|m| m.view());
    let outcome = generate(&model.view(), backward.as_ref(), vocab, schema, &group.da, opts)?;
    let block = RealizationBlock {
        da_text: group.da_text.clone(),
        items: outcome.realizations.iter().map(Into::into).collect(),
    };
    Ok((block, outcome.short, outcome.insufficient_pool))
}

/// Reads one DA from stdin, prints each kept realization with its score
/// breakdown and the missing (p) / redundant (q) / total (N) slot counts.
fn run_stdin(
    cfg: &RunConfig,
    model: &ModelParams,
    tb: Option<&ModelParams>,
    vocab: &Vocab,
    schema: &DaSchema,
) -> Result<()> {
    let mut input = String::new();
    std::io::stdin().read_to_string(&mut input)?;
    let line = input
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| Error::Config("stdin mode expects one dialogue act on stdin".to_string()))?;
    let da = parse_da(line)?;
    let backward = tb.map(|m| m.view());
    let outcome = generate(&model.view(), backward.as_ref(), vocab, schema, &da, &cfg.gen_options())?;
    println!("da {line}");
    for (rank, real) in outcome.realizations.iter().enumerate() {
        let stats = compute_err(&real.delex_tokens, &da);
        let bw = real
            .f_bw
            .map(|v| format!("\tF_bw {v:.4}"))
            .unwrap_or_default();
        println!(
            "rank {}\tR {:.4}\tF_fw {:.4}{}\tp {}\tq {}\tN {}\ttext {}",
            rank + 1,
            real.r,
            real.f_fw,
            bw,
            stats.missing,
            stats.redundant,
            stats.total,
            real.text,
        );
    }
    if outcome.short {
        println!("note: candidate pool was smaller than top_k = {}", cfg.top_k);
    }
    Ok(())
}
