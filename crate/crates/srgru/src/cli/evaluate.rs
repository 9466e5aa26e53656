//! `evaluate`: corpus BLEU of the top realization per act against the
//! dataset's grouped references, plus the mean slot error rate over each
//! act's kept realizations.

use std::collections::HashMap;

use crate::cli::{check_exists, require_path, RunConfig};
use crate::corpus::{load_corpus, tokenize};
use crate::decoding::read_realizations;
use crate::error::{Error, Result};
use crate::metrics::{corpus_bleu, DaErr, EvalReport};

pub fn run(cfg: RunConfig) -> Result<()> {
    let report = evaluate(&cfg)?;
    cfg.write_echo()?;
    std::fs::write(cfg.out.join("eval.txt"), report.render())?;
    std::fs::write(cfg.out.join("eval.kv"), report.machine())?;
    print!("{}", report.render());
    Ok(())
}

pub(crate) fn evaluate(cfg: &RunConfig) -> Result<EvalReport> {
    let realizations_path = require_path(&cfg.realizations, "realizations")?;
    check_exists(realizations_path, "realizations")?;
    let data_path = cfg.require_data()?;
    let corpus = load_corpus(data_path, cfg.split_seed)?;
    if corpus.test.is_empty() {
        return Err(Error::Config("dataset has an empty test split".to_string()));
    }
    let blocks = read_realizations(realizations_path)?;

    let mut by_da = HashMap::with_capacity(blocks.len());
    for block in &blocks {
        if by_da.insert(block.da_text.as_str(), block).is_some() {
            return Err(Error::Mismatch(format!(
                "realizations list `{}` twice",
                block.da_text
            )));
        }
    }

    let mut hyps = Vec::with_capacity(corpus.test.len());
    let mut refs = Vec::with_capacity(corpus.test.len());
    let mut per_da = Vec::with_capacity(corpus.test.len());
    let mut missing = Vec::new();
    for group in &corpus.test {
        let Some(block) = by_da.remove(group.da_text.as_str()) else {
            missing.push(group.da_text.clone());
            continue;
        };
        let Some(top) = block.items.first() else {
            return Err(Error::Mismatch(format!(
                "no realizations stored for `{}`",
                group.da_text
            )));
        };
        hyps.push(tokenize(&top.text));
        refs.push(group.references.iter().map(|r| tokenize(r)).collect::<Vec<_>>());
        per_da.push(DaErr {
            da_text: group.da_text.clone(),
            rates: block.items.iter().take(cfg.err_top).map(|r| r.err).collect(),
        });
    }
    if !missing.is_empty() {
        return Err(Error::Mismatch(format!(
            "no realizations for {} dialogue act(s): {}",
            missing.len(),
            missing.join(" | ")
        )));
    }
    if let Some(stray) = by_da.keys().next() {
        return Err(Error::Mismatch(format!(
            "realizations cover `{stray}`, which is not in the test split ({} stray acts)",
            by_da.len()
        )));
    }

    let bleu = corpus_bleu(&hyps, &refs, false)?;
    EvalReport::new(bleu, per_da)
}
