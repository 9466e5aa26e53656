//! End-to-end realization: encode the act, over-generate with beam search,
//! rerank by likelihood plus slot errors, lexicalize the top candidates.

use std::fs;
use std::path::Path;

use crate::cells::CellView;
use crate::corpus::{lexicalize, DaSchema, DialogueAct, Vocab};
use crate::error::Error;
use crate::Result;

use super::beam::beam_search;
use super::rerank::rerank;

/// Decoding knobs. Defaults follow the evaluation protocol: beam width 10,
/// 20 over-generated candidates, top 5 kept, λ = 1000.
#[derive(Debug, Clone)]
pub struct GenOptions {
    pub beam_width: usize,
    pub max_len: usize,
    /// Candidates to over-generate before reranking.
    pub need: usize,
    /// Realizations returned after reranking.
    pub top_k: usize,
    /// Slot-error weight in the reranking score.
    pub lambda: f64,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions { beam_width: 10, max_len: 100, need: 20, top_k: 5, lambda: 1000.0 }
    }
}

/// One surface string offered for a dialogue act, with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Lexicalized surface text.
    pub text: String,
    /// Delexicalized tokens the model actually produced.
    pub delex_tokens: Vec<String>,
    /// Reranking score (ascending = better).
    pub r: f64,
    /// Forward NLL.
    pub f_fw: f64,
    /// Backward NLL when a backward model rescored.
    pub f_bw: Option<f64>,
    /// Slot error rate against the act.
    pub err: f64,
    /// Slot tokens that had no remaining value to substitute.
    pub leftover: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateOutcome {
    /// Top realizations, best first.
    pub realizations: Vec<Realization>,
    /// True when the candidate pool was smaller than `top_k`.
    pub short: bool,
    /// True when beam search could not fill the over-generation pool.
    pub insufficient_pool: bool,
}

/// Realizes `da`: encode z, over-generate, rerank, lexicalize `top_k`.
pub fn generate(
    forward: &CellView,
    backward: Option<&CellView>,
    vocab: &Vocab,
    schema: &DaSchema,
    da: &DialogueAct,
    opts: &GenOptions,
) -> Result<GenerateOutcome> {
    let encoded = schema.encode_da(da)?;
    let outcome = beam_search(forward, &encoded.z, opts.beam_width, opts.max_len, opts.need);
    let ranked = rerank(
        &outcome.finished,
        vocab,
        da,
        &encoded.z,
        opts.lambda,
        backward,
    )?;
    let short = ranked.len() < opts.top_k;
    let mut realizations = Vec::new();
    for cand in ranked.into_iter().take(opts.top_k) {
        let lex = lexicalize(&cand.tokens, da);
        realizations.push(Realization {
            text: lex.text,
            delex_tokens: cand.tokens,
            r: cand.r,
            f_fw: cand.f_fw,
            f_bw: cand.f_bw,
            err: cand.slots.err,
            leftover: lex.leftover,
        });
    }
    Ok(GenerateOutcome {
        realizations,
        short,
        insufficient_pool: outcome.insufficient,
    })
}

pub const REALIZATIONS_FORMAT: &str = "srgru-realizations v1";

/// A dialogue act's block in a realizations file.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationBlock {
    pub da_text: String,
    /// (R, F_fw, ERR, utterance) per kept realization, best first.
    pub items: Vec<StoredRealization>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredRealization {
    pub r: f64,
    pub f_fw: f64,
    pub err: f64,
    pub text: String,
}

impl From<&Realization> for StoredRealization {
    fn from(r: &Realization) -> Self {
        StoredRealization { r: r.r, f_fw: r.f_fw, err: r.err, text: r.text.clone() }
    }
}

/// Renders blocks: header, then per act the DA string followed by one
/// `R<TAB>F_fw<TAB>ERR<TAB>utterance` line per realization. Floats use
/// shortest round-trip formatting so a reader recovers them exactly.
pub fn render_realizations(blocks: &[RealizationBlock]) -> String {
    let mut out = String::new();
    out.push_str(REALIZATIONS_FORMAT);
    out.push('\n');
    for block in blocks {
        out.push('\n');
        out.push_str(&block.da_text);
        out.push('\n');
        for item in &block.items {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                item.r, item.f_fw, item.err, item.text
            ));
        }
    }
    out
}

pub fn write_realizations(path: &Path, blocks: &[RealizationBlock]) -> Result<()> {
    fs::write(path, render_realizations(blocks))?;
    Ok(())
}

pub fn parse_realizations(path: &Path, text: &str) -> Result<Vec<RealizationBlock>> {
    let bad = |message: String| Error::BadArtifact {
        path: path.display().to_string(),
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(REALIZATIONS_FORMAT) => {}
        other => {
            return Err(bad(format!(
                "expected header {REALIZATIONS_FORMAT:?}, found {other:?}"
            )))
        }
    }
    let mut blocks: Vec<RealizationBlock> = Vec::new();
    let mut current: Option<RealizationBlock> = None;
    for line in lines {
        if line.is_empty() {
            blocks.extend(current.take());
            continue;
        }
        match &mut current {
            None => {
                if line.contains('\t') {
                    return Err(bad(format!("realization line without a DA line: {line:?}")));
                }
                current = Some(RealizationBlock { da_text: line.to_string(), items: Vec::new() });
            }
            Some(block) => {
                let mut fields = line.splitn(4, '\t');
                let mut number = |what: &str| -> Result<f64> {
                    fields
                        .next()
                        .and_then(|f| f.parse().ok())
                        .ok_or_else(|| bad(format!("bad {what} in line {line:?}")))
                };
                let r = number("R")?;
                let f_fw = number("F_fw")?;
                let err = number("ERR")?;
                let text = fields
                    .next()
                    .ok_or_else(|| bad(format!("missing utterance in line {line:?}")))?;
                block.items.push(StoredRealization { r, f_fw, err, text: text.to_string() });
            }
        }
    }
    blocks.extend(current.take());
    Ok(blocks)
}

pub fn read_realizations(path: &Path) -> Result<Vec<RealizationBlock>> {
    let text = fs::read_to_string(path)?;
    parse_realizations(path, &text)
}
