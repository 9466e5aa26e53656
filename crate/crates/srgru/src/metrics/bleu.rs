//! Corpus BLEU-4 with multiple references.
//!
//! Clipped modified n-gram precision for n = 1..4, pooled over the corpus;
//! brevity penalty from per-sentence closest reference lengths (ties toward
//! the shorter reference); geometric mean of the four precisions. Without
//! smoothing any zero precision zeroes the score.

use std::collections::HashMap;

use crate::error::Error;
use crate::Result;

/// Joins an n-gram into a hashable key; the separator cannot occur inside
/// whitespace-split tokens.
const SEP: char = '\u{1f}';

#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    /// BP · geometric mean of precisions, in [0, 1].
    pub bleu: f64,
    /// Modified precision for n = 1..4.
    pub precisions: [f64; 4],
    pub brevity_penalty: f64,
    /// Total hypothesis tokens.
    pub hyp_len: usize,
    /// Total closest-reference tokens.
    pub ref_len: usize,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for window in tokens.windows(n) {
        let mut key = String::new();
        for tok in window {
            if !key.is_empty() {
                key.push(SEP);
            }
            key.push_str(tok);
        }
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

/// Corpus BLEU over aligned hypothesis / reference-group lists. Each
/// hypothesis and reference is already tokenized. `smooth` replaces a zero
/// numerator with an add-one estimate for n ≥ 2; leave it off to match the
/// standard definition.
pub fn corpus_bleu(
    hypotheses: &[Vec<String>],
    references: &[Vec<Vec<String>>],
    smooth: bool,
) -> Result<BleuReport> {
    if hypotheses.is_empty() {
        return Err(Error::Mismatch("empty corpus".to_string()));
    }
    if hypotheses.len() != references.len() {
        return Err(Error::Mismatch(format!(
            "{} hypotheses vs {} reference groups",
            hypotheses.len(),
            references.len()
        )));
    }
    let mut numer = [0usize; 4];
    let mut denom = [0usize; 4];
    let mut hyp_len = 0;
    let mut ref_len = 0;
    for (hyp, group) in hypotheses.iter().zip(references) {
        if group.is_empty() {
            return Err(Error::Mismatch("reference group without references".to_string()));
        }
        hyp_len += hyp.len();
        ref_len += group
            .iter()
            .map(|r| (r.len().abs_diff(hyp.len()), r.len()))
            .min()
            .map(|(_, len)| len)
            .unwrap();
        for n in 1..=4 {
            let hyp_counts = ngram_counts(hyp, n);
            let mut best_ref: HashMap<&str, usize> = HashMap::new();
            for reference in group {
                for (gram, count) in ngram_counts(reference, n) {
                    // Borrow the key from hyp_counts so the map can outlive
                    // this reference's temporary counts.
                    if let Some((key, _)) = hyp_counts.get_key_value(&gram) {
                        let entry = best_ref.entry(key).or_insert(0);
                        *entry = (*entry).max(count);
                    }
                }
            }
            for (gram, &count) in &hyp_counts {
                numer[n - 1] += count.min(best_ref.get(gram.as_str()).copied().unwrap_or(0));
            }
            denom[n - 1] += hyp.len().saturating_sub(n - 1);
        }
    }
    let mut precisions = [0.0; 4];
    for n in 0..4 {
        let (mut num, mut den) = (numer[n], denom[n]);
        if smooth && n >= 1 && num == 0 && den > 0 {
            num += 1;
            den += 1;
        }
        precisions[n] = if den == 0 { 0.0 } else { num as f64 / den as f64 };
    }
    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    let bleu = if precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        brevity_penalty * (precisions.iter().map(|p| p.ln()).sum::<f64>() / 4.0).exp()
    };
    Ok(BleuReport { bleu, precisions, brevity_penalty, hyp_len, ref_len })
}
