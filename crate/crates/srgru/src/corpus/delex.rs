//! Delexicalization (slot values → slot tokens) and its inverse.
//!
//! Matching is longest-first and left-to-right over tokenized text. Only
//! normal-class slot values are replaced; binary and dont_care slots are
//! realized by paraphrase and stay untouched. Duplicate slot names consume
//! dialogue-act entries in DA order, which is what makes misplaced values
//! in compare acts detectable downstream.

use super::da::DialogueAct;
use super::token::{detokenize, tokenize};

/// Prefix marking a slot placeholder token.
pub const SLOT_PREFIX: &str = "SLOT_";

/// Placeholder token for a slot name, e.g. `SLOT_NAME` for `name`.
pub fn slot_token(name: &str) -> String {
    format!("{SLOT_PREFIX}{}", name.to_uppercase())
}

/// Slot name (lowercased) if `token` is a placeholder, else None.
pub fn slot_token_name(token: &str) -> Option<String> {
    token
        .strip_prefix(SLOT_PREFIX)
        .filter(|rest| !rest.is_empty())
        .map(|rest| rest.to_lowercase())
}

/// A normal-class slot whose value never matched in the utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelexMiss {
    pub slot_index: usize,
    pub name: String,
    pub value: String,
}

/// Tokenized utterance with slot values replaced by placeholder tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelexUtterance {
    pub tokens: Vec<String>,
    /// (token index, DA slot index) for every placeholder token.
    pub alignment: Vec<(usize, usize)>,
    /// Normal slots whose value was never found; diagnostics, not errors.
    pub misses: Vec<DelexMiss>,
}

/// Replace slot-value occurrences in `utterance` with placeholder tokens.
pub fn delexicalize(utterance: &str, da: &DialogueAct) -> DelexUtterance {
    let toks = tokenize(utterance);
    struct Cand {
        da_index: usize,
        name: String,
        value_toks: Vec<String>,
    }
    let cands: Vec<Cand> = da
        .normal_slots()
        .filter_map(|(i, s)| {
            let value_toks = tokenize(s.value.as_deref().unwrap_or(""));
            if value_toks.is_empty() {
                None
            } else {
                Some(Cand {
                    da_index: i,
                    name: s.name.clone(),
                    value_toks,
                })
            }
        })
        .collect();
    let mut consumed = vec![false; da.slots.len()];
    let mut tokens = Vec::with_capacity(toks.len());
    let mut alignment = Vec::new();
    let mut p = 0;
    while p < toks.len() {
        // Longest value match at p; ties prefer unconsumed, then DA order.
        let mut best: Option<&Cand> = None;
        for c in &cands {
            let len = c.value_toks.len();
            if p + len > toks.len() || toks[p..p + len] != c.value_toks[..] {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let key = |c: &Cand| {
                        (
                            std::cmp::Reverse(c.value_toks.len()),
                            consumed[c.da_index],
                            c.da_index,
                        )
                    };
                    key(c) < key(b)
                }
            };
            if better {
                best = Some(c);
            }
        }
        match best {
            Some(c) => {
                tokens.push(slot_token(&c.name));
                alignment.push((tokens.len() - 1, c.da_index));
                consumed[c.da_index] = true;
                p += c.value_toks.len();
            }
            None => {
                tokens.push(toks[p].clone());
                p += 1;
            }
        }
    }
    let misses = cands
        .iter()
        .filter(|c| !consumed[c.da_index])
        .map(|c| DelexMiss {
            slot_index: c.da_index,
            name: c.name.clone(),
            value: detokenize(&c.value_toks),
        })
        .collect();
    DelexUtterance {
        tokens,
        alignment,
        misses,
    }
}

/// Lexicalization result; leftover placeholders had no matching DA slot
/// and were rendered verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicalization {
    pub text: String,
    pub leftover: Vec<String>,
}

/// Substitute placeholder tokens with DA slot values.
///
/// Each placeholder consumes the next unconsumed same-name slot in DA order,
/// so duplicate-name acts lexicalize first mention to first entry. Values are
/// inserted verbatim (original casing from the DA).
pub fn lexicalize(tokens: &[String], da: &DialogueAct) -> Lexicalization {
    let mut consumed = vec![false; da.slots.len()];
    let mut parts: Vec<String> = Vec::with_capacity(tokens.len());
    let mut leftover = Vec::new();
    for tok in tokens {
        let Some(name) = slot_token_name(tok) else {
            parts.push(tok.clone());
            continue;
        };
        let hit = da.slots.iter().enumerate().find(|(i, s)| {
            !consumed[*i] && s.name.to_lowercase() == name && s.value.is_some()
        });
        match hit {
            Some((i, s)) => {
                consumed[i] = true;
                parts.push(s.value.clone().unwrap());
            }
            None => {
                leftover.push(tok.clone());
                parts.push(tok.clone());
            }
        }
    }
    Lexicalization {
        text: detokenize(&parts),
        leftover,
    }
}
