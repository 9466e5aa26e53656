//! Slot error rate: missing/redundant slot tokens against the dialogue act.
//!
//! Only slots whose values get delexicalized (normal class) participate.
//! Binary, dont_care, and no-value slots have no slot token to match, so
//! they are excluded from both the denominator and the miss/redundancy
//! counts.

use std::collections::BTreeMap;

use crate::corpus::{slot_token_name, DialogueAct, ValueClass};

/// Outcome of comparing an output's slot tokens with a dialogue act.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotStats {
    /// Slot tokens required by the act but absent from the output (p).
    pub missing: usize,
    /// Slot tokens in the output beyond what the act requires (q).
    pub redundant: usize,
    /// Delexicalizable slots in the act (N).
    pub total: usize,
    /// (p + q) / N, or 0.0 when the act has no delexicalizable slots.
    pub err: f64,
    /// True when N = 0 and the rate is 0 by convention.
    pub no_slots: bool,
}

/// Compares the multiset of slot tokens in `tokens` with the multiset of
/// delexicalizable slots in `da`. Slot names that appear in the act only
/// with non-normal classes are ignored on both sides.
pub fn compute_err(tokens: &[String], da: &DialogueAct) -> SlotStats {
    let mut required: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, slot) in da.normal_slots() {
        *required.entry(slot.name.as_str()).or_insert(0) += 1;
    }
    let excluded: Vec<&str> = da
        .slots
        .iter()
        .filter(|s| s.class != ValueClass::Normal)
        .map(|s| s.name.as_str())
        .filter(|name| !required.contains_key(name))
        .collect();

    let mut produced: BTreeMap<String, usize> = BTreeMap::new();
    for token in tokens {
        if let Some(name) = slot_token_name(token) {
            if excluded.iter().any(|e| *e == name) {
                continue;
            }
            *produced.entry(name).or_insert(0) += 1;
        }
    }

    let mut missing = 0;
    let mut redundant = 0;
    for (name, &req) in &required {
        let prod = produced.get(*name).copied().unwrap_or(0);
        missing += req.saturating_sub(prod);
        redundant += prod.saturating_sub(req);
    }
    for (name, &prod) in &produced {
        if !required.contains_key(name.as_str()) {
            redundant += prod;
        }
    }

    let total: usize = required.values().sum();
    let err = if total == 0 {
        0.0
    } else {
        (missing + redundant) as f64 / total as f64
    };
    SlotStats { missing, redundant, total, err, no_slots: total == 0 }
}
