//! Over-generation reranking: R = F_fw (+ F_bw) + λ · ERR, ascending.
//!
//! F_fw is the forward NLL accumulated by the beam. When a backward model
//! is supplied, F_bw is the NLL the backward model assigns to the reversed
//! token sequence, and the two likelihood terms add. λ scales the slot
//! error rate hard enough (default 1000) that any slot mistake outweighs
//! likelihood differences.

use crate::cells::{sequence_nll, CellView};
use crate::corpus::{DialogueAct, Vocab, BOS, EOS};
use crate::Result;

use super::beam::Hypothesis;
use super::err::{compute_err, SlotStats};

/// A finished hypothesis with its reranking ingredients.
#[derive(Debug, Clone)]
pub struct RerankCandidate {
    /// Token ids including BOS/EOS sentinels.
    pub ids: Vec<usize>,
    /// Surface tokens (sentinels stripped), still delexicalized.
    pub tokens: Vec<String>,
    /// Forward NLL.
    pub f_fw: f64,
    /// Backward NLL of the reversed sequence, when a backward model rescores.
    pub f_bw: Option<f64>,
    /// Slot comparison against the dialogue act.
    pub slots: SlotStats,
    /// Reranking score.
    pub r: f64,
}

/// `ids` with the emitted tokens reversed in place between the sentinels.
pub fn reverse_ids(ids: &[usize]) -> Vec<usize> {
    let inner = ids
        .iter()
        .copied()
        .filter(|&id| id != BOS && id != EOS);
    let mut out = vec![BOS];
    out.extend(inner);
    out[1..].reverse();
    out.push(EOS);
    out
}

/// Scores and sorts finished hypotheses. Ascending R; ties broken by F_fw,
/// then by lexicographically smaller token-id sequence.
pub fn rerank(
    hypotheses: &[Hypothesis],
    vocab: &Vocab,
    da: &DialogueAct,
    z: &[f64],
    lambda: f64,
    backward: Option<&CellView>,
) -> Result<Vec<RerankCandidate>> {
    let mut out = Vec::with_capacity(hypotheses.len());
    for hyp in hypotheses {
        let tokens = vocab.decode(&hyp.tokens);
        let slots = compute_err(&tokens, da);
        let f_bw = match backward {
            Some(view) => Some(sequence_nll(view, &reverse_ids(&hyp.tokens), z)?),
            None => None,
        };
        let r = hyp.nll + f_bw.unwrap_or(0.0) + lambda * slots.err;
        out.push(RerankCandidate {
            ids: hyp.tokens.clone(),
            tokens,
            f_fw: hyp.nll,
            f_bw,
            slots,
            r,
        });
    }
    out.sort_by(|a, b| {
        a.r.total_cmp(&b.r)
            .then(a.f_fw.total_cmp(&b.f_fw))
            .then_with(|| a.ids.cmp(&b.ids))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{CellKind, Dims, ModelParams};
    use crate::corpus::parse_da;
    use crate::math::Rng;

    fn vocab() -> Vocab {
        let sentences: Vec<Vec<String>> = [
            &["SLOT_NAME", "serves", "SLOT_FOOD", "food"][..],
            &["try", "SLOT_NAME"][..],
        ]
        .iter()
        .map(|s| s.iter().map(|w| w.to_string()).collect())
        .collect();
        Vocab::build(&sentences)
    }

    fn hyp(vocab: &Vocab, words: &[&str], nll: f64) -> Hypothesis {
        let mut ids = vec![BOS];
        for w in words {
            ids.push(vocab.id(w).unwrap());
        }
        ids.push(EOS);
        Hypothesis {
            tokens: ids,
            nll,
            finished: true,
            forced: false,
            h: Vec::new(),
            dist: Vec::new(),
        }
    }

    #[test]
    fn slot_mistake_outweighs_likelihood_gap() {
        let v = vocab();
        let da = parse_da("inform(name='x';food='y')").unwrap();
        // The fluent candidate drops SLOT_FOOD; the clunky one covers both.
        let fluent = hyp(&v, &["try", "SLOT_NAME"], 1.0);
        let complete = hyp(&v, &["SLOT_NAME", "serves", "SLOT_FOOD", "food"], 40.0);
        let ranked = rerank(&[fluent, complete], &v, &da, &[], 1000.0, None).unwrap();
        assert_eq!(ranked[0].tokens, ["SLOT_NAME", "serves", "SLOT_FOOD", "food"]);
        assert_eq!(ranked[0].slots.err, 0.0);
        assert!(ranked[1].slots.err > 0.0);
        assert!(ranked[0].r < ranked[1].r);
    }

    #[test]
    fn zero_lambda_ranks_by_likelihood_alone() {
        let v = vocab();
        let da = parse_da("inform(name='x';food='y')").unwrap();
        let a = hyp(&v, &["try", "SLOT_NAME"], 1.0);
        let b = hyp(&v, &["SLOT_NAME", "serves", "SLOT_FOOD", "food"], 40.0);
        let ranked = rerank(&[b, a], &v, &da, &[], 0.0, None).unwrap();
        assert_eq!(ranked[0].f_fw, 1.0);
        assert_eq!(ranked[1].f_fw, 40.0);
    }

    #[test]
    fn random_candidates_match_brute_force_order() {
        let v = vocab();
        let da = parse_da("inform(name='x';food='y')").unwrap();
        let pool: Vec<&str> = vec!["try", "SLOT_NAME", "serves", "SLOT_FOOD", "food"];
        let mut rng = Rng::new(31);
        let mut hyps = Vec::new();
        for _ in 0..20 {
            let len = 1 + rng.below(5);
            let words: Vec<&str> = (0..len).map(|_| pool[rng.below(pool.len())]).collect();
            hyps.push(hyp(&v, &words, rng.uniform(0.0, 30.0)));
        }
        let lambda = 250.0;
        let ranked = rerank(&hyps, &v, &da, &[], lambda, None).unwrap();
        // Brute force: score each hypothesis independently and sort.
        let mut expect: Vec<(f64, f64, Vec<usize>)> = hyps
            .iter()
            .map(|h| {
                let stats = compute_err(&v.decode(&h.tokens), &da);
                (h.nll + lambda * stats.err, h.nll, h.tokens.clone())
            })
            .collect();
        expect.sort_by(|a, b| {
            a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then_with(|| a.2.cmp(&b.2))
        });
        for (cand, want) in ranked.iter().zip(&expect) {
            assert_eq!(cand.r, want.0);
            assert_eq!(cand.f_fw, want.1);
            assert_eq!(cand.ids, want.2);
        }
    }

    #[test]
    fn backward_rescoring_adds_reversed_nll() {
        let v = vocab();
        let da = parse_da("inform(name='x';food='y')").unwrap();
        let dims = Dims { vocab: v.len(), embed: 3, hidden: 3, da: 2 };
        let mut rng = Rng::new(7);
        let bw = ModelParams::init(CellKind::SrgruBase, dims, false, &mut rng);
        let z = vec![1.0, 0.0];
        let h = hyp(&v, &["try", "SLOT_NAME"], 2.0);
        let ranked = rerank(&[h.clone()], &v, &da, &z, 0.0, Some(&bw.view())).unwrap();
        let want = sequence_nll(&bw.view(), &reverse_ids(&h.tokens), &z).unwrap();
        assert_eq!(ranked[0].f_bw, Some(want));
        assert_eq!(ranked[0].r, 2.0 + want);
    }

    #[test]
    fn double_reverse_rescores_to_forward_nll_exactly() {
        let v = vocab();
        let dims = Dims { vocab: v.len(), embed: 4, hidden: 4, da: 2 };
        let mut rng = Rng::new(11);
        let fw = ModelParams::init(CellKind::SrgruContext, dims, true, &mut rng);
        let z = vec![0.0, 1.0];
        let ids = {
            let mut ids = vec![BOS];
            for w in ["try", "SLOT_NAME", "serves", "food"] {
                ids.push(v.id(w).unwrap());
            }
            ids.push(EOS);
            ids
        };
        let twice = reverse_ids(&reverse_ids(&ids));
        assert_eq!(twice, ids);
        let once = sequence_nll(&fw.view(), &ids, &z).unwrap();
        let again = sequence_nll(&fw.view(), &twice, &z).unwrap();
        assert_eq!(once.to_bits(), again.to_bits());
    }

    #[test]
    fn score_is_monotone_in_each_ingredient() {
        let v = vocab();
        let da = parse_da("inform(name='x';food='y')").unwrap();
        // Same fluency, more slot errors -> worse score.
        let clean = hyp(&v, &["SLOT_NAME", "serves", "SLOT_FOOD"], 5.0);
        let sloppy = hyp(&v, &["SLOT_NAME", "serves", "serves"], 5.0);
        let ranked = rerank(&[sloppy, clean], &v, &da, &[], 100.0, None).unwrap();
        assert_eq!(ranked[0].slots.err, 0.0);
        // Same slots, lower NLL -> better score.
        let crisp = hyp(&v, &["SLOT_NAME", "serves", "SLOT_FOOD"], 1.0);
        let mushy = hyp(&v, &["SLOT_NAME", "serves", "SLOT_FOOD"], 9.0);
        let ranked = rerank(&[mushy, crisp], &v, &da, &[], 100.0, None).unwrap();
        assert_eq!(ranked[0].f_fw, 1.0);
    }
}
