//! Beam-search over-generation and greedy decoding.
//!
//! Hypotheses are scored by cumulative negative log-likelihood. Finished
//! hypotheses (EOS emitted) move to a completed pool and free their beam
//! slot; the search stops once the pool holds `need` candidates, every beam
//! finished, or all active hypotheses were force-finished at `max_len`.
//! BOS is never proposed as an extension. Ties break toward the
//! lexicographically smaller token-id sequence, making decoding fully
//! deterministic.

use crate::cells::{decode_step, CellView};
use crate::corpus::{BOS, EOS};

/// One decoding path. `nll` is the sum of -log p over emitted tokens, so it
/// never decreases as tokens append.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    /// Token ids starting with BOS; finished hypotheses end with EOS.
    pub tokens: Vec<usize>,
    pub nll: f64,
    pub finished: bool,
    /// Whether EOS was imposed by the length cap rather than chosen freely.
    pub forced: bool,
    /// Hidden state after consuming every token.
    pub h: Vec<f64>,
    /// Next-token distribution at the current state.
    pub(crate) dist: Vec<f64>,
}

impl Hypothesis {
    /// A finished hypothesis assembled outside the search, for reranking
    /// sequences whose likelihood is already known. `tokens` must be
    /// sentinel-wrapped (BOS first, EOS last).
    pub fn completed(tokens: Vec<usize>, nll: f64) -> Self {
        Hypothesis {
            tokens,
            nll,
            finished: true,
            forced: false,
            h: Vec::new(),
            dist: Vec::new(),
        }
    }

    /// Emitted-token count (everything after BOS).
    pub fn emitted(&self) -> usize {
        self.tokens.len() - 1
    }

    /// Inner token ids without BOS/EOS sentinels.
    pub fn inner(&self) -> &[usize] {
        let end = if self.finished {
            self.tokens.len() - 1
        } else {
            self.tokens.len()
        };
        &self.tokens[1..end]
    }
}

/// Pruning record for one expansion step: every kept extension scores no
/// worse than every discarded one, which tests assert as the local
/// optimality certificate.
#[derive(Debug, Clone, Copy)]
pub struct StepAudit {
    pub step: usize,
    pub kept_worst_nll: Option<f64>,
    pub discarded_best_nll: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BeamOutcome {
    /// Finished hypotheses, NLL ascending, at most `need`.
    pub finished: Vec<Hypothesis>,
    /// True when the search drained before filling the pool.
    pub insufficient: bool,
    pub audits: Vec<StepAudit>,
}

fn root(view: &CellView, z: &[f64]) -> Hypothesis {
    let h0 = vec![0.0; view.dims.hidden];
    let (h, dist) = decode_step(view, BOS, z, &h0);
    Hypothesis {
        tokens: vec![BOS],
        nll: 0.0,
        finished: false,
        forced: false,
        h,
        dist,
    }
}

struct Candidate {
    parent: usize,
    token: usize,
    nll: f64,
    forced: bool,
}

fn candidate_order(active: &[Hypothesis], a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    a.nll
        .partial_cmp(&b.nll)
        .expect("NLL is always finite")
        .then_with(|| {
            let ta = (&active[a.parent].tokens, a.token);
            let tb = (&active[b.parent].tokens, b.token);
            // Lexicographic over the full extended sequence.
            ta.0.iter()
                .chain(std::iter::once(&ta.1))
                .cmp(tb.0.iter().chain(std::iter::once(&tb.1)))
        })
}

/// Over-generate finished hypotheses for one dialogue act.
///
/// `max_len` caps emitted tokens (EOS included); hypotheses reaching
/// `max_len - 1` unfinished may only extend with EOS.
pub fn beam_search(
    view: &CellView,
    z: &[f64],
    beam_width: usize,
    max_len: usize,
    need: usize,
) -> BeamOutcome {
    assert!(beam_width >= 1, "beam_width must be at least 1");
    assert!(max_len >= 1, "max_len must allow at least EOS");
    let vocab = view.dims.vocab;
    let mut active = vec![root(view, z)];
    let mut finished: Vec<Hypothesis> = Vec::new();
    let mut audits = Vec::new();
    let mut step_no = 0;
    while !active.is_empty() && finished.len() < need {
        step_no += 1;
        let mut cands: Vec<Candidate> = Vec::new();
        for (parent, hyp) in active.iter().enumerate() {
            let force_eos = hyp.emitted() == max_len - 1;
            for token in 0..vocab {
                if token == BOS || (force_eos && token != EOS) {
                    continue;
                }
                cands.push(Candidate {
                    parent,
                    token,
                    nll: hyp.nll - hyp.dist[token].ln(),
                    forced: force_eos,
                });
            }
        }
        cands.sort_by(|a, b| candidate_order(&active, a, b));
        // Walk best-first: finished extensions above the beam cutoff move to
        // the pool without consuming a slot; everything ranked past a full
        // beam is discarded.
        let mut next_active: Vec<Hypothesis> = Vec::new();
        let mut kept_worst: Option<f64> = None;
        let mut discarded_best: Option<f64> = None;
        for cand in &cands {
            if next_active.len() >= beam_width {
                discarded_best = Some(cand.nll);
                break;
            }
            let parent = &active[cand.parent];
            if cand.token == EOS {
                let mut tokens = parent.tokens.clone();
                tokens.push(EOS);
                finished.push(Hypothesis {
                    tokens,
                    nll: cand.nll,
                    finished: true,
                    forced: cand.forced,
                    h: parent.h.clone(),
                    dist: Vec::new(),
                });
                kept_worst = Some(cand.nll);
                continue;
            }
            let (h, dist) = decode_step(view, cand.token, z, &parent.h);
            let mut tokens = parent.tokens.clone();
            tokens.push(cand.token);
            next_active.push(Hypothesis {
                tokens,
                nll: cand.nll,
                finished: false,
                forced: false,
                h,
                dist,
            });
            kept_worst = Some(cand.nll);
        }
        audits.push(StepAudit {
            step: step_no,
            kept_worst_nll: kept_worst,
            discarded_best_nll: discarded_best,
        });
        active = next_active;
    }
    finished.sort_by(|a, b| {
        a.nll
            .partial_cmp(&b.nll)
            .expect("NLL is always finite")
            .then_with(|| a.tokens.cmp(&b.tokens))
    });
    let insufficient = finished.len() < need;
    finished.truncate(need);
    BeamOutcome {
        finished,
        insufficient,
        audits,
    }
}

/// Argmax decoding; ids include BOS and the final EOS. Ties take the
/// smallest token id.
pub fn greedy_decode(view: &CellView, z: &[f64], max_len: usize) -> Vec<usize> {
    assert!(max_len >= 1, "max_len must allow at least EOS");
    let mut tokens = vec![BOS];
    let mut h = vec![0.0; view.dims.hidden];
    let mut dist;
    (h, dist) = decode_step(view, BOS, z, &h);
    loop {
        let emitted = tokens.len() - 1;
        let next = if emitted == max_len - 1 {
            EOS
        } else {
            let mut best = usize::MAX;
            let mut best_p = f64::NEG_INFINITY;
            for (tok, &p) in dist.iter().enumerate() {
                if tok != BOS && p > best_p {
                    best = tok;
                    best_p = p;
                }
            }
            best
        };
        tokens.push(next);
        if next == EOS {
            return tokens;
        }
        (h, dist) = decode_step(view, next, z, &h);
    }
}
