//! Corpus-level evaluation: BLEU-4 against grouped references and mean slot
//! error rate over every kept realization.

pub mod bleu;

pub use bleu::{corpus_bleu, BleuReport};

use crate::corpus::DialogueAct;
use crate::decoding::compute_err;
use crate::error::Error;
use crate::Result;

/// Slot error rates for one dialogue act's kept realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct DaErr {
    pub da_text: String,
    /// One rate per realization, rank order.
    pub rates: Vec<f64>,
}

/// Mean slot error rate, as a percentage, over all (act, realization)
/// pairs. `outputs[i]` holds the delexicalized token sequences kept for
/// `das[i]` after reranking.
pub fn corpus_err(outputs: &[Vec<Vec<String>>], das: &[DialogueAct]) -> Result<f64> {
    if outputs.len() != das.len() {
        return Err(Error::Mismatch(format!(
            "{} output groups vs {} dialogue acts",
            outputs.len(),
            das.len()
        )));
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (outs, da) in outputs.iter().zip(das) {
        for tokens in outs {
            sum += compute_err(tokens, da).err;
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::Mismatch("no realizations to score".to_string()));
    }
    Ok(100.0 * sum / pairs as f64)
}

/// Mean of precomputed per-realization rates, as a percentage.
pub fn mean_err_percent(rates: &[f64]) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::Mismatch("no realizations to score".to_string()));
    }
    Ok(100.0 * rates.iter().sum::<f64>() / rates.len() as f64)
}

/// Full evaluation outcome: corpus BLEU plus slot-error aggregate and the
/// per-act breakdown behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub bleu: BleuReport,
    pub err_percent: f64,
    pub per_da: Vec<DaErr>,
}

impl EvalReport {
    pub fn new(bleu: BleuReport, per_da: Vec<DaErr>) -> Result<Self> {
        let rates: Vec<f64> = per_da.iter().flat_map(|d| d.rates.iter().copied()).collect();
        let err_percent = mean_err_percent(&rates)?;
        Ok(EvalReport { bleu, err_percent, per_da })
    }

    /// Human-readable summary: BLEU to four decimals, ERR as a percentage.
    pub fn render(&self) -> String {
        let p = &self.bleu.precisions;
        format!(
            "BLEU {:.4}\nERR {:.2}%\nprecisions {:.4} {:.4} {:.4} {:.4}  brevity {:.4}  lengths {}/{}\n",
            self.bleu.bleu,
            self.err_percent,
            p[0],
            p[1],
            p[2],
            p[3],
            self.bleu.brevity_penalty,
            self.bleu.hyp_len,
            self.bleu.ref_len,
        )
    }

    /// `key=value` lines with full float precision, for scripts.
    pub fn machine(&self) -> String {
        let p = &self.bleu.precisions;
        let mut out = String::new();
        out.push_str(&format!("bleu={}\n", self.bleu.bleu));
        for (i, v) in p.iter().enumerate() {
            out.push_str(&format!("p{}={}\n", i + 1, v));
        }
        out.push_str(&format!("brevity_penalty={}\n", self.bleu.brevity_penalty));
        out.push_str(&format!("hyp_len={}\n", self.bleu.hyp_len));
        out.push_str(&format!("ref_len={}\n", self.bleu.ref_len));
        out.push_str(&format!("err_percent={}\n", self.err_percent));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_da;

    fn toks(text: &str) -> Vec<String> {
        text.split_whitespace().map(|t| t.to_string()).collect()
    }

    #[test]
    fn perfect_realizations_score_zero_percent() {
        let das = vec![parse_da("inform(name='x';area='y')").unwrap()];
        let outputs = vec![vec![toks("SLOT_NAME in SLOT_AREA"), toks("SLOT_AREA has SLOT_NAME")]];
        assert_eq!(corpus_err(&outputs, &das).unwrap(), 0.0);
    }

    #[test]
    fn one_miss_across_fifty_pairs_is_one_percent() {
        // Ten acts with two delexicalizable slots each, five realizations
        // apiece; a single realization misses one slot: (1/2)/50 = 1%.
        let mut das = Vec::new();
        let mut outputs = Vec::new();
        for _ in 0..10 {
            das.push(parse_da("inform(name='x';area='y')").unwrap());
            outputs.push(vec![toks("SLOT_NAME in SLOT_AREA"); 5]);
        }
        outputs[3][2] = toks("SLOT_NAME is nice");
        let err = corpus_err(&outputs, &das).unwrap();
        assert!((err - 1.0).abs() < 1e-12);
    }

    #[test]
    fn misaligned_or_empty_inputs_error() {
        let das = vec![parse_da("inform(name='x')").unwrap()];
        assert!(corpus_err(&[], &das).is_err());
        let empty: Vec<Vec<Vec<String>>> = vec![Vec::new()];
        assert!(corpus_err(&empty, &das).is_err());
    }

    #[test]
    fn report_renders_four_decimal_bleu_and_percent_err() {
        let refs = vec![vec![toks("a b c d e")]];
        let hyps = vec![toks("a b c d e")];
        let bleu = corpus_bleu(&hyps, &refs, false).unwrap();
        let per_da = vec![DaErr {
            da_text: "inform(name='x')".to_string(),
            rates: vec![0.0, 0.5],
        }];
        let report = EvalReport::new(bleu, per_da).unwrap();
        assert!((report.err_percent - 25.0).abs() < 1e-12);
        let text = report.render();
        assert!(text.contains("BLEU 1.0000"));
        assert!(text.contains("ERR 25.00%"));
        let machine = report.machine();
        assert!(machine.contains("bleu=1\n"));
        assert!(machine.contains("err_percent=25\n"));
    }
}
