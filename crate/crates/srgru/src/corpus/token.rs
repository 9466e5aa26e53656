//! Utterance tokenization rules, shared by training, decoding, and BLEU.
//!
//! Lowercase, split on whitespace, then detach any trailing run of
//! `. , ? !` from each word as separate tokens. Detokenization joins
//! with spaces and re-attaches exactly those punctuation marks.

const DETACH: [char; 4] = ['.', ',', '?', '!'];

/// Tokenize a raw utterance.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.to_lowercase().split_whitespace() {
        let core_end = word
            .char_indices()
            .rev()
            .take_while(|(_, c)| DETACH.contains(c))
            .last()
            .map(|(i, _)| i)
            .unwrap_or(word.len());
        if core_end > 0 {
            out.push(word[..core_end].to_string());
        }
        for c in word[core_end..].chars() {
            out.push(c.to_string());
        }
    }
    out
}

/// Join tokens into a sentence, attaching detached punctuation back to the
/// preceding word.
pub fn detokenize(tokens: &[String]) -> String {
    let mut out = String::new();
    for tok in tokens {
        let is_punct = tok.chars().count() == 1 && DETACH.contains(&tok.chars().next().unwrap());
        if !out.is_empty() && !is_punct {
            out.push(' ');
        }
        out.push_str(tok);
    }
    out
}
