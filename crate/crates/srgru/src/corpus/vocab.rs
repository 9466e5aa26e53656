//! Token vocabulary with reserved sentinels and stable serialization.
//!
//! Index layout: BOS, EOS, UNK, then slot tokens sorted, then words sorted.
//! The layout is a function of the token set alone, so rebuilding from the
//! same corpus yields the same indices.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::delex::SLOT_PREFIX;

pub const VOCAB_FORMAT: &str = "srgru-vocab v1";
pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";
pub const BOS: usize = 0;
pub const EOS: usize = 1;
pub const UNK: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Build from delexicalized training sentences.
    pub fn build<'a, S>(sentences: impl IntoIterator<Item = S>) -> Self
    where
        S: IntoIterator<Item = &'a String>,
    {
        let mut slots = BTreeSet::new();
        let mut words = BTreeSet::new();
        for sentence in sentences {
            for tok in sentence {
                if tok.starts_with(SLOT_PREFIX) {
                    slots.insert(tok.clone());
                } else {
                    words.insert(tok.clone());
                }
            }
        }
        let mut tokens = vec![
            BOS_TOKEN.to_string(),
            EOS_TOKEN.to_string(),
            UNK_TOKEN.to_string(),
        ];
        tokens.extend(slots);
        tokens.extend(words);
        Self::from_tokens(tokens)
    }

    fn from_tokens(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocab { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> usize {
        self.id(token).unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn is_slot(&self, id: usize) -> bool {
        self.tokens[id].starts_with(SLOT_PREFIX)
    }

    /// Token ids wrapped in BOS/EOS, unknown words mapped to UNK.
    pub fn encode_sentence(&self, tokens: &[String]) -> Vec<usize> {
        let mut ids = Vec::with_capacity(tokens.len() + 2);
        ids.push(BOS);
        ids.extend(tokens.iter().map(|t| self.id_or_unk(t)));
        ids.push(EOS);
        ids
    }

    /// Inverse of encode_sentence minus the sentinels.
    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter()
            .filter(|&&i| i != BOS && i != EOS)
            .map(|&i| self.tokens[i].clone())
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{VOCAB_FORMAT}").unwrap();
        for t in &self.tokens {
            writeln!(s, "{t}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let bad = |message: String| Error::BadArtifact {
            path: origin.display().to_string(),
            message,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(l) if l == VOCAB_FORMAT => {}
            other => return Err(bad(format!("bad vocab header: {other:?}"))),
        }
        let tokens: Vec<String> = lines.map(str::to_string).collect();
        if tokens.len() < 3
            || tokens[BOS] != BOS_TOKEN
            || tokens[EOS] != EOS_TOKEN
            || tokens[UNK] != UNK_TOKEN
        {
            return Err(bad("reserved sentinel tokens missing".to_string()));
        }
        let vocab = Self::from_tokens(tokens);
        if vocab.index.len() != vocab.tokens.len() {
            return Err(bad("duplicate token entries".to_string()));
        }
        Ok(vocab)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, path)
    }

    pub fn hash(&self) -> String {
        crate::corpus::content_hash(self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentences() -> Vec<Vec<String>> {
        vec![
            ["SLOT_NAME", "has", "internet"]
                .map(String::from)
                .to_vec(),
            ["SLOT_NAME", "is", "in", "SLOT_AREA", "."]
                .map(String::from)
                .to_vec(),
        ]
    }

    #[test]
    fn layout_reserved_then_slots_then_words() {
        let v = Vocab::build(&sentences());
        assert_eq!(v.token(BOS), BOS_TOKEN);
        assert_eq!(v.token(EOS), EOS_TOKEN);
        assert_eq!(v.token(UNK), UNK_TOKEN);
        assert_eq!(v.token(3), "SLOT_AREA");
        assert_eq!(v.token(4), "SLOT_NAME");
        let words: Vec<&str> = (5..v.len()).map(|i| v.token(i)).collect();
        assert_eq!(words, vec![".", "has", "in", "internet", "is"]);
    }

    #[test]
    fn encode_wraps_and_maps_unknowns() {
        let v = Vocab::build(&sentences());
        let ids = v.encode_sentence(&["has".to_string(), "zebras".to_string()]);
        assert_eq!(ids[0], BOS);
        assert_eq!(*ids.last().unwrap(), EOS);
        assert_eq!(ids[2], UNK);
        assert_eq!(v.decode(&ids), vec!["has".to_string(), UNK_TOKEN.to_string()]);
    }

    #[test]
    fn file_round_trip_preserves_indices_and_hash() {
        let v = Vocab::build(&sentences());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        v.save(&path).unwrap();
        let back = Vocab::load(&path).unwrap();
        assert_eq!(v, back);
        assert_eq!(v.hash(), back.hash());
    }

    #[test]
    fn malformed_files_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        std::fs::write(&path, "wrong header\n<s>\n</s>\n<unk>\n").unwrap();
        assert!(matches!(
            Vocab::load(&path),
            Err(Error::BadArtifact { .. })
        ));
        std::fs::write(&path, format!("{VOCAB_FORMAT}\n<s>\n</s>\n")).unwrap();
        assert!(Vocab::load(&path).is_err());
    }

    #[test]
    fn slot_token_ids_identified() {
        let v = Vocab::build(&sentences());
        assert!(v.is_slot(v.id("SLOT_NAME").unwrap()));
        assert!(!v.is_slot(v.id("has").unwrap()));
    }
}
