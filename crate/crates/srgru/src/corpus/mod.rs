//! Dataset ingestion, dialogue-act parsing, delexicalization, vocabulary,
//! and encoding of the conditioning vector z.

pub mod da;
pub mod dataset;
pub mod delex;
pub mod schema;
pub mod token;
pub mod vocab;

pub use da::{parse_da, render_da, DialogueAct, Slot, ValueClass};
pub use dataset::{group_records, load_corpus, load_records, split_groups, Corpus, DaGroup};
pub use delex::{delexicalize, lexicalize, slot_token, slot_token_name, DelexUtterance};
pub use schema::{DaSchema, DaVector};
pub use token::{detokenize, tokenize};
pub use vocab::{Vocab, BOS, EOS, UNK};

use sha2::{Digest, Sha256};

/// Truncated SHA-256 content hash used to cross-check artifacts.
pub fn content_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(16);
    for b in &digest[..8] {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
