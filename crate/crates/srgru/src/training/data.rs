//! Turning a grouped corpus into trainable instances: delexicalize the
//! references, build the vocabulary and act schema from the training split,
//! and encode every (act, sentence) pair.

use crate::corpus::{delexicalize, tokenize, DaGroup, DaSchema, DialogueAct, Vocab};
use crate::error::Error;
use crate::Result;

/// One teacher-forced training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// BOS ... EOS token ids of the delexicalized sentence.
    pub ids: Vec<usize>,
    /// Conditioning vector of the owning act.
    pub z: Vec<f64>,
    /// Index into the split's decode groups.
    pub group: usize,
}

/// One act prepared for validation decoding: its conditioning vector and
/// the tokenized raw references BLEU compares against.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeGroup {
    pub da_text: String,
    pub da: DialogueAct,
    pub z: Vec<f64>,
    pub ref_tokens: Vec<Vec<String>>,
}

/// Everything `train` consumes, derived once per corpus.
#[derive(Debug, Clone)]
pub struct PreparedCorpus {
    pub vocab: Vocab,
    pub schema: DaSchema,
    pub train: Vec<Instance>,
    pub valid: Vec<Instance>,
    pub valid_groups: Vec<DecodeGroup>,
    /// Validation groups dropped because their act type is absent from the
    /// training-derived schema.
    pub skipped_valid: usize,
    /// Slot values across training references that never matched a surface
    /// substring (left lexicalized in the training text).
    pub delex_misses: usize,
}

/// Encodes groups for decoding; returns the prepared groups and how many
/// were skipped for unknown act types.
pub fn decode_groups(groups: &[DaGroup], schema: &DaSchema) -> (Vec<DecodeGroup>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for group in groups {
        match schema.encode_da(&group.da) {
            Ok(encoded) => out.push(DecodeGroup {
                da_text: group.da_text.clone(),
                da: group.da.clone(),
                z: encoded.z,
                ref_tokens: group.references.iter().map(|r| tokenize(r)).collect(),
            }),
            Err(_) => skipped += 1,
        }
    }
    (out, skipped)
}

/// Builds vocabulary, schema, and encoded instances from the train split,
/// plus validation instances/groups against that same vocabulary.
pub fn prepare(train: &[DaGroup], valid: &[DaGroup]) -> Result<PreparedCorpus> {
    if train.is_empty() {
        return Err(Error::Config("training split is empty".to_string()));
    }
    if valid.is_empty() {
        return Err(Error::Config("validation split is empty".to_string()));
    }
    let schema = DaSchema::build(train.iter().map(|g| &g.da));
    let mut delex_misses = 0;
    let mut train_tokens: Vec<Vec<String>> = Vec::new();
    let mut owners: Vec<usize> = Vec::new();
    for (g, group) in train.iter().enumerate() {
        for reference in &group.references {
            let delex = delexicalize(reference, &group.da);
            delex_misses += delex.misses.len();
            train_tokens.push(delex.tokens);
            owners.push(g);
        }
    }
    let vocab = Vocab::build(&train_tokens);

    let mut train_instances = Vec::with_capacity(train_tokens.len());
    for (tokens, &g) in train_tokens.iter().zip(&owners) {
        let encoded = schema.encode_da(&train[g].da)?;
        train_instances.push(Instance {
            ids: vocab.encode_sentence(tokens),
            z: encoded.z,
            group: g,
        });
    }

    let mut valid_groups = Vec::new();
    let mut valid_instances = Vec::new();
    let mut skipped_valid = 0;
    for group in valid {
        let Ok(encoded) = schema.encode_da(&group.da) else {
            skipped_valid += 1;
            continue;
        };
        let g = valid_groups.len();
        for reference in &group.references {
            let delex = delexicalize(reference, &group.da);
            valid_instances.push(Instance {
                ids: vocab.encode_sentence(&delex.tokens),
                z: encoded.z.clone(),
                group: g,
            });
        }
        valid_groups.push(DecodeGroup {
            da_text: group.da_text.clone(),
            da: group.da.clone(),
            z: encoded.z,
            ref_tokens: group.references.iter().map(|r| tokenize(r)).collect(),
        });
    }
    Ok(PreparedCorpus {
        vocab,
        schema,
        train: train_instances,
        valid: valid_instances,
        valid_groups,
        skipped_valid,
        delex_misses,
    })
}
