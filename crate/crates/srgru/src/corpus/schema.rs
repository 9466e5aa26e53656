//! Frozen feature schema mapping dialogue acts to the conditioning vector z.
//!
//! z is a multi-hot binary vector: a one-hot act-type block followed by one
//! indicator per slot feature. Slot features are (name) presence plus
//! (name, value-class) for non-normal classes, both derived from the
//! training split and sorted for determinism. Test-time DAs encode against
//! the frozen schema; unknown slot features contribute zeros and a counter,
//! unknown act types are errors.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::da::{DialogueAct, ValueClass};

pub const SCHEMA_FORMAT: &str = "srgru-schema v1";
const PRESENCE: &str = "presence";

/// One slot indicator: `kind` is `"presence"` or a non-normal value-class
/// label such as `"binary_yes"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SlotFeature {
    pub name: String,
    pub kind: String,
}

/// Act types and slot features in frozen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaSchema {
    act_types: Vec<String>,
    slot_features: Vec<SlotFeature>,
    act_index: HashMap<String, usize>,
    feat_index: HashMap<(String, String), usize>,
}

/// Encoded conditioning vector. Entries are 0.0 or 1.0; the act-type block
/// holds exactly one 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DaVector {
    pub z: Vec<f64>,
    /// Slot features of the DA absent from the schema (zero contribution).
    pub unknown_features: usize,
}

fn features_of(da: &DialogueAct) -> BTreeSet<SlotFeature> {
    let mut out = BTreeSet::new();
    for slot in &da.slots {
        out.insert(SlotFeature {
            name: slot.name.clone(),
            kind: PRESENCE.to_string(),
        });
        if slot.class != ValueClass::Normal {
            out.insert(SlotFeature {
                name: slot.name.clone(),
                kind: slot.class.label().to_string(),
            });
        }
    }
    out
}

impl DaSchema {
    /// Derive a schema from the training-split dialogue acts.
    pub fn build<'a>(das: impl IntoIterator<Item = &'a DialogueAct>) -> Self {
        let mut acts = BTreeSet::new();
        let mut feats = BTreeSet::new();
        for da in das {
            acts.insert(da.act_type.clone());
            feats.extend(features_of(da));
        }
        Self::from_parts(acts.into_iter().collect(), feats.into_iter().collect())
    }

    fn from_parts(act_types: Vec<String>, slot_features: Vec<SlotFeature>) -> Self {
        let act_index = act_types
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let feat_index = slot_features
            .iter()
            .enumerate()
            .map(|(i, f)| ((f.name.clone(), f.kind.clone()), i))
            .collect();
        DaSchema {
            act_types,
            slot_features,
            act_index,
            feat_index,
        }
    }

    pub fn act_types(&self) -> &[String] {
        &self.act_types
    }

    pub fn slot_features(&self) -> &[SlotFeature] {
        &self.slot_features
    }

    /// Length of z: act-type block plus slot-feature block.
    pub fn size(&self) -> usize {
        self.act_types.len() + self.slot_features.len()
    }

    /// Encode a DA against this schema.
    pub fn encode_da(&self, da: &DialogueAct) -> Result<DaVector> {
        let act = *self
            .act_index
            .get(&da.act_type)
            .ok_or_else(|| Error::UnknownActType(da.act_type.clone()))?;
        let mut z = vec![0.0; self.size()];
        z[act] = 1.0;
        let mut unknown = 0;
        for f in features_of(da) {
            match self.feat_index.get(&(f.name.clone(), f.kind.clone())) {
                Some(&i) => z[self.act_types.len() + i] = 1.0,
                None => unknown += 1,
            }
        }
        Ok(DaVector {
            z,
            unknown_features: unknown,
        })
    }

    /// Canonical plain-text serialization, also the hashing preimage.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{SCHEMA_FORMAT}").unwrap();
        for a in &self.act_types {
            writeln!(s, "act {a}").unwrap();
        }
        for f in &self.slot_features {
            writeln!(s, "feat {} {}", f.name, f.kind).unwrap();
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
            Some(l) if l == SCHEMA_FORMAT => {}
            other => return Err(bad(format!("bad schema header: {other:?}"))),
        }
        let mut acts = Vec::new();
        let mut feats = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if let Some(a) = line.strip_prefix("act ") {
                acts.push(a.to_string());
            } else if let Some(f) = line.strip_prefix("feat ") {
                let (name, kind) = f
                    .rsplit_once(' ')
                    .ok_or_else(|| bad(format!("line {}: bad feature entry", n + 2)))?;
                if kind != PRESENCE
                    && ValueClass::from_label(kind).is_none_or(|c| c == ValueClass::Normal)
                {
                    return Err(bad(format!("line {}: bad feature kind {kind:?}", n + 2)));
                }
                feats.push(SlotFeature {
                    name: name.to_string(),
                    kind: kind.to_string(),
                });
            } else {
                return Err(bad(format!("line {}: unrecognized entry", n + 2)));
            }
        }
        Ok(Self::from_parts(acts, feats))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, path)
    }

    /// Truncated SHA-256 of the canonical serialization; embedded in model
    /// files to refuse mismatched artifacts.
    pub fn hash(&self) -> String {
        crate::corpus::content_hash(self.to_text().as_bytes())
    }
}
