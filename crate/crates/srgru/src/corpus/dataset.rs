//! Benchmark-layout dataset loading, multi-reference grouping, and the
//! deterministic 3:1:1 split.
//!
//! Dataset files hold one JSON array of records, each record an array whose
//! first element is the DA string and second the reference utterance
//! (further elements ignored). Leading non-array lines are treated as a
//! comment block. A directory containing train.json/valid.json/test.json is
//! honored as a pre-split corpus.

use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Rng;

use super::da::{parse_da, DialogueAct};

/// All references sharing one exact DA string.
#[derive(Debug, Clone, PartialEq)]
pub struct DaGroup {
    pub da_text: String,
    pub da: DialogueAct,
    pub references: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub train: Vec<DaGroup>,
    pub valid: Vec<DaGroup>,
    pub test: Vec<DaGroup>,
}

impl Corpus {
    pub fn splits(&self) -> [(&str, &[DaGroup]); 3] {
        [
            ("train", &self.train[..]),
            ("valid", &self.valid[..]),
            ("test", &self.test[..]),
        ]
    }
}

/// Raw (DA string, reference) records in file order.
pub fn load_records(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let start = text
        .lines()
        .scan(0usize, |offset, line| {
            let at = *offset;
            *offset += line.len() + 1;
            Some((at, line))
        })
        .find(|(_, line)| line.trim_start().starts_with('['))
        .map(|(at, _)| at)
        .ok_or_else(|| Error::BadArtifact {
            path: path.display().to_string(),
            message: "no record array found".to_string(),
        })?;
    let value: serde_json::Value =
        serde_json::from_str(&text[start..]).map_err(|e| Error::BadArtifact {
            path: path.display().to_string(),
            message: format!("bad record array: {e}"),
        })?;
    let array = value.as_array().ok_or_else(|| Error::BadArtifact {
        path: path.display().to_string(),
        message: "top-level value is not an array".to_string(),
    })?;
    let mut records = Vec::with_capacity(array.len());
    for (index, rec) in array.iter().enumerate() {
        let fields = rec.as_array().ok_or_else(|| Error::BadRecord {
            index,
            message: "record is not an array".to_string(),
        })?;
        let field = |i: usize, what: &str| -> Result<String> {
            fields
                .get(i)
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .ok_or_else(|| Error::BadRecord {
                    index,
                    message: format!("missing {what}"),
                })
        };
        records.push((field(0, "DA string")?, field(1, "reference utterance")?));
    }
    Ok(records)
}

/// Group records by exact DA string, preserving first-appearance order.
/// The DA is parsed once per group; parse failures carry the record index.
pub fn group_records(records: &[(String, String)]) -> Result<Vec<DaGroup>> {
    let mut groups: Vec<DaGroup> = Vec::new();
    let mut by_text = std::collections::HashMap::new();
    for (index, (da_text, reference)) in records.iter().enumerate() {
        match by_text.get(da_text) {
            Some(&g) => {
                let group: &mut DaGroup = &mut groups[g];
                group.references.push(reference.clone());
            }
            None => {
                let da = parse_da(da_text).map_err(|e| Error::BadRecord {
                    index,
                    message: format!("bad DA string: {e}"),
                })?;
                by_text.insert(da_text.clone(), groups.len());
                groups.push(DaGroup {
                    da_text: da_text.clone(),
                    da,
                    references: vec![reference.clone()],
                });
            }
        }
    }
    Ok(groups)
}

/// Deterministic 3:1:1 split over DA groups (groups never straddle splits,
/// keeping every multi-reference set intact).
pub fn split_groups(mut groups: Vec<DaGroup>, seed: u64) -> Corpus {
    let mut rng = Rng::new(seed);
    rng.shuffle(&mut groups);
    let n = groups.len();
    let train_end = 3 * n / 5;
    let valid_end = 4 * n / 5;
    let test = groups.split_off(valid_end);
    let valid = groups.split_off(train_end);
    Corpus {
        train: groups,
        valid,
        test,
    }
}

fn load_split_file(path: &Path) -> Result<Vec<DaGroup>> {
    group_records(&load_records(path)?)
}

/// Load a corpus: a directory with train.json/valid.json/test.json is used
/// as-is; a single file is grouped and split 3:1:1 with `seed`.
pub fn load_corpus(path: &Path, seed: u64) -> Result<Corpus> {
    if path.is_dir() {
        let file = |name: &str| -> Result<Vec<DaGroup>> {
            let p = path.join(name);
            if p.is_file() {
                load_split_file(&p)
            } else {
                Err(Error::BadArtifact {
                    path: p.display().to_string(),
                    message: "pre-split corpus directory is missing this file".to_string(),
                })
            }
        };
        return Ok(Corpus {
            train: file("train.json")?,
            valid: file("valid.json")?,
            test: file("test.json")?,
        });
    }
    Ok(split_groups(load_split_file(path)?, seed))
}
