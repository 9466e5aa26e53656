//! Embedding-table initialization, optionally seeded from a pretrained
//! word-vector text file (`token v1 v2 ... vd` per line).

use std::path::Path;

use crate::corpus::Vocab;
use crate::error::Error;
use crate::math::{Matrix, Rng};
use crate::Result;

/// How much of the vocabulary a pretrained file covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedCoverage {
    pub covered: usize,
    pub total: usize,
}

impl EmbedCoverage {
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.covered as f64 / self.total as f64
        }
    }
}

/// Builds the |V| × d embedding table: rows for tokens found in the
/// pretrained file are copied, everything else (including slot tokens and
/// sentinels) draws uniform(−0.1, 0.1). No file → fully random.
pub fn init_embeddings(
    vocab: &Vocab,
    pretrained: Option<&Path>,
    embed_size: usize,
    rng: &mut Rng,
) -> Result<(Matrix, EmbedCoverage)> {
    let mut table = Matrix::zeros(vocab.len(), embed_size);
    for r in 0..table.rows() {
        for c in 0..embed_size {
            table.set(r, c, rng.uniform(-0.1, 0.1));
        }
    }
    let mut coverage = EmbedCoverage { covered: 0, total: vocab.len() };
    let Some(path) = pretrained else {
        return Ok((table, coverage));
    };
    let text = std::fs::read_to_string(path)?;
    let bad = |message: String| Error::BadArtifact {
        path: path.display().to_string(),
        message,
    };
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap();
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| bad(format!("line {}: bad number {f:?}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if values.len() != embed_size {
            return Err(bad(format!(
                "line {}: vector has {} dimensions, embeddings need {embed_size}",
                lineno + 1,
                values.len()
            )));
        }
        if let Some(id) = vocab.id(token) {
            for (c, &v) in values.iter().enumerate() {
                table.set(id, c, v);
            }
            coverage.covered += 1;
        }
    }
    Ok((table, coverage))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocab {
        let sentences: Vec<Vec<String>> = vec![["the", "cat", "sat"]
            .iter()
            .map(|w| w.to_string())
            .collect()];
        Vocab::build(&sentences)
    }

    #[test]
    fn no_file_gives_random_rows_in_range() {
        let v = vocab();
        let mut rng = Rng::new(2);
        let (table, cov) = init_embeddings(&v, None, 4, &mut rng).unwrap();
        assert_eq!((table.rows(), table.cols()), (v.len(), 4));
        assert_eq!(cov.covered, 0);
        assert!(table.data().iter().all(|&x| (-0.1..=0.1).contains(&x)));
    }

    #[test]
    fn partial_file_copies_matching_rows() {
        let v = vocab();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "cat 1 2 3\nunrelated 9 9 9\nthe 4 5 6\n").unwrap();
        let mut rng = Rng::new(2);
        let (table, cov) = init_embeddings(&v, Some(&path), 3, &mut rng).unwrap();
        assert_eq!(cov.covered, 2);
        let cat = v.id("cat").unwrap();
        assert_eq!(table.row(cat), &[1.0, 2.0, 3.0]);
        let the = v.id("the").unwrap();
        assert_eq!(table.row(the), &[4.0, 5.0, 6.0]);
        // "sat" missed the file and stays random but in range.
        let sat = v.id("sat").unwrap();
        assert!(table.row(sat).iter().all(|&x| (-0.1..=0.1).contains(&x)));
    }

    #[test]
    fn coverage_matches_set_intersection() {
        let v = vocab();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        let file_tokens = ["cat", "dog", "sat", "mat"];
        let lines: Vec<String> =
            file_tokens.iter().map(|t| format!("{t} 0.5 0.5")).collect();
        std::fs::write(&path, lines.join("\n")).unwrap();
        let mut rng = Rng::new(2);
        let (_, cov) = init_embeddings(&v, Some(&path), 2, &mut rng).unwrap();
        let brute = file_tokens.iter().filter(|t| v.id(t).is_some()).count();
        assert_eq!(cov.covered, brute);
        assert!((cov.percent() - 100.0 * brute as f64 / v.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_errors() {
        let v = vocab();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "cat 1 2 3 4\n").unwrap();
        let mut rng = Rng::new(2);
        assert!(init_embeddings(&v, Some(&path), 3, &mut rng).is_err());
    }
}
