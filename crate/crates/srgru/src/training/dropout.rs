//! Inverted dropout: entries survive with probability 1 − rate and are
//! scaled by 1/(1 − rate), so the masked vector is unbiased in expectation
//! and evaluation needs no rescaling.

use crate::cells::StepMasks;
use crate::math::Rng;

/// A fresh mask of 0s and 1/(1−rate)s. Rate 0 yields all-ones.
pub fn dropout_mask(len: usize, rate: f64, rng: &mut Rng) -> Vec<f64> {
    debug_assert!((0.0..1.0).contains(&rate));
    let keep = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| if rng.chance(rate) { 0.0 } else { keep })
        .collect()
}

/// `v` under a fresh mask.
pub fn apply_dropout(v: &[f64], rate: f64, rng: &mut Rng) -> Vec<f64> {
    let mask = dropout_mask(v.len(), rate, rng);
    v.iter().zip(&mask).map(|(&x, &m)| x * m).collect()
}

/// Per-timestep masks for a sequence with `steps` transitions: one mask for
/// the input embedding, one for the pre-output hidden state. None when the
/// rate is 0 (evaluation path).
pub fn sentence_masks(
    steps: usize,
    embed: usize,
    hidden: usize,
    rate: f64,
    rng: &mut Rng,
) -> Option<Vec<StepMasks>> {
    if rate == 0.0 {
        return None;
    }
    Some(
        (0..steps)
            .map(|_| StepMasks {
                input: dropout_mask(embed, rate, rng),
                hidden: dropout_mask(hidden, rate, rng),
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_identity() {
        let v = [1.5, -2.0, 0.25];
        let mut rng = Rng::new(3);
        assert_eq!(apply_dropout(&v, 0.0, &mut rng), v.to_vec());
        assert!(sentence_masks(4, 3, 3, 0.0, &mut rng).is_none());
    }

    #[test]
    fn expectation_is_preserved() {
        // Mean of 1e5 masked copies of a constant input stays within 2%.
        let mut rng = Rng::new(11);
        let v = [1.0; 8];
        let mut sums = [0.0; 8];
        let runs = 100_000;
        for _ in 0..runs {
            for (s, m) in sums.iter_mut().zip(apply_dropout(&v, 0.7, &mut rng)) {
                *s += m;
            }
        }
        for s in sums {
            let mean = s / runs as f64;
            assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        }
    }

    #[test]
    fn fixed_seed_reproduces_masks() {
        let a = dropout_mask(32, 0.7, &mut Rng::new(99));
        let b = dropout_mask(32, 0.7, &mut Rng::new(99));
        assert_eq!(a, b);
        assert!(a.iter().all(|&m| m == 0.0 || (m - 1.0 / 0.3).abs() < 1e-12));
    }

    #[test]
    fn masks_cover_every_step() {
        let mut rng = Rng::new(4);
        let masks = sentence_masks(5, 3, 7, 0.5, &mut rng).unwrap();
        assert_eq!(masks.len(), 5);
        for m in &masks {
            assert_eq!((m.input.len(), m.hidden.len()), (3, 7));
        }
    }
}
