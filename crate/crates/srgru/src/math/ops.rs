//! Elementwise vector kernels shared by every cell variant.
//!
//! All activations clamp their output into the *open* target interval so that
//! downstream invariants (gates strictly inside (0,1), tanh strictly inside
//! (-1,1), probabilities strictly positive) hold for every finite input, even
//! where libm saturates to the closed endpoint.

/// Largest f64 strictly below 1.0.
pub const ONE_MINUS: f64 = 1.0 - f64::EPSILON / 2.0;

fn sigmoid_scalar(x: f64) -> f64 {
    // Split on sign so the exponential argument is always <= 0.
    let s = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, ONE_MINUS)
}

fn tanh_scalar(x: f64) -> f64 {
    x.tanh().clamp(-ONE_MINUS, ONE_MINUS)
}

/// Elementwise logistic sigmoid, range (0, 1).
pub fn sigmoid(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| sigmoid_scalar(x)).collect()
}

/// Elementwise tanh, range (-1, 1).
pub fn tanh(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| tanh_scalar(x)).collect()
}

/// Numerically stable softmax via max subtraction.
///
/// Entries are strictly positive and sum to 1 within 1e-12.
pub fn softmax(v: &[f64]) -> Vec<f64> {
    assert!(!v.is_empty(), "softmax of empty vector");
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = v.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        // Guard against underflow to exact zero for extremely negative inputs.
        *p = (*p / sum).max(f64::MIN_POSITIVE);
    }
    out
}

/// `a + b` elementwise.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "add: length mismatch");
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn add_assign(a: &mut [f64], b: &[f64]) {
    assert_eq!(a.len(), b.len(), "add_assign: length mismatch");
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Elementwise product `a ⊙ b`.
pub fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "hadamard: length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
