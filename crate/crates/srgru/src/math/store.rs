//! Named parameter collection with a gradient slot per parameter.

use std::collections::HashMap;

use super::matrix::Matrix;

/// Ordered map of parameter name -> (value, gradient).
///
/// Iteration follows insertion order, so serialization and finite-difference
/// sweeps are deterministic. Gradient matrices always share the shape of their
/// value.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Matrix>,
    grads: Vec<Matrix>,
    index: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a parameter; its gradient starts at zero. Panics on duplicates.
    pub fn insert(&mut self, name: &str, value: Matrix) {
        assert!(
            !self.index.contains_key(name),
            "duplicate parameter name {name}"
        );
        self.index.insert(name.to_string(), self.names.len());
        self.grads.push(Matrix::zeros(value.rows(), value.cols()));
        self.values.push(value);
        self.names.push(name.to_string());
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|s| s.as_str())
    }

    fn idx(&self, name: &str) -> usize {
        *self
            .index
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn value(&self, name: &str) -> &Matrix {
        &self.values[self.idx(name)]
    }

    pub fn value_mut(&mut self, name: &str) -> &mut Matrix {
        let i = self.idx(name);
        &mut self.values[i]
    }

    pub fn grad(&self, name: &str) -> &Matrix {
        &self.grads[self.idx(name)]
    }

    pub fn grad_mut(&mut self, name: &str) -> &mut Matrix {
        let i = self.idx(name);
        &mut self.grads[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Matrix, &Matrix)> {
        self.names
            .iter()
            .zip(&self.values)
            .zip(&self.grads)
            .map(|((n, v), g)| (n.as_str(), v, g))
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(|m| m.rows() * m.cols()).sum()
    }

    pub fn zero_grads(&mut self) {
        for g in &mut self.grads {
            g.fill(0.0);
        }
    }

    /// Global L2 norm of all gradients.
    pub fn grad_norm(&self) -> f64 {
        self.grads
            .iter()
            .map(Matrix::frob_norm_sq)
            .sum::<f64>()
            .sqrt()
    }

    /// Rescale gradients so the global norm is at most `max_norm`.
    ///
    /// Pure scaling: the gradient direction is preserved.
    pub fn clip_grads(&mut self, max_norm: f64) {
        let norm = self.grad_norm();
        if norm > max_norm && norm > 0.0 {
            let s = max_norm / norm;
            for g in &mut self.grads {
                g.scale(s);
            }
        }
    }

    /// Add the gradient of the penalty `0.5 * coeff * ||theta||^2`, i.e.
    /// `grad += coeff * value`, for every parameter.
    pub fn add_l2_penalty_grad(&mut self, coeff: f64) {
        for (v, g) in self.values.iter().zip(&mut self.grads) {
            g.add_scaled(v, coeff);
        }
    }

    /// One SGD step: `value -= lr * grad`.
    pub fn sgd_step(&mut self, lr: f64) {
        for (v, g) in self.values.iter_mut().zip(&self.grads) {
            v.add_scaled(g, -lr);
        }
    }

    pub fn values_finite(&self) -> bool {
        self.values.iter().all(Matrix::is_finite)
    }
}
