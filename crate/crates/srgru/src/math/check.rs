//! Central finite-difference gradients; the oracle every analytic backward
//! pass in the crate is certified against.

use crate::error::{Error, Result};

use super::matrix::Matrix;
use super::store::ParamStore;

/// Default perturbation size.
pub const DEFAULT_EPS: f64 = 1e-5;

/// Numerical gradient of `f` with respect to every scalar in `params`.
///
/// Uses central differences `(f(x+eps) - f(x-eps)) / (2 eps)` per scalar.
/// `params` is returned to its original state bit-exactly. `f` must be
/// deterministic; a non-finite evaluation aborts with the offending
/// parameter name.
pub fn finite_diff_grad<F>(
    f: &mut F,
    params: &mut ParamStore,
    eps: f64,
) -> Result<Vec<(String, Matrix)>>
where
    F: FnMut(&ParamStore) -> f64,
{
    assert!(eps > 0.0, "finite_diff_grad: eps must be positive");
    let names: Vec<String> = params.names().map(str::to_string).collect();
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let (rows, cols) = {
            let m = params.value(&name);
            (m.rows(), m.cols())
        };
        let mut grad = Matrix::zeros(rows, cols);
        for i in 0..rows * cols {
            let original = params.value(&name).data()[i];
            params.value_mut(&name).data_mut()[i] = original + eps;
            let plus = f(params);
            params.value_mut(&name).data_mut()[i] = original - eps;
            let minus = f(params);
            params.value_mut(&name).data_mut()[i] = original;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFinite(format!(
                    "finite_diff_grad: f at perturbed {name}[{i}]"
                )));
            }
            grad.data_mut()[i] = (plus - minus) / (2.0 * eps);
        }
        out.push((name, grad));
    }
    Ok(out)
}

/// Norm-scaled relative error between two gradient matrices:
/// `||a - b||_F / max(||a||_F + ||b||_F, floor)`.
pub fn relative_error(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.rows(), b.rows(), "relative_error: shape mismatch");
    assert_eq!(a.cols(), b.cols(), "relative_error: shape mismatch");
    let mut diff = 0.0;
    for (x, y) in a.data().iter().zip(b.data()) {
        diff += (x - y) * (x - y);
    }
    let denom = (a.frob_norm_sq().sqrt() + b.frob_norm_sq().sqrt()).max(1e-8);
    diff.sqrt() / denom
}
