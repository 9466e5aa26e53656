//! Hand-derived backpropagation through time for all three cells.
//!
//! Gradients flow through every path of the forward equations: the softmax
//! output, the convex state combination, both gates, the candidate tanh and
//! its reset-modulated recurrent term, the tanh(W_dc d) modulation, the
//! refinement gate into W_dz/W_dh, dropout masks, and the embedding rows of
//! the tokens actually used. Derivations are certified against central
//! finite differences (see `gradient_check_model` and the acceptance suite).

use crate::error::{Error, Result};
use crate::math::check::{finite_diff_grad, relative_error};
use crate::math::ops::add_assign;
use crate::math::Matrix;

use super::forward::{forward_sequence, StepMasks, StepTrace};
use super::params::{CellSpec, CellView, ModelParams};
use super::{CellKind, Param};

/// Per-role gradient matrices for one model, accumulated over a sequence.
#[derive(Debug, Clone)]
pub struct CellGrads {
    grads: Vec<(Param, Matrix)>,
}

impl CellGrads {
    fn zeros(view: &CellView) -> Self {
        let biases = view.b_r.is_some();
        let grads = Param::required_for(view.kind, biases)
            .into_iter()
            .map(|p| {
                let (r, c) = p.shape(view.dims);
                (p, Matrix::zeros(r, c))
            })
            .collect();
        CellGrads { grads }
    }

    pub fn get(&self, role: Param) -> Option<&Matrix> {
        self.grads.iter().find(|(p, _)| *p == role).map(|(_, m)| m)
    }

    fn get_mut(&mut self, role: Param) -> &mut Matrix {
        &mut self
            .grads
            .iter_mut()
            .find(|(p, _)| *p == role)
            .unwrap_or_else(|| panic!("no gradient slot for {}", role.name()))
            .1
    }

    pub fn iter(&self) -> impl Iterator<Item = (Param, &Matrix)> {
        self.grads.iter().map(|(p, m)| (*p, m))
    }

    /// Add a bias-style column gradient.
    fn add_col(&mut self, role: Param, v: &[f64]) {
        let m = self.get_mut(role);
        for (i, &x) in v.iter().enumerate() {
            let cur = m.get(i, 0);
            m.set(i, 0, cur + x);
        }
    }

    /// Accumulate into the store's gradient slots under `spec`'s keys.
    /// Shared keys (tied models) collect contributions from every spec that
    /// maps onto them.
    pub fn accumulate(&self, spec: &CellSpec, store: &mut crate::math::ParamStore) {
        for (role, m) in self.iter() {
            store.grad_mut(spec.key(role)).add_scaled(m, 1.0);
        }
    }
}

fn sigmoid_back(da: &[f64], s: &[f64]) -> Vec<f64> {
    da.iter().zip(s).map(|(&g, &s)| g * s * (1.0 - s)).collect()
}

fn tanh_back(dt: &[f64], t: &[f64]) -> Vec<f64> {
    dt.iter().zip(t).map(|(&g, &t)| g * (1.0 - t * t)).collect()
}

fn hadamard3(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| x * y).collect()
}

/// Exact gradients of the sequence NLL with respect to every parameter.
///
/// `traces` must come from a `forward_sequence` over the same
/// `(token_ids, z)` with the same parameters.
pub fn backward_sequence(
    view: &CellView,
    traces: &[StepTrace],
    token_ids: &[usize],
    z: &[f64],
) -> Result<CellGrads> {
    if traces.len() != token_ids.len().saturating_sub(1) {
        return Err(Error::Mismatch(format!(
            "{} traces for {} token ids",
            traces.len(),
            token_ids.len()
        )));
    }
    let mut g = CellGrads::zeros(view);
    let hidden = view.dims.hidden;
    let biases = view.b_r.is_some();
    let mut dh_next = vec![0.0; hidden];
    for t in (0..traces.len()).rev() {
        let tr = &traces[t];
        if tr.h.len() != hidden || tr.token >= view.dims.vocab {
            return Err(Error::Mismatch(format!(
                "trace {t} does not match the model dimensions"
            )));
        }
        let target = token_ids[t + 1];

        // Softmax + NLL: dL/dlogits = p - onehot(target).
        let mut dlogits = tr.p.clone();
        dlogits[target] -= 1.0;
        g.get_mut(Param::Who).add_outer(&dlogits, &tr.h_out);
        if biases {
            g.add_col(Param::Bo, &dlogits);
        }
        let dh_out = view.w_ho.matvec_transposed(&dlogits);

        // h_out = h .* hidden_mask; recurrent state itself is unmasked.
        let mut dh = dh_next.clone();
        match &tr.masks {
            Some(m) => add_assign(&mut dh, &hadamard3(&dh_out, &m.hidden)),
            None => add_assign(&mut dh, &dh_out),
        }

        // h = u .* h_prev + (1 - u) .* cand
        let cand = tr.candidate();
        let du: Vec<f64> = dh
            .iter()
            .zip(&tr.h_prev)
            .zip(&cand)
            .map(|((&g, &hp), &c)| g * (hp - c))
            .collect();
        let da_u = sigmoid_back(&du, &tr.u);
        let dcand: Vec<f64> = dh.iter().zip(&tr.u).map(|(&g, &u)| g * (1.0 - u)).collect();

        // cand = t_c [+ t_d]; t_c = tanh(W_hx x + r .* whh_h).
        let da_c = tanh_back(&dcand, &tr.t_c);
        // Gradient into the refinement gate accumulates from up to two
        // paths: tanh(W_dc d) and x = d .* w.
        let mut dd = vec![0.0; view.dims.embed];
        if let Some(t_d) = &tr.t_d {
            let da_g = tanh_back(&dcand, t_d);
            let d_vec = tr.d.as_ref().expect("t_d implies d");
            g.get_mut(Param::Wdc).add_outer(&da_g, d_vec);
            add_assign(&mut dd, &view.w_dc.unwrap().matvec_transposed(&da_g));
        }

        let dr = hadamard3(&da_c, &tr.whh_h);
        let da_r = sigmoid_back(&dr, &tr.r);
        let dwhh_h = hadamard3(&da_c, &tr.r);

        g.get_mut(Param::Whx).add_outer(&da_c, &tr.x);
        g.get_mut(Param::Whh).add_outer(&dwhh_h, &tr.h_prev);
        g.get_mut(Param::Wrx).add_outer(&da_r, &tr.x);
        g.get_mut(Param::Wrh).add_outer(&da_r, &tr.h_prev);
        g.get_mut(Param::Wux).add_outer(&da_u, &tr.x);
        g.get_mut(Param::Wuh).add_outer(&da_u, &tr.h_prev);
        if view.kind == CellKind::SrgruContext {
            g.get_mut(Param::Wrz).add_outer(&da_r, z);
            g.get_mut(Param::Wuz).add_outer(&da_u, z);
        }
        if biases {
            g.add_col(Param::Bc, &da_c);
            g.add_col(Param::Br, &da_r);
            g.add_col(Param::Bu, &da_u);
        }

        let mut dx = view.w_hx.matvec_transposed(&da_c);
        add_assign(&mut dx, &view.w_rx.matvec_transposed(&da_r));
        add_assign(&mut dx, &view.w_ux.matvec_transposed(&da_u));

        // x = d .* w (gated kinds) or x = w (GruBase).
        let mut dh_prev_refine = vec![0.0; hidden];
        let dw = match &tr.d {
            None => dx,
            Some(d_vec) => {
                add_assign(&mut dd, &hadamard3(&dx, &tr.w));
                let dw = hadamard3(&dx, d_vec);
                let da_d = sigmoid_back(&dd, d_vec);
                g.get_mut(Param::Wdz).add_outer(&da_d, z);
                if view.kind == CellKind::SrgruContext {
                    g.get_mut(Param::Wdh).add_outer(&da_d, &tr.h_prev);
                    dh_prev_refine = view.w_dh.unwrap().matvec_transposed(&da_d);
                }
                if biases {
                    g.add_col(Param::Bd, &da_d);
                }
                dw
            }
        };

        // w = embed[token] .* input_mask.
        let dembed_row = match &tr.masks {
            Some(m) => hadamard3(&dw, &m.input),
            None => dw,
        };
        add_assign(g.get_mut(Param::Embed).row_mut(tr.token), &dembed_row);

        // All recurrent paths into h_prev.
        let mut dh_prev = hadamard3(&dh, &tr.u);
        add_assign(&mut dh_prev, &view.w_rh.matvec_transposed(&da_r));
        add_assign(&mut dh_prev, &view.w_uh.matvec_transposed(&da_u));
        add_assign(&mut dh_prev, &view.w_hh.matvec_transposed(&dwhh_h));
        add_assign(&mut dh_prev, &dh_prev_refine);
        dh_next = dh_prev;
    }
    Ok(g)
}

/// Run the finite-difference oracle against the analytic gradients on one
/// `(token_ids, z, masks)` instance. Returns `(storage key, relative error)`
/// per parameter; the model is restored bit-exactly.
pub fn gradient_check_model(
    model: &mut ModelParams,
    token_ids: &[usize],
    z: &[f64],
    masks: Option<&[StepMasks]>,
    eps: f64,
) -> Result<Vec<(String, f64)>> {
    let spec = model.spec.clone();
    let (_, traces) = forward_sequence(&spec.view(&model.store), token_ids, z, masks)?;
    let analytic = backward_sequence(&spec.view(&model.store), &traces, token_ids, z)?;
    let mut f = |store: &crate::math::ParamStore| {
        forward_sequence(&spec.view(store), token_ids, z, masks)
            .map(|(loss, _)| loss)
            .unwrap_or(f64::NAN)
    };
    let numeric = finite_diff_grad(&mut f, &mut model.store, eps)?;
    let mut out = Vec::new();
    for role in spec.roles() {
        let key = spec.key(role).to_string();
        let num = numeric
            .iter()
            .find(|(name, _)| *name == key)
            .map(|(_, m)| m)
            .expect("finite differences cover every parameter");
        let err = relative_error(analytic.get(role).unwrap(), num);
        out.push((key, err));
    }
    Ok(out)
}
