//! Forward step kernels and teacher-forced sequence loss.
//!
//! Per step, with input embedding w, conditioning vector z, and previous
//! hidden state h':
//!   refinement   d = sigmoid(W_dz z [+ W_dh h'])          (gated kinds)
//!   gated input  x = d .* w                               (GruBase: x = w)
//!   reset        r = sigmoid(W_rx x + W_rh h' [+ W_rz z])
//!   update       u = sigmoid(W_ux x + W_uh h' [+ W_uz z])
//!   candidate    c = tanh(W_hx x + r .* (W_hh h')) [+ tanh(W_dc d)]
//!   state        h = u .* h' + (1 - u) .* c
//!   output       p = softmax(W_ho h)
//! Bracketed terms exist only for SrgruContext; optional biases join each
//! preactivation when the bias toggle is on.

use crate::error::{Error, Result};
use crate::math::ops::{add_assign, hadamard, sigmoid, softmax, tanh};
use crate::math::Matrix;

use super::params::CellView;
use super::CellKind;

/// Inverted-dropout masks for one step; entries are 0 or 1/(1-rate).
/// `input` masks the embedding w, `hidden` masks h before the output
/// projection. The recurrent state itself is never masked.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMasks {
    pub input: Vec<f64>,
    pub hidden: Vec<f64>,
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub struct StepTrace {
    pub token: usize,
    /// Embedding row after input dropout.
    pub w: Vec<f64>,
    /// Refinement gate; None for GruBase.
    pub d: Option<Vec<f64>>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    /// tanh(W_hx x + r .* (W_hh h_prev)).
    pub t_c: Vec<f64>,
    /// tanh(W_dc d); SrgruContext only.
    pub t_d: Option<Vec<f64>>,
    /// W_hh h_prev, cached for the reset-gate gradient.
    pub whh_h: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub h: Vec<f64>,
    /// h after output dropout; what the softmax actually saw.
    pub h_out: Vec<f64>,
    pub p: Vec<f64>,
    /// Masks applied this step, needed to route gradients through dropout.
    pub masks: Option<StepMasks>,
}

impl StepTrace {
    /// Candidate state c = t_c [+ t_d].
    pub fn candidate(&self) -> Vec<f64> {
        match &self.t_d {
            Some(t_d) => self.t_c.iter().zip(t_d).map(|(a, b)| a + b).collect(),
            None => self.t_c.clone(),
        }
    }
}

fn with_bias(mut v: Vec<f64>, b: Option<&Matrix>) -> Vec<f64> {
    if let Some(b) = b {
        for (x, row) in v.iter_mut().zip(0..) {
            *x += b.get(row, 0);
        }
    }
    v
}

/// Refinement gate from the dialogue act alone: d = sigmoid(W_dz z).
pub fn refine_base(view: &CellView, w: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let w_dz = view.w_dz.expect("refine_base requires W_dz");
    let a = with_bias(w_dz.matvec(z), view.b_d);
    let d = sigmoid(&a);
    let x = hadamard(&d, w);
    (d, x)
}

/// Context-aware refinement gate: d = sigmoid(W_dz z + W_dh h_prev).
pub fn refine_context(
    view: &CellView,
    w: &[f64],
    z: &[f64],
    h_prev: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let w_dz = view.w_dz.expect("refine_context requires W_dz");
    let w_dh = view.w_dh.expect("refine_context requires W_dh");
    let mut a = w_dz.matvec(z);
    add_assign(&mut a, &w_dh.matvec(h_prev));
    let a = with_bias(a, view.b_d);
    let d = sigmoid(&a);
    let x = hadamard(&d, w);
    (d, x)
}

/// Gate values and new state shared by the step variants.
#[derive(Debug, Clone)]
pub struct RecurrentCore {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub whh_h: Vec<f64>,
    pub t_c: Vec<f64>,
    pub t_d: Option<Vec<f64>>,
    pub h: Vec<f64>,
}

fn combine(u: &[f64], h_prev: &[f64], cand: &[f64]) -> Vec<f64> {
    u.iter()
        .zip(h_prev)
        .zip(cand)
        .map(|((&u, &hp), &c)| u * hp + (1.0 - u) * c)
        .collect()
}

/// Plain GRU transition (GruBase and SrgruBase).
pub fn gru_step(view: &CellView, x: &[f64], h_prev: &[f64]) -> RecurrentCore {
    let mut a_r = view.w_rx.matvec(x);
    add_assign(&mut a_r, &view.w_rh.matvec(h_prev));
    let r = sigmoid(&with_bias(a_r, view.b_r));
    let mut a_u = view.w_ux.matvec(x);
    add_assign(&mut a_u, &view.w_uh.matvec(h_prev));
    let u = sigmoid(&with_bias(a_u, view.b_u));
    let whh_h = view.w_hh.matvec(h_prev);
    let mut a_c = view.w_hx.matvec(x);
    add_assign(&mut a_c, &hadamard(&r, &whh_h));
    let t_c = tanh(&with_bias(a_c, view.b_c));
    let h = combine(&u, h_prev, &t_c);
    RecurrentCore {
        r,
        u,
        whh_h,
        t_c,
        t_d: None,
        h,
    }
}

/// SrgruContext transition: z joins both gates, tanh(W_dc d) joins the
/// candidate.
pub fn srgru_context_step(
    view: &CellView,
    x: &[f64],
    d: &[f64],
    z: &[f64],
    h_prev: &[f64],
) -> RecurrentCore {
    let w_rz = view.w_rz.expect("srgru_context_step requires W_rz");
    let w_uz = view.w_uz.expect("srgru_context_step requires W_uz");
    let w_dc = view.w_dc.expect("srgru_context_step requires W_dc");
    let mut a_r = view.w_rx.matvec(x);
    add_assign(&mut a_r, &view.w_rh.matvec(h_prev));
    add_assign(&mut a_r, &w_rz.matvec(z));
    let r = sigmoid(&with_bias(a_r, view.b_r));
    let mut a_u = view.w_ux.matvec(x);
    add_assign(&mut a_u, &view.w_uh.matvec(h_prev));
    add_assign(&mut a_u, &w_uz.matvec(z));
    let u = sigmoid(&with_bias(a_u, view.b_u));
    let whh_h = view.w_hh.matvec(h_prev);
    let mut a_c = view.w_hx.matvec(x);
    add_assign(&mut a_c, &hadamard(&r, &whh_h));
    let t_c = tanh(&with_bias(a_c, view.b_c));
    let t_d = tanh(&w_dc.matvec(d));
    let cand: Vec<f64> = t_c.iter().zip(&t_d).map(|(a, b)| a + b).collect();
    let h = combine(&u, h_prev, &cand);
    RecurrentCore {
        r,
        u,
        whh_h,
        t_c,
        t_d: Some(t_d),
        h,
    }
}

/// Next-token distribution p = softmax(W_ho h).
pub fn output_dist(view: &CellView, h: &[f64]) -> Vec<f64> {
    softmax(&with_bias(view.w_ho.matvec(h), view.b_o))
}

/// One full step: embed, refine, recur, project.
pub fn step(
    view: &CellView,
    token: usize,
    z: &[f64],
    h_prev: &[f64],
    masks: Option<&StepMasks>,
) -> StepTrace {
    let mut w = view.embed.row(token).to_vec();
    if let Some(m) = masks {
        w = hadamard(&w, &m.input);
    }
    let (d, x) = match view.kind {
        CellKind::GruBase => (None, w.clone()),
        CellKind::SrgruBase => {
            let (d, x) = refine_base(view, &w, z);
            (Some(d), x)
        }
        CellKind::SrgruContext => {
            let (d, x) = refine_context(view, &w, z, h_prev);
            (Some(d), x)
        }
    };
    let core = match view.kind {
        CellKind::SrgruContext => {
            srgru_context_step(view, &x, d.as_ref().unwrap(), z, h_prev)
        }
        _ => gru_step(view, &x, h_prev),
    };
    let h_out = match masks {
        Some(m) => hadamard(&core.h, &m.hidden),
        None => core.h.clone(),
    };
    let p = output_dist(view, &h_out);
    StepTrace {
        token,
        w,
        d,
        x,
        r: core.r,
        u: core.u,
        t_c: core.t_c,
        t_d: core.t_d,
        whh_h: core.whh_h,
        h_prev: h_prev.to_vec(),
        h: core.h,
        h_out,
        p,
        masks: masks.cloned(),
    }
}

/// Hidden state and next-token distribution for decoding (no dropout,
/// no trace retention beyond the two vectors).
pub fn decode_step(
    view: &CellView,
    token: usize,
    z: &[f64],
    h_prev: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let t = step(view, token, z, h_prev, None);
    (t.h, t.p)
}

/// Teacher-forced negative log-likelihood over `token_ids[1..]`, starting
/// from h_0 = 0. `token_ids` must be sentinel-wrapped (BOS first, EOS last).
/// `masks`, when given, must hold one entry per predicted token.
pub fn forward_sequence(
    view: &CellView,
    token_ids: &[usize],
    z: &[f64],
    masks: Option<&[StepMasks]>,
) -> Result<(f64, Vec<StepTrace>)> {
    if token_ids.len() < 2 {
        return Err(Error::Mismatch(format!(
            "sequence needs at least BOS and EOS, got {} ids",
            token_ids.len()
        )));
    }
    if let Some(&bad) = token_ids.iter().find(|&&t| t >= view.dims.vocab) {
        return Err(Error::Mismatch(format!(
            "token id {bad} out of range for vocabulary of {}",
            view.dims.vocab
        )));
    }
    let steps = token_ids.len() - 1;
    if let Some(m) = masks {
        assert_eq!(m.len(), steps, "one dropout mask per predicted token");
    }
    let mut traces = Vec::with_capacity(steps);
    let mut h_prev = vec![0.0; view.dims.hidden];
    let mut loss = 0.0;
    for t in 0..steps {
        let trace = step(view, token_ids[t], z, &h_prev, masks.map(|m| &m[t]));
        loss -= trace.p[token_ids[t + 1]].ln();
        h_prev.clone_from(&trace.h);
        traces.push(trace);
    }
    Ok((loss, traces))
}

/// Sequence NLL without retaining traces.
pub fn sequence_nll(view: &CellView, token_ids: &[usize], z: &[f64]) -> Result<f64> {
    forward_sequence(view, token_ids, z, None).map(|(loss, _)| loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::params::ModelParams;
    use crate::cells::{Dims, Param};
    use crate::math::Rng;

    fn dims() -> Dims {
        Dims {
            vocab: 5,
            embed: 3,
            hidden: 3,
            da: 4,
        }
    }

    fn model(kind: CellKind, seed: u64) -> ModelParams {
        ModelParams::init(kind, dims(), false, &mut Rng::new(seed))
    }

    #[test]
    fn zero_z_gives_half_gate() {
        let m = model(CellKind::SrgruBase, 1);
        let v = m.view();
        let w = vec![0.2, -0.4, 0.6];
        let z = vec![0.0; 4];
        let (d, x) = refine_base(&v, &w, &z);
        for (i, &g) in d.iter().enumerate() {
            assert_eq!(g, 0.5);
            assert_eq!(x[i], 0.5 * w[i]);
        }
    }

    #[test]
    fn zero_embedding_gives_zero_gated_input() {
        let m = model(CellKind::SrgruBase, 2);
        let (_, x) = refine_base(&m.view(), &[0.0; 3], &[1.0, 0.0, 1.0, 0.0]);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn context_refine_reduces_to_base_when_wdh_zero() {
        let mut m = model(CellKind::SrgruContext, 3);
        m.value_mut(Param::Wdh).fill(0.0);
        let v = m.view();
        let w = vec![0.3, 0.1, -0.2];
        let z = vec![1.0, 0.0, 1.0, 1.0];
        let h = vec![0.5, -0.5, 0.25];
        let (d_ctx, x_ctx) = refine_context(&v, &w, &z, &h);
        let (d_base, x_base) = refine_base(&v, &w, &z);
        assert_eq!(d_ctx, d_base);
        assert_eq!(x_ctx, x_base);
    }

    #[test]
    fn zero_weights_zero_state_stays_zero() {
        let mut m = model(CellKind::GruBase, 4);
        for role in [Param::Wrx, Param::Wux, Param::Whx, Param::Wrh, Param::Wuh, Param::Whh] {
            m.value_mut(role).fill(0.0);
        }
        let core = gru_step(&m.view(), &[0.4, 0.5, 0.6], &[0.0; 3]);
        assert!(core.h.iter().all(|&v| v == 0.0));
        assert!(core.u.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn context_step_reduces_to_gru_when_extras_zero() {
        let mut m = model(CellKind::SrgruContext, 5);
        for role in [Param::Wrz, Param::Wuz, Param::Wdc] {
            m.value_mut(role).fill(0.0);
        }
        let v = m.view();
        let x = vec![0.3, -0.1, 0.2];
        let d = vec![0.6, 0.4, 0.8];
        let z = vec![1.0, 1.0, 0.0, 0.0];
        let h = vec![0.1, 0.2, -0.3];
        let ctx = srgru_context_step(&v, &x, &d, &z, &h);
        let gru = gru_step(&v, &x, &h);
        assert_eq!(ctx.r, gru.r);
        assert_eq!(ctx.u, gru.u);
        // tanh(0) = 0 exactly, so the candidate term vanishes bit-exactly.
        assert_eq!(ctx.h, gru.h);
    }

    #[test]
    fn zero_output_weights_give_uniform_and_ln_v_loss() {
        let mut m = model(CellKind::GruBase, 6);
        m.value_mut(Param::Who).fill(0.0);
        let v = m.view();
        let p = output_dist(&v, &[0.3, -0.2, 0.9]);
        for &x in &p {
            assert!((x - 0.2).abs() < 1e-15);
        }
        let (loss, traces) = forward_sequence(&v, &[0, 1], &[0.0; 4], None).unwrap();
        assert!((loss - (5.0f64).ln()).abs() < 1e-12);
        assert_eq!(traces.len(), 1);
    }

    #[test]
    fn loss_nonnegative_and_token_range_checked() {
        let m = model(CellKind::SrgruContext, 7);
        let v = m.view();
        let z = vec![1.0, 0.0, 0.0, 1.0];
        let (loss, _) = forward_sequence(&v, &[0, 3, 2, 4, 1], &z, None).unwrap();
        assert!(loss >= 0.0);
        assert!(forward_sequence(&v, &[0, 9, 1], &z, None).is_err());
        assert!(forward_sequence(&v, &[0], &z, None).is_err());
    }

    #[test]
    fn hidden_state_stays_bounded() {
        for kind in CellKind::ALL {
            let mut rng = Rng::new(8);
            let mut m = ModelParams::init(kind, dims(), false, &mut rng);
            // Exaggerate weights to push activations toward saturation.
            for role in m.spec.roles().collect::<Vec<_>>() {
                m.value_mut(role).scale(40.0);
            }
            let v = m.view();
            let z = vec![1.0, 1.0, 1.0, 1.0];
            let bound = if kind == CellKind::SrgruContext { 2.0 } else { 1.0 };
            let (_, traces) = forward_sequence(&v, &[0, 2, 3, 4, 2, 1], &z, None).unwrap();
            for tr in traces {
                assert!(tr.h.iter().all(|&x| x.abs() < bound), "kind {kind:?}");
            }
        }
    }

    /// Scalar-loop reimplementation of the SrgruContext forward pass,
    /// sharing nothing with the production kernels.
    fn naive_context_loss(m: &ModelParams, ids: &[usize], z: &[f64]) -> f64 {
        let d = m.dims();
        let get = |p: Param, r: usize, c: usize| m.value(p).get(r, c);
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let mut h = vec![0.0; d.hidden];
        let mut loss = 0.0;
        for t in 0..ids.len() - 1 {
            let mut w = vec![0.0; d.embed];
            for i in 0..d.embed {
                w[i] = get(Param::Embed, ids[t], i);
            }
            let mut dv = vec![0.0; d.embed];
            for i in 0..d.embed {
                let mut a = 0.0;
                for j in 0..d.da {
                    a += get(Param::Wdz, i, j) * z[j];
                }
                for j in 0..d.hidden {
                    a += get(Param::Wdh, i, j) * h[j];
                }
                dv[i] = sig(a);
            }
            let x: Vec<f64> = (0..d.embed).map(|i| dv[i] * w[i]).collect();
            let gate = |wx: Param, wh: Param, wz: Param| -> Vec<f64> {
                (0..d.hidden)
                    .map(|i| {
                        let mut a = 0.0;
                        for j in 0..d.embed {
                            a += get(wx, i, j) * x[j];
                        }
                        for j in 0..d.hidden {
                            a += get(wh, i, j) * h[j];
                        }
                        for j in 0..d.da {
                            a += get(wz, i, j) * z[j];
                        }
                        sig(a)
                    })
                    .collect()
            };
            let r = gate(Param::Wrx, Param::Wrh, Param::Wrz);
            let u = gate(Param::Wux, Param::Wuh, Param::Wuz);
            let mut hnew = vec![0.0; d.hidden];
            for i in 0..d.hidden {
                let mut a = 0.0;
                for j in 0..d.embed {
                    a += get(Param::Whx, i, j) * x[j];
                }
                let mut wh = 0.0;
                for j in 0..d.hidden {
                    wh += get(Param::Whh, i, j) * h[j];
                }
                let mut g = 0.0;
                for j in 0..d.embed {
                    g += get(Param::Wdc, i, j) * dv[j];
                }
                let cand = (a + r[i] * wh).tanh() + g.tanh();
                hnew[i] = u[i] * h[i] + (1.0 - u[i]) * cand;
            }
            h = hnew;
            let logits: Vec<f64> = (0..d.vocab)
                .map(|i| (0..d.hidden).map(|j| get(Param::Who, i, j) * h[j]).sum())
                .collect();
            let total: f64 = logits.iter().map(|&l| l.exp()).sum();
            loss -= (logits[ids[t + 1]].exp() / total).ln();
        }
        loss
    }

    #[test]
    fn sequence_loss_matches_scalar_reimplementation() {
        for seed in 0..5 {
            let m = model(CellKind::SrgruContext, 100 + seed);
            let ids = [0, 2, 4, 3, 1];
            let z = vec![1.0, 0.0, 1.0, 0.0];
            let fast = sequence_nll(&m.view(), &ids, &z).unwrap();
            let slow = naive_context_loss(&m, &ids, &z);
            assert!(
                (fast - slow).abs() < 1e-10,
                "seed {seed}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn dropout_masks_change_output_and_are_applied_per_step() {
        let m = model(CellKind::SrgruBase, 9);
        let v = m.view();
        let ids = [0, 2, 3, 1];
        let z = vec![0.0, 1.0, 0.0, 1.0];
        let masks: Vec<StepMasks> = (0..3)
            .map(|i| StepMasks {
                input: vec![if i == 0 { 0.0 } else { 2.0 }; 3],
                hidden: vec![2.0, 0.0, 2.0],
            })
            .collect();
        let (plain, _) = forward_sequence(&v, &ids, &z, None).unwrap();
        let (masked, traces) = forward_sequence(&v, &ids, &z, Some(&masks)).unwrap();
        assert_ne!(plain, masked);
        assert!(traces[0].w.iter().all(|&x| x == 0.0));
        assert_eq!(traces[1].h_out[1], 0.0);
        // Recurrent state is not masked.
        assert_ne!(traces[1].h[1], 0.0);
    }
}
