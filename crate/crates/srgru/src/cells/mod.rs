//! The three recurrent cells with exact hand-derived backpropagation
//! through time.
//!
//! All variants share the GRU skeleton. SrgruBase gates the input embedding
//! with a refinement vector d = sigmoid(W_dz z) computed once per step from
//! the dialogue act; SrgruContext additionally feeds the previous hidden
//! state into d, feeds z into the reset/update gates, and adds tanh(W_dc d)
//! to the candidate state.

pub mod backward;
pub mod forward;
pub mod params;

pub use backward::{backward_sequence, gradient_check_model, CellGrads};
pub use forward::{
    decode_step, forward_sequence, output_dist, sequence_nll, step, StepMasks, StepTrace,
};
pub use params::{CellSpec, CellView, ModelParams};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    GruBase,
    SrgruBase,
    SrgruContext,
}

impl CellKind {
    pub fn label(self) -> &'static str {
        match self {
            CellKind::GruBase => "gru-base",
            CellKind::SrgruBase => "srgru-base",
            CellKind::SrgruContext => "srgru-context",
        }
    }

    pub fn from_label(label: &str) -> Result<Self> {
        Ok(match label {
            "gru-base" => CellKind::GruBase,
            "srgru-base" => CellKind::SrgruBase,
            "srgru-context" => CellKind::SrgruContext,
            _ => {
                return Err(Error::Config(format!(
                    "unknown cell kind {label:?} (expected gru-base, srgru-base, srgru-context)"
                )))
            }
        })
    }

    pub const ALL: [CellKind; 3] = [CellKind::GruBase, CellKind::SrgruBase, CellKind::SrgruContext];
}

/// Model dimensions: vocabulary size, embedding width d_e, hidden width d_h,
/// and the conditioning-vector length |z|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
    pub da: usize,
}

/// Parameter roles. Matrices B* are per-preactivation biases stored as
/// single-column matrices; they exist only when the optional bias toggle is
/// on (the source equations are bias-free).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Embed,
    Wdz,
    Wdh,
    Wrx,
    Wux,
    Whx,
    Wrh,
    Wuh,
    Whh,
    Wrz,
    Wuz,
    Wdc,
    Who,
    Bd,
    Br,
    Bu,
    Bc,
    Bo,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Embed => "embed",
            Param::Wdz => "W_dz",
            Param::Wdh => "W_dh",
            Param::Wrx => "W_rx",
            Param::Wux => "W_ux",
            Param::Whx => "W_hx",
            Param::Wrh => "W_rh",
            Param::Wuh => "W_uh",
            Param::Whh => "W_hh",
            Param::Wrz => "W_rz",
            Param::Wuz => "W_uz",
            Param::Wdc => "W_dc",
            Param::Who => "W_ho",
            Param::Bd => "b_d",
            Param::Br => "b_r",
            Param::Bu => "b_u",
            Param::Bc => "b_c",
            Param::Bo => "b_o",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::all().into_iter().find(|p| p.name() == name)
    }

    fn all() -> [Param; 18] {
        [
            Param::Embed,
            Param::Wdz,
            Param::Wdh,
            Param::Wrx,
            Param::Wux,
            Param::Whx,
            Param::Wrh,
            Param::Wuh,
            Param::Whh,
            Param::Wrz,
            Param::Wuz,
            Param::Wdc,
            Param::Who,
            Param::Bd,
            Param::Br,
            Param::Bu,
            Param::Bc,
            Param::Bo,
        ]
    }

    pub fn shape(self, d: Dims) -> (usize, usize) {
        match self {
            Param::Embed => (d.vocab, d.embed),
            Param::Wdz => (d.embed, d.da),
            Param::Wdh => (d.embed, d.hidden),
            Param::Wrx | Param::Wux | Param::Whx | Param::Wdc => (d.hidden, d.embed),
            Param::Wrh | Param::Wuh | Param::Whh => (d.hidden, d.hidden),
            Param::Wrz | Param::Wuz => (d.hidden, d.da),
            Param::Who => (d.vocab, d.hidden),
            Param::Bd => (d.embed, 1),
            Param::Br | Param::Bu | Param::Bc => (d.hidden, 1),
            Param::Bo => (d.vocab, 1),
        }
    }

    /// Roles a model of `kind` carries, in canonical order.
    pub fn required_for(kind: CellKind, biases: bool) -> Vec<Param> {
        let mut roles = vec![Param::Embed];
        if kind != CellKind::GruBase {
            roles.push(Param::Wdz);
        }
        if kind == CellKind::SrgruContext {
            roles.push(Param::Wdh);
        }
        roles.extend([Param::Wrx, Param::Wux, Param::Whx, Param::Wrh, Param::Wuh, Param::Whh]);
        if kind == CellKind::SrgruContext {
            roles.extend([Param::Wrz, Param::Wuz, Param::Wdc]);
        }
        roles.push(Param::Who);
        if biases {
            if kind != CellKind::GruBase {
                roles.push(Param::Bd);
            }
            roles.extend([Param::Br, Param::Bu, Param::Bc, Param::Bo]);
        }
        roles
    }
}
