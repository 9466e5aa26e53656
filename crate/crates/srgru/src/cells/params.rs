//! Parameter bundles: role-to-storage mapping, initialization, and the
//! bit-exact model file format.
//!
//! A `CellSpec` names where each parameter role lives inside a `ParamStore`.
//! Standalone models use the plain role names; tied bidirectional pairs map
//! two specs onto one store with `fw.`/`bw.` prefixes and shared entries,
//! which is what makes weight tying literal shared storage rather than a
//! copy discipline.

use std::path::Path;

use crate::error::{Error, Result};
use crate::math::{Matrix, ParamStore, Rng};

use super::{CellKind, Dims, Param};

pub const MODEL_FORMAT: &str = "srgru-model v1";
/// Weight initialization range, uniform(-INIT_RANGE, INIT_RANGE).
pub const INIT_RANGE: f64 = 0.1;

/// A cell's shape plus the storage key of every parameter role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSpec {
    pub kind: CellKind,
    pub dims: Dims,
    pub biases: bool,
    names: Vec<(Param, String)>,
}

impl CellSpec {
    /// Spec with unprefixed role names, for standalone models.
    pub fn standard(kind: CellKind, dims: Dims, biases: bool) -> Self {
        let names = Param::required_for(kind, biases)
            .into_iter()
            .map(|p| (p, p.name().to_string()))
            .collect();
        CellSpec {
            kind,
            dims,
            biases,
            names,
        }
    }

    /// Spec whose roles live under `prefix.` except for `shared` roles,
    /// which map to `shared.<role>` keys common to several specs.
    pub fn prefixed(
        kind: CellKind,
        dims: Dims,
        biases: bool,
        prefix: &str,
        shared: &[Param],
    ) -> Self {
        let names = Param::required_for(kind, biases)
            .into_iter()
            .map(|p| {
                let key = if shared.contains(&p) {
                    format!("shared.{}", p.name())
                } else {
                    format!("{prefix}.{}", p.name())
                };
                (p, key)
            })
            .collect();
        CellSpec {
            kind,
            dims,
            biases,
            names,
        }
    }

    pub fn roles(&self) -> impl Iterator<Item = Param> + '_ {
        self.names.iter().map(|(p, _)| *p)
    }

    pub fn key(&self, role: Param) -> &str {
        &self
            .names
            .iter()
            .find(|(p, _)| *p == role)
            .unwrap_or_else(|| panic!("role {} not in this spec", role.name()))
            .1
    }

    fn key_opt(&self, role: Param) -> Option<&str> {
        self.names
            .iter()
            .find(|(p, _)| *p == role)
            .map(|(_, k)| k.as_str())
    }

    /// Insert every role's matrix into `store` with uniform(-0.1, 0.1)
    /// entries. Keys already present (shared entries inserted by a sibling
    /// spec) are left untouched.
    pub fn insert_params(&self, store: &mut ParamStore, rng: &mut Rng) {
        self.insert_params_with_range(store, rng, INIT_RANGE);
    }

    /// As `insert_params` with an explicit uniform range. Gradient-check
    /// instances use a wider range than training so that no gradient matrix
    /// is vanishingly small relative to finite-difference round-off.
    pub fn insert_params_with_range(&self, store: &mut ParamStore, rng: &mut Rng, range: f64) {
        for (role, key) in &self.names {
            if store.contains(key) {
                continue;
            }
            let (r, c) = role.shape(self.dims);
            let m = Matrix::from_fn(r, c, |_, _| rng.uniform(-range, range));
            store.insert(key, m);
        }
    }

    /// Read-only view resolving every role for the step kernels.
    pub fn view<'a>(&self, store: &'a ParamStore) -> CellView<'a> {
        let need = |role: Param| store.value(self.key(role));
        let opt = |role: Param| self.key_opt(role).map(|k| store.value(k));
        CellView {
            kind: self.kind,
            dims: self.dims,
            embed: need(Param::Embed),
            w_dz: opt(Param::Wdz),
            w_dh: opt(Param::Wdh),
            w_rx: need(Param::Wrx),
            w_ux: need(Param::Wux),
            w_hx: need(Param::Whx),
            w_rh: need(Param::Wrh),
            w_uh: need(Param::Wuh),
            w_hh: need(Param::Whh),
            w_rz: opt(Param::Wrz),
            w_uz: opt(Param::Wuz),
            w_dc: opt(Param::Wdc),
            w_ho: need(Param::Who),
            b_d: opt(Param::Bd),
            b_r: opt(Param::Br),
            b_u: opt(Param::Bu),
            b_c: opt(Param::Bc),
            b_o: opt(Param::Bo),
        }
    }
}

/// Borrowed matrices for one cell, resolved once per sequence.
#[derive(Clone, Copy)]
pub struct CellView<'a> {
    pub kind: CellKind,
    pub dims: Dims,
    pub embed: &'a Matrix,
    pub w_dz: Option<&'a Matrix>,
    pub w_dh: Option<&'a Matrix>,
    pub w_rx: &'a Matrix,
    pub w_ux: &'a Matrix,
    pub w_hx: &'a Matrix,
    pub w_rh: &'a Matrix,
    pub w_uh: &'a Matrix,
    pub w_hh: &'a Matrix,
    pub w_rz: Option<&'a Matrix>,
    pub w_uz: Option<&'a Matrix>,
    pub w_dc: Option<&'a Matrix>,
    pub w_ho: &'a Matrix,
    pub b_d: Option<&'a Matrix>,
    pub b_r: Option<&'a Matrix>,
    pub b_u: Option<&'a Matrix>,
    pub b_c: Option<&'a Matrix>,
    pub b_o: Option<&'a Matrix>,
}

/// A standalone model: spec plus its own parameter store, tagged with the
/// hashes of the vocab and schema it was trained against.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub spec: CellSpec,
    pub store: ParamStore,
    pub vocab_hash: String,
    pub schema_hash: String,
}

impl ModelParams {
    pub fn init(kind: CellKind, dims: Dims, biases: bool, rng: &mut Rng) -> Self {
        Self::init_with_range(kind, dims, biases, rng, INIT_RANGE)
    }

    pub fn init_with_range(
        kind: CellKind,
        dims: Dims,
        biases: bool,
        rng: &mut Rng,
        range: f64,
    ) -> Self {
        let spec = CellSpec::standard(kind, dims, biases);
        let mut store = ParamStore::new();
        spec.insert_params_with_range(&mut store, rng, range);
        ModelParams {
            spec,
            store,
            vocab_hash: String::new(),
            schema_hash: String::new(),
        }
    }

    pub fn kind(&self) -> CellKind {
        self.spec.kind
    }

    pub fn dims(&self) -> Dims {
        self.spec.dims
    }

    pub fn view(&self) -> CellView<'_> {
        self.spec.view(&self.store)
    }

    pub fn value(&self, role: Param) -> &Matrix {
        self.store.value(self.spec.key(role))
    }

    pub fn value_mut(&mut self, role: Param) -> &mut Matrix {
        self.store.value_mut(self.spec.key(role))
    }

    fn hash_or_dash(h: &str) -> &str {
        if h.is_empty() {
            "-"
        } else {
            h
        }
    }

    /// Serialize to the versioned plain-text container. Matrix entries are
    /// written as 16-hex-digit IEEE-754 bit patterns so load(save(m)) == m
    /// bit-exactly.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let d = self.spec.dims;
        let mut s = String::new();
        writeln!(s, "{MODEL_FORMAT}").unwrap();
        writeln!(s, "kind {}", self.spec.kind.label()).unwrap();
        writeln!(s, "biases {}", self.spec.biases as u8).unwrap();
        writeln!(
            s,
            "dims vocab {} embed {} hidden {} da {}",
            d.vocab, d.embed, d.hidden, d.da
        )
        .unwrap();
        writeln!(s, "vocab_hash {}", Self::hash_or_dash(&self.vocab_hash)).unwrap();
        writeln!(s, "schema_hash {}", Self::hash_or_dash(&self.schema_hash)).unwrap();
        for role in self.spec.roles() {
            let m = self.value(role);
            writeln!(s, "matrix {} {} {}", role.name(), m.rows(), m.cols()).unwrap();
            for r in 0..m.rows() {
                let row: Vec<String> = m
                    .row(r)
                    .iter()
                    .map(|x| format!("{:016x}", x.to_bits()))
                    .collect();
                writeln!(s, "{}", row.join(" ")).unwrap();
            }
        }
        writeln!(s, "end").unwrap();
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let bad = |message: String| Error::BadArtifact {
            path: origin.display().to_string(),
            message,
        };
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| bad(format!("truncated before {what}")))
        };
        match next("header")? {
            l if l == MODEL_FORMAT => {}
            other => return Err(bad(format!("bad model header {other:?}"))),
        }
        let kind_line = next("kind")?;
        let kind = CellKind::from_label(
            kind_line
                .strip_prefix("kind ")
                .ok_or_else(|| bad("missing kind line".into()))?,
        )
        .map_err(|e| bad(e.to_string()))?;
        let biases = match next("biases")? {
            "biases 0" => false,
            "biases 1" => true,
            other => return Err(bad(format!("bad biases line {other:?}"))),
        };
        let dims_line = next("dims")?;
        let nums: Vec<usize> = dims_line
            .strip_prefix("dims vocab ")
            .map(|rest| {
                rest.split(|c: char| !c.is_ascii_digit())
                    .filter(|s| !s.is_empty())
                    .filter_map(|s| s.parse().ok())
                    .collect()
            })
            .unwrap_or_default();
        if nums.len() != 4 {
            return Err(bad(format!("bad dims line {dims_line:?}")));
        }
        let dims = Dims {
            vocab: nums[0],
            embed: nums[1],
            hidden: nums[2],
            da: nums[3],
        };
        let read_hash = |line: &str, tag: &str| -> Result<String> {
            let h = line
                .strip_prefix(tag)
                .ok_or_else(|| bad(format!("missing {tag}line")))?;
            Ok(if h == "-" { String::new() } else { h.to_string() })
        };
        let vocab_hash = read_hash(next("vocab_hash")?, "vocab_hash ")?;
        let schema_hash = read_hash(next("schema_hash")?, "schema_hash ")?;

        let spec = CellSpec::standard(kind, dims, biases);
        let mut store = ParamStore::new();
        for role in spec.roles() {
            let head = next("matrix header")?;
            let expect = role.shape(dims);
            let want = format!("matrix {} {} {}", role.name(), expect.0, expect.1);
            if head != want {
                return Err(bad(format!("expected {want:?}, found {head:?}")));
            }
            let mut m = Matrix::zeros(expect.0, expect.1);
            for r in 0..expect.0 {
                let line = next("matrix row")?;
                let cells: Vec<&str> = line.split_whitespace().collect();
                if cells.len() != expect.1 {
                    return Err(bad(format!(
                        "matrix {}: row {r} has {} entries, expected {}",
                        role.name(),
                        cells.len(),
                        expect.1
                    )));
                }
                for (c, hex) in cells.iter().enumerate() {
                    let bits = u64::from_str_radix(hex, 16)
                        .map_err(|_| bad(format!("matrix {}: bad hex {hex:?}", role.name())))?;
                    m.set(r, c, f64::from_bits(bits));
                }
            }
            if !m.is_finite() {
                return Err(bad(format!("matrix {} has non-finite entries", role.name())));
            }
            store.insert(spec.key(role), m);
        }
        match next("end")? {
            "end" => {}
            other => return Err(bad(format!("expected end marker, found {other:?}"))),
        }
        Ok(ModelParams {
            spec,
            store,
            vocab_hash,
            schema_hash,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, path)
    }
}
