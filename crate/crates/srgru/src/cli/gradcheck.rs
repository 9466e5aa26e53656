//! `gradcheck`: certify every cell's analytic backward pass against central
//! finite differences on synthesized tiny models, plus the tied pair's
//! joint objective.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::cells::{gradient_check_model, CellKind, Dims, ModelParams};
use crate::cli::RunConfig;
use crate::corpus::{BOS, EOS};
use crate::error::{Error, Result};
use crate::math::Rng;
use crate::training::{tied_gradient_check, TiedPair};

pub const CHECK_FORMAT: &str = "srgru-gradcheck v1";

/// Wide initialization so every gradient stays above finite-difference
/// round-off; narrow inits leave late-gate gradients at noise level.
const ENERGIZED_RANGE: f64 = 0.6;

const CHECK_DIMS: Dims = Dims { vocab: 7, embed: 4, hidden: 4, da: 5 };

pub fn run(cfg: RunConfig) -> Result<()> {
    let outcome = check_all(&cfg)?;
    print!("{}", outcome.report);
    match outcome.failures.first() {
        None => Ok(()),
        Some((cell, matrix, err)) => Err(Error::Check(format!(
            "{} gradients: {matrix} relative error {err:.3e} exceeds tolerance {}",
            cell, cfg.tolerance
        ))),
    }
}

pub(crate) struct CheckOutcome {
    pub report: String,
    /// (cell label, matrix name, max relative error) above tolerance.
    pub failures: Vec<(String, String, f64)>,
}

pub(crate) fn check_all(cfg: &RunConfig) -> Result<CheckOutcome> {
    if cfg.instances == 0 {
        return Err(Error::Config("gradcheck needs at least one instance".to_string()));
    }
    if !(cfg.eps > 0.0 && cfg.eps.is_finite()) {
        return Err(Error::Config("eps must be positive and finite".to_string()));
    }
    let started = Instant::now();
    let mut rng = Rng::new(cfg.check_seed);
    let mut report = format!(
        "{CHECK_FORMAT}\ndims: vocab {}, embed {}, hidden {}, da {}; eps {}; tolerance {}; \
         instances {}; seed {}\n",
        CHECK_DIMS.vocab,
        CHECK_DIMS.embed,
        CHECK_DIMS.hidden,
        CHECK_DIMS.da,
        cfg.eps,
        cfg.tolerance,
        cfg.instances,
        cfg.check_seed
    );
    let mut failures = Vec::new();

    for kind in CellKind::ALL {
        let mut worst: BTreeMap<String, f64> = BTreeMap::new();
        for _ in 0..cfg.instances {
            let mut model =
                ModelParams::init_with_range(kind, CHECK_DIMS, cfg.biases, &mut rng, ENERGIZED_RANGE);
            let (ids, z) = random_instance(&mut rng);
            for (key, err) in gradient_check_model(&mut model, &ids, &z, None, cfg.eps)? {
                let slot = worst.entry(key).or_insert(0.0);
                *slot = slot.max(err);
            }
        }
        summarize(kind.label(), &worst, cfg.tolerance, &mut report, &mut failures);
    }

    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    for _ in 0..cfg.instances {
        let mut pair = TiedPair::init(CHECK_DIMS, cfg.biases, &mut rng);
        energize(&mut pair, &mut rng);
        let (ids, z) = random_instance(&mut rng);
        for (key, err) in tied_gradient_check(&mut pair, &ids, &z, cfg.eps)? {
            let slot = worst.entry(key).or_insert(0.0);
            *slot = slot.max(err);
        }
    }
    summarize("tb-srgru", &worst, cfg.tolerance, &mut report, &mut failures);

    report.push_str(&format!(
        "result: {} ({:.1}s)\n",
        if failures.is_empty() { "pass" } else { "fail" },
        started.elapsed().as_secs_f64()
    ));
    Ok(CheckOutcome { report, failures })
}

fn random_instance(rng: &mut Rng) -> (Vec<usize>, Vec<f64>) {
    let inner = 1 + rng.below(4);
    let mut ids = vec![BOS];
    ids.extend((0..inner).map(|_| rng.below(CHECK_DIMS.vocab)));
    ids.push(EOS);
    let mut z = vec![0.0; CHECK_DIMS.da];
    z[rng.below(CHECK_DIMS.da)] = 1.0;
    for v in z.iter_mut() {
        if rng.chance(0.5) {
            *v = 1.0;
        }
    }
    (ids, z)
}

fn energize(pair: &mut TiedPair, rng: &mut Rng) {
    let names: Vec<String> = pair.store.names().map(str::to_string).collect();
    for name in names {
        let m = pair.store.value_mut(&name);
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                m.set(r, c, rng.uniform(-ENERGIZED_RANGE, ENERGIZED_RANGE));
            }
        }
    }
}

fn summarize(
    label: &str,
    worst: &BTreeMap<String, f64>,
    tolerance: f64,
    report: &mut String,
    failures: &mut Vec<(String, String, f64)>,
) {
    let (top_key, top_err) = worst
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k.clone(), *v))
        .expect("every kind checks at least one matrix");
    let mut bad: Vec<(&String, &f64)> = worst.iter().filter(|(_, &e)| e > tolerance).collect();
    bad.sort_by(|a, b| b.1.total_cmp(a.1));
    let verdict = if bad.is_empty() { "pass" } else { "FAIL" };
    report.push_str(&format!(
        "{label:<14} max rel err {top_err:.3e} ({top_key})  {verdict}\n"
    ));
    for (key, err) in bad {
        report.push_str(&format!("  FAIL {key}: max rel err {err:.3e}\n"));
        failures.push((label.to_string(), key.clone(), *err));
    }
}
