use srgru::cells::CellKind;
use srgru::corpus::load_corpus;
use srgru::decoding::{generate, greedy_decode, GenOptions};
use srgru::metrics::mean_err_percent;
use srgru::training::{mean_nll, prepare, train, TrainConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.2);
    let decay: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let stop: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.05);
    let beam: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(10);
    let seed: u64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(1);
    let need: usize = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(20);
    let dropout: f64 = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(0.0);
    let verbose = args.get(8).is_some();
    let corpus = load_corpus(std::path::Path::new("../../data/toy_restaurant.json"), 1).unwrap();
    let mut all = corpus.train.clone();
    all.extend(corpus.valid.clone());
    all.extend(corpus.test.clone());
    let prepared = prepare(&all, &all).unwrap();

    let config = TrainConfig {
        hidden_size: 80,
        embed_size: 80,
        learn_rate: lr,
        lr_decay: decay,
        dropout_rate: dropout,
        l2_coeff: 0.0,
        l2_every: 10,
        max_epochs: 2000,
        patience: 2000,
        seeds: 1,
        grad_clip: 5.0,
        max_decode_len: 40,
        biases: false,
        stop_train_nll: Some(stop),
    };
    let t0 = std::time::Instant::now();
    let (model, history) = train(CellKind::SrgruContext, &prepared, &config, seed, None).unwrap();
    let view = model.view();
    let nll = mean_nll(&view, &prepared.train).unwrap();
    println!(
        "epochs {} train_nll {:.4} elapsed {:.1}s",
        history.rows.len(),
        nll,
        t0.elapsed().as_secs_f64()
    );

    let mut exact = 0;
    for (inst, g) in prepared.train.iter().zip(&all) {
        let ids = greedy_decode(&view, &inst.z, 40);
        if ids == inst.ids {
            exact += 1;
        } else if verbose {
            println!("   greedy miss: {}", g.da_text);
        }
    }
    println!(
        "greedy reconstruction: {exact}/{} ({:.0}%)",
        prepared.train.len(),
        100.0 * exact as f64 / prepared.train.len() as f64
    );

    let opts = GenOptions {
        beam_width: beam,
        need,
        top_k: need,
        ..GenOptions::default()
    };
    let mut rates = Vec::new();
    let mut starved = 0;
    for g in &all {
        let out = generate(&view, None, &prepared.vocab, &prepared.schema, &g.da, &opts).unwrap();
        if out.realizations.len() < 5 {
            starved += 1;
        }
        let zero_in_pool = out.realizations.iter().filter(|r| r.err == 0.0).count();
        let kept: Vec<&srgru::decoding::Realization> = out.realizations.iter().take(5).collect();
        let bad = kept.iter().filter(|r| r.err > 0.0).count();
        if bad > 0 && verbose {
            println!(
                "-- {}  pool {} zeroERR {} badkept {}",
                g.da_text,
                out.realizations.len(),
                zero_in_pool,
                bad
            );
            for r in &kept {
                println!("   err {:.3} f {:.2} | {}", r.err, r.f_fw, r.text);
            }
        }
        for r in kept {
            rates.push(r.err);
        }
    }
    println!(
        "pipeline corpus ERR over top-5: {:.4}%  (starved pools: {starved})",
        mean_err_percent(&rates).unwrap()
    );
    let nonzero = rates.iter().filter(|&&e| e > 0.0).count();
    println!("nonzero-ERR kept realizations: {nonzero}/{}", rates.len());
}
