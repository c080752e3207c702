//! Generate FV-labelled training samples by perturbing the tree's
//! parameters, attach the ISM skeleton as the graph, and write JSONL.
//!
//!     cargo run --example generate_dataset [out.jsonl]

use std::collections::BTreeMap;

use fvkit::datagen::{generate, lognormal_sample, sample_rng, LognormalSpec, PerturbLaw, PerturbSpec};
use fvkit::ism::{load_ssim, reachability, skeleton};
use fvkit::{parse_fault_tree, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = parse_fault_tree(include_str!("../fixtures/si.ft"))?;
    let edges = skeleton(&reachability(&load_ssim(include_str!("../fixtures/si_ssim.csv"))?))?.edges;

    let spec = PerturbSpec::new(BTreeMap::new(), 316, 42);
    let data = generate(&tree, &spec, Method::Mcub)?.with_edges(edges);
    println!("{} samples over {:?}", data.len(), data.meta.events);
    for s in data.samples.iter().take(3) {
        println!("sample {}:", s.sample_id);
        for e in &data.meta.events {
            println!("  {e:<16} q={:<14.6e} fv={:.6e}", s.q[e], s.fv[e]);
        }
    }

    // Lognormal factors (median 1, error factor 3) instead of log-uniform.
    let mut ln = spec.clone();
    ln.law = PerturbLaw::Lognormal { error_factor: 3.0 };
    ln.n_samples = 5;
    let d2 = generate(&tree, &ln, Method::Mcub)?;
    println!("\nlognormal-perturbed SI-P2-RF q: {:?}", d2.samples.iter().map(|s| s.q["SI-P2-RF"]).collect::<Vec<_>>());

    let spec1 = LognormalSpec::new(1e-3, 3.0)?;
    let mut rng = sample_rng(7, 0);
    let draws: Vec<f64> = (0..5).map(|_| lognormal_sample(&spec1, &mut rng)).collect();
    println!("lognormal(median 1e-3, EF 3) draws: {:?}", draws.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>());

    if let Some(path) = std::env::args().nth(1) {
        data.write_jsonl(std::fs::File::create(&path)?)?;
        println!("\nwrote {path}");
    }
    Ok(())
}
