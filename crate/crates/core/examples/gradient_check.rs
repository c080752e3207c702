//! Compare backpropagated gradients of both models with central finite
//! differences on one safety injection sample.
//!
//!     cargo run --release --example gradient_check

use std::collections::BTreeMap;

use fvkit::datagen::{generate, sample_rng, PerturbSpec};
use fvkit::ism::{load_ssim, reachability, skeleton};
use fvkit::neural::{gradient_check_report, FeatureScaling, GcnModel, MlpModel, Model};
use fvkit::{parse_fault_tree, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = parse_fault_tree(include_str!("../fixtures/si.ft"))?;
    let edges = skeleton(&reachability(&load_ssim(include_str!("../fixtures/si_ssim.csv"))?))?.edges;
    let data = generate(&tree, &PerturbSpec::new(BTreeMap::new(), 20, 42), Method::Mcub)?;
    let nodes = data.meta.events.clone();
    let scaling = FeatureScaling::fit_log10(data.samples.iter().flat_map(|s| s.q.values()));
    let s = &data.samples[0];

    for seed in 0..5 {
        let mut rng = sample_rng(seed, 0);
        let mut gcn = Model::Gcn(GcnModel::new(nodes.clone(), edges.clone(), &[1, 32, 32, 1], true, true, &mut rng)?);
        let mut mlp = Model::Mlp(MlpModel::new(nodes.clone(), edges.clone(), &[64, 64, 64], &mut rng)?);
        gcn.set_scaling(scaling);
        mlp.set_scaling(scaling);
        for (name, m) in [("gcn", &gcn), ("mlp", &mlp)] {
            let r = gradient_check_report(m, &s.q, &s.fv)?;
            println!(
                "seed {seed} {name}: max rel. error {:.2e} over {} weights ({} skipped at ReLU kinks)",
                r.max_rel_error, r.compared, r.skipped_kinks
            );
        }
    }
    Ok(())
}
