//! Learn a dependency graph from the sampled probabilities with BDeu hill
//! climbing and compare a GCN trained on it with one trained on the ISM
//! skeleton.
//!
//!     cargo run --release --example structure_learning

use std::collections::BTreeMap;

use fvkit::datagen::{generate, PerturbSpec};
use fvkit::ism::{load_ssim, reachability, skeleton};
use fvkit::neural::{train_with_edges, ModelKind, TrainConfig};
use fvkit::structlearn::{bdeu_score, discretize, hill_climb, DagCandidate, HillClimbConfig};
use fvkit::{parse_fault_tree, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = parse_fault_tree(include_str!("../fixtures/si.ft"))?;
    let ism_edges = skeleton(&reachability(&load_ssim(include_str!("../fixtures/si_ssim.csv"))?))?.edges;
    let data = generate(&tree, &PerturbSpec::new(BTreeMap::new(), 316, 42), Method::Mcub)?;

    let binary = discretize(&data)?;
    let cfg = HillClimbConfig {
        restarts: 4,
        seed: 42,
        ..HillClimbConfig::default()
    };
    let hc = hill_climb(&binary, &cfg);
    println!("hill climb: score {:.4} after {} moves, edges {:?}", hc.score, hc.moves.len(), hc.dag.edges());
    let ism_dag = DagCandidate::from_edges(binary.names().to_vec(), &ism_edges)?;
    println!("BDeu of the ISM skeleton on the same data: {:.4}", bdeu_score(&ism_dag, &binary, cfg.ess)?);

    let tc = TrainConfig::with_seed(42);
    for (label, edges) in [("ISM skeleton", ism_edges), ("hill climb", hc.dag.edges())] {
        let tm = train_with_edges(ModelKind::Gcn, &data, &edges, &tc)?;
        println!("GCN on {label:<12} ({} edges): held-out MSE {:.4e}, R² {:.6}", edges.len(), tm.metrics.mse, tm.metrics.r2);
    }
    Ok(())
}
