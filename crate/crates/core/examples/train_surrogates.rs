//! Train the graph-convolutional surrogate on the ISM skeleton and the MLP
//! baseline on the same samples, then rank the case-study events.
//!
//!     cargo run --release --example train_surrogates

use std::collections::BTreeMap;

use fvkit::datagen::{generate, PerturbSpec};
use fvkit::ism::{load_ssim, reachability, skeleton};
use fvkit::neural::{train, ModelKind, TrainConfig};
use fvkit::{fv_importance, parse_fault_tree, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = parse_fault_tree(include_str!("../fixtures/si.ft"))?;
    let edges = skeleton(&reachability(&load_ssim(include_str!("../fixtures/si_ssim.csv"))?))?.edges;
    let data = generate(&tree, &PerturbSpec::new(BTreeMap::new(), 316, 42), Method::Mcub)?.with_edges(edges);

    let cfg = TrainConfig::with_seed(42);
    let q = tree.probabilities();
    let oracle = fv_importance(&tree, &q, Method::Mcub)?;
    for kind in [ModelKind::Gcn, ModelKind::Mlp] {
        let t0 = std::time::Instant::now();
        let tm = train(kind, &data, &cfg)?;
        let m = &tm.metrics;
        println!(
            "{kind}: held-out MSE {:.3e}  RMSE {:.3e}  MAE {:.3e}  R² {:.5}  ({} train / {} test, {:.1?})",
            m.mse,
            m.rmse,
            m.mae,
            m.r2,
            tm.split.train.len(),
            tm.split.test.len(),
            t0.elapsed()
        );
        let p = tm.model.predict(&q)?;
        for (i, e) in p.ranking.iter().enumerate() {
            println!(
                "  {}. {e:<16} predicted {:.4e}  oracle {:.4e}",
                i + 1,
                p.fv[e],
                oracle.get(e).unwrap().fv_cutset
            );
        }
    }
    Ok(())
}
