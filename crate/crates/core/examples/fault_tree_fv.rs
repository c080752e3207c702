//! Parse the safety injection fault tree, list its minimal cut sets and
//! compare FV importance under each quantification method with the
//! enumeration oracle.
//!
//!     cargo run --example fault_tree_fv

use fvkit::quant::Method;
use fvkit::{brute_force_fv, fv_importance, minimal_cut_sets, parse_fault_tree, top_probability};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = parse_fault_tree(include_str!("../fixtures/si.ft"))?;
    println!("{} events, {} gates, top {}", tree.events().len(), tree.gates().len(), tree.top_name());

    let cuts = minimal_cut_sets(&tree, None)?;
    println!("\nminimal cut sets:");
    for (c, p) in cuts.sets.iter().zip(&cuts.probabilities) {
        println!("  {:<28} {p:.3e}", c.events.join(" "));
    }

    let q = tree.probabilities();
    for m in [Method::RareEvent, Method::Mcub, Method::Exact] {
        println!("\nQ_top ({m}) = {:.6e}", top_probability(&cuts, &q, m)?);
    }

    let oracle = brute_force_fv(&tree, &q)?;
    println!("\n{:<16} {:>12} {:>12} {:>12} {:>12}", "event", "rare", "mcub", "exact", "enumerated");
    let by = |m| fv_importance(&tree, &q, m);
    let (rare, mcub, exact) = (by(Method::RareEvent)?, by(Method::Mcub)?, by(Method::Exact)?);
    for e in mcub.ranked() {
        let n = &e.event;
        println!(
            "{n:<16} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e}",
            rare.get(n).unwrap().fv_cutset,
            e.fv_cutset,
            exact.get(n).unwrap().fv_cutset,
            oracle.get(n).unwrap().fv_cutset,
        );
    }

    // The same structure with reliability parameters instead of point values.
    let params = parse_fault_tree(include_str!("../fixtures/si_params.ft"))?;
    println!("\nnominal-parameter tree:");
    for e in fv_importance(&params, &params.probabilities(), Method::Mcub)?.ranked() {
        println!("  {:<16} q={:.4e} fv={:.4e}", e.event, e.probability, e.fv_cutset);
    }
    Ok(())
}
