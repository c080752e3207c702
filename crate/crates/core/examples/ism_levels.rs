//! Build the ISM hierarchy of the safety injection events from the expert
//! relation matrix: reachability closure, level partitions in both
//! orientations, and the transitive skeleton as DOT.
//!
//!     cargo run --example ism_levels

use fvkit::ism::{export_dot, level_partition, load_ssim, reachability, skeleton, Orientation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ssim = load_ssim(include_str!("../fixtures/si_ssim.csv"))?;
    let m = reachability(&ssim);

    println!("{:<16} | {:<48} | {:<48} | intersection", "element", "reachability", "antecedent");
    for r in m.table() {
        println!(
            "{:<16} | {:<48} | {:<48} | {}",
            r.element,
            r.reachability.join(" "),
            r.antecedent.join(" "),
            r.intersection.join(" ")
        );
    }

    for o in [Orientation::DriverFirst, Orientation::TopLevelFirst] {
        println!("\n{o:?}:");
        for (i, level) in level_partition(&m, o)?.levels.iter().enumerate() {
            println!("  level {}: {}", i + 1, level.join(", "));
        }
    }

    let dag = skeleton(&m)?;
    println!("\nclusters of mutually reachable events: {:?}", dag.components);
    println!("\n{}", export_dot(&dag));
    Ok(())
}
