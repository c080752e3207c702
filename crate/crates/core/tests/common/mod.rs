//! Helpers shared by the integration tests: a seeded generator of random
//! coherent fault trees and oracles written independently of the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use fvkit::{parse_fault_tree, FaultTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SI_TREE: &str = include_str!("../../fixtures/si.ft");
pub const SI_PARAMS_TREE: &str = include_str!("../../fixtures/si_params.ft");
pub const SI_SSIM: &str = include_str!("../../fixtures/si_ssim.csv");

/// Event order of the SSIM fixture, N1 to N6.
pub const SI_LABELS: [&str; 6] = ["SI-P2-DF", "SI-P1-RF", "SI-P2-RF", "CCF-SI-RF2-ALL", "BUS-A-UN", "BUS-B-UN"];

pub fn si_tree() -> FaultTree {
    parse_fault_tree(SI_TREE).unwrap()
}

/// Text of a random AND/OR tree with `2..=max_events` events and
/// `1..=max_gates` gates. Gate `G0` is the top; each later gate hangs under
/// an earlier one, so the gate graph is a connected DAG. Probabilities are
/// drawn uniformly from `(0, q_max]`.
pub fn random_tree_text(seed: u64, max_events: usize, max_gates: usize, q_max: f64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_events = rng.random_range(2..=max_events.max(2));
    let n_gates = rng.random_range(1..=max_gates.max(1));
    let mut children: Vec<Vec<String>> = vec![Vec::new(); n_gates];
    for g in 1..n_gates {
        let parent = rng.random_range(0..g);
        children[parent].push(format!("G{g}"));
    }
    // Every event appears at least once so none is unreachable.
    for e in 0..n_events {
        let g = rng.random_range(0..n_gates);
        children[g].push(format!("E{e}"));
    }
    for (g, ch) in children.iter_mut().enumerate() {
        if ch.is_empty() {
            ch.push(format!("E{}", rng.random_range(0..n_events)));
        }
        let extra = rng.random_range(0..=2);
        for _ in 0..extra {
            let pick = if g + 1 < n_gates && rng.random_bool(0.3) {
                format!("G{}", rng.random_range(g + 1..n_gates))
            } else {
                format!("E{}", rng.random_range(0..n_events))
            };
            if !ch.contains(&pick) {
                ch.push(pick);
            }
        }
    }
    let mut s = String::new();
    for e in 0..n_events {
        let q: f64 = q_max * (1.0 - rng.random::<f64>());
        s.push_str(&format!("event E{e} prob={q:e}\n"));
    }
    for (g, ch) in children.iter().enumerate() {
        let op = if rng.random_bool(0.5) { "AND" } else { "OR" };
        s.push_str(&format!("gate G{g} {op} {}\n", ch.join(" ")));
    }
    s.push_str("top G0\n");
    s
}

pub fn random_tree(seed: u64, max_events: usize, max_gates: usize, q_max: f64) -> FaultTree {
    let text = random_tree_text(seed, max_events, max_gates, q_max);
    parse_fault_tree(&text).unwrap_or_else(|e| panic!("generated tree failed to parse: {e}\n{text}"))
}

/// Probability of each state vector, enumerated in ascending bitmask order.
fn states(tree: &FaultTree, q: &BTreeMap<String, f64>) -> Vec<(Vec<bool>, f64)> {
    let names = tree.event_names();
    let n = names.len();
    (0u64..1 << n)
        .map(|mask| {
            let s: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let p = names
                .iter()
                .zip(&s)
                .map(|(name, &on)| if on { q[name] } else { 1.0 - q[name] })
                .product();
            (s, p)
        })
        .collect()
}

/// Exact top-event probability by enumeration of the structure function.
pub fn oracle_top(tree: &FaultTree, q: &BTreeMap<String, f64>) -> f64 {
    states(tree, q).into_iter().filter(|(s, _)| tree.evaluate(s)).map(|(_, p)| p).sum()
}

/// Minimal cut sets from the structure function: failing states whose
/// every single-event repair makes the top succeed.
pub fn oracle_cut_sets(tree: &FaultTree) -> BTreeSet<BTreeSet<String>> {
    let names = tree.event_names();
    let n = names.len();
    let mut out = BTreeSet::new();
    for mask in 0u64..1 << n {
        let s: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if !tree.evaluate(&s) {
            continue;
        }
        let minimal = (0..n).filter(|&i| s[i]).all(|i| {
            let mut t = s.clone();
            t[i] = false;
            !tree.evaluate(&t)
        });
        if minimal {
            out.insert((0..n).filter(|&i| s[i]).map(|i| names[i].clone()).collect());
        }
    }
    out
}

/// P(some minimal cut set containing `event` is fully failed) / P(top).
pub fn oracle_fv(tree: &FaultTree, q: &BTreeMap<String, f64>, event: &str) -> f64 {
    let names = tree.event_names();
    let cuts: Vec<Vec<usize>> = oracle_cut_sets(tree)
        .into_iter()
        .filter(|c| c.contains(event))
        .map(|c| c.iter().map(|e| names.iter().position(|n| n == e).unwrap()).collect())
        .collect();
    let top = oracle_top(tree, q);
    if top == 0.0 {
        return 0.0;
    }
    let num: f64 = states(tree, q)
        .into_iter()
        .filter(|(s, _)| cuts.iter().any(|c| c.iter().all(|&i| s[i])))
        .map(|(_, p)| p)
        .sum();
    num / top
}

/// Average ranks, ties sharing the mean of their positions.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman correlation as the Pearson correlation of average ranks. NaN
/// when either side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Path of the built `fvkit` binary.
pub fn fvkit_bin() -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_BIN_EXE_fvkit"))
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
