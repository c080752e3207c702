mod common;

use std::collections::{BTreeSet, HashMap};

use fvkit::datagen::sample_rng;
use fvkit::structlearn::{
    bdeu_score, family_score, hill_climb, hill_climb_from, random_dag, DagCandidate, DiscreteDataset,
    HillClimbConfig, StructError,
};
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("V{i}")).collect()
}

/// BDeu family score over observed parent configurations only; unobserved
/// ones contribute zero.
fn oracle_family(rows: &[Vec<u8>], child: usize, parents: &[usize], ess: f64) -> f64 {
    let q = 2f64.powi(parents.len() as i32);
    let mut counts: HashMap<Vec<u8>, [f64; 2]> = HashMap::new();
    for r in rows {
        let key: Vec<u8> = parents.iter().map(|&p| r[p]).collect();
        counts.entry(key).or_default()[r[child] as usize] += 1.0;
    }
    let (a_j, a_jk) = (ess / q, ess / (2.0 * q));
    counts
        .values()
        .map(|c| {
            ln_gamma(a_j) - ln_gamma(a_j + c[0] + c[1]) + ln_gamma(a_jk + c[0]) - ln_gamma(a_jk)
                + ln_gamma(a_jk + c[1])
                - ln_gamma(a_jk)
        })
        .sum()
}

fn random_rows(seed: u64, n_rows: usize, n_vars: usize) -> Vec<Vec<u8>> {
    let mut rng = sample_rng(seed, 0);
    (0..n_rows)
        .map(|_| {
            let mut r: Vec<u8> = (0..n_vars).map(|_| rng.random_range(0..2)).collect();
            // Some dependence so searches have something to find.
            if n_vars > 1 && rng.random_bool(0.8) {
                r[1] = r[0];
            }
            r
        })
        .collect()
}

#[test]
fn closed_form_single_variable() {
    let data = DiscreteDataset::new(names(1), vec![vec![0], vec![0], vec![1], vec![1]]).unwrap();
    let s = bdeu_score(&DagCandidate::empty(names(1)), &data, 1.0).unwrap();
    assert!((s + 3.75342).abs() < 1e-4, "{s}");
    // lnΓ(1) - lnΓ(5) + 2 (lnΓ(2.5) - lnΓ(0.5)), by hand.
    let hand = -(24f64.ln()) + 2.0 * ((0.75 * std::f64::consts::PI.sqrt()).ln() - std::f64::consts::PI.sqrt().ln());
    assert!((s - hand).abs() < 1e-12);
}

#[test]
fn family_scores_match_oracle() {
    for seed in 0..30 {
        let n_vars = 4;
        let rows = random_rows(seed, 50, n_vars);
        let data = DiscreteDataset::new(names(n_vars), rows.clone()).unwrap();
        let mut rng = sample_rng(seed, 1);
        for child in 0..n_vars {
            let parents: Vec<usize> = (0..n_vars).filter(|&p| p != child && rng.random_bool(0.5)).collect();
            let set: BTreeSet<usize> = parents.iter().copied().collect();
            for ess in [0.5, 1.0, 10.0] {
                let got = family_score(&data, child, &set, ess);
                let want = oracle_family(&rows, child, &parents, ess);
                assert!((got - want).abs() < 1e-9, "seed {seed} child {child}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn score_decomposes_and_ignores_row_order() {
    for seed in 0..20 {
        let rows = random_rows(seed, 40, 5);
        let data = DiscreteDataset::new(names(5), rows.clone()).unwrap();
        let dag = random_dag(&names(5), 3, &mut sample_rng(seed, 2));
        let total = bdeu_score(&dag, &data, 1.0).unwrap();
        let parts: f64 = (0..5).map(|i| family_score(&data, i, dag.parents(i), 1.0)).sum();
        assert!((total - parts).abs() < 1e-9);

        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut sample_rng(seed, 3));
        let other = DiscreteDataset::new(names(5), shuffled).unwrap();
        assert!((bdeu_score(&dag, &other, 1.0).unwrap() - total).abs() < 1e-9);
    }
}

#[test]
fn empty_dataset_scores_zero() {
    let data = DiscreteDataset::new(names(3), vec![]).unwrap();
    assert_eq!(bdeu_score(&DagCandidate::empty(names(3)), &data, 1.0).unwrap(), 0.0);
}

#[test]
fn copied_variable_gives_one_edge() {
    let mut rng = sample_rng(5, 0);
    let rows: Vec<Vec<u8>> = (0..200)
        .map(|_| {
            let a = rng.random_range(0..2u8);
            vec![a, a]
        })
        .collect();
    let data = DiscreteDataset::new(names(2), rows).unwrap();
    let res = hill_climb(&data, &HillClimbConfig::default());
    assert_eq!(res.dag.edges().len(), 1);
}

#[test]
fn independent_variables_give_empty_graph() {
    // Every combination equally often: exact independence.
    let rows: Vec<Vec<u8>> = (0..8u8)
        .flat_map(|m| std::iter::repeat_n(vec![m & 1, (m >> 1) & 1, (m >> 2) & 1], 25))
        .collect();
    let data = DiscreteDataset::new(names(3), rows).unwrap();
    let res = hill_climb(&data, &HillClimbConfig::default());
    assert!(res.dag.edges().is_empty());
    assert!(res.moves.is_empty());
}

#[test]
fn search_invariants_over_seeded_runs() {
    for seed in 0..25 {
        let n_vars = 6;
        let data = DiscreteDataset::new(names(n_vars), random_rows(seed, 120, n_vars)).unwrap();
        let empty_score = bdeu_score(&DagCandidate::empty(names(n_vars)), &data, 1.0).unwrap();
        for cap in [1, 2, 3] {
            let cfg = HillClimbConfig {
                max_in_degree: cap,
                restarts: 2,
                seed,
                ..Default::default()
            };
            let res = hill_climb(&data, &cfg);
            assert!(res.dag.is_acyclic());
            assert!((0..n_vars).all(|i| res.dag.in_degree(i) <= cap));
            assert!(res.trace.windows(2).all(|w| w[1] > w[0]), "seed {seed}: {:?}", res.trace);
            assert_eq!(res.trace.len(), res.moves.len() + 1);
            assert!(res.score >= empty_score);
            assert!((bdeu_score(&res.dag, &data, 1.0).unwrap() - res.score).abs() < 1e-6);

            let start = random_dag(&names(n_vars), cap, &mut sample_rng(seed, 9));
            let run = hill_climb_from(&data, start, &cfg);
            assert!(run.trace.windows(2).all(|w| w[1] > w[0]));
            assert!((0..n_vars).all(|i| run.dag.in_degree(i) <= cap));
        }
    }
}

#[test]
fn invalid_inputs() {
    assert!(matches!(DiscreteDataset::new(vec![], vec![]), Err(StructError::NoVariables)));
    assert!(matches!(DiscreteDataset::new(names(2), vec![vec![0]]), Err(StructError::Ragged { .. })));
    assert!(matches!(DiscreteDataset::new(names(1), vec![vec![2]]), Err(StructError::NotBinary { .. })));
    let cyc = [("V0".to_string(), "V1".to_string()), ("V1".to_string(), "V0".to_string())];
    assert!(DagCandidate::from_edges(names(2), &cyc).is_err());
    let data = DiscreteDataset::new(names(2), vec![vec![0, 1]]).unwrap();
    assert!(matches!(
        bdeu_score(&DagCandidate::empty(names(3)), &data, 1.0),
        Err(StructError::NodeMismatch)
    ));
}
