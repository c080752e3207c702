mod common;

use common::{random_tree_text, si_tree, SI_PARAMS_TREE};
use fvkit::ftree::{unavailabilities, DEFAULT_MISSION_HOURS};
use fvkit::{parse_fault_tree, FtreeError, ReliabilityParam};
use proptest::prelude::*;

#[test]
fn render_round_trips_random_trees() {
    for seed in 0..200 {
        let tree = parse_fault_tree(&random_tree_text(seed, 8, 4, 1e-3)).unwrap();
        let again = parse_fault_tree(&tree.render()).unwrap();
        assert_eq!(tree, again, "seed {seed}");
        assert_eq!(tree.render(), again.render());
    }
}

#[test]
fn render_round_trips_every_parameter_kind() {
    let text = "\
event A prob=1e-3
event B rate=2e-6 mission=100
event C rate=1e-5 tau=720
event D rate=1e-4 mttr=8
event IE freq=0.5
event CCF beta=0.1 of=B
gate G AND A B C D
gate TOP OR G CCF IE
top TOP
";
    let tree = parse_fault_tree(text).unwrap();
    assert_eq!(parse_fault_tree(&tree.render()).unwrap(), tree);
}

#[test]
fn gate_cycle_is_rejected() {
    for seed in 0..50 {
        let text = random_tree_text(seed, 6, 4, 1e-3);
        // Make the top gate a child of the last gate.
        let last = text.lines().filter(|l| l.starts_with("gate ")).count() - 1;
        let cyclic: String = text
            .lines()
            .map(|l| {
                if l.starts_with(&format!("gate G{last} ")) {
                    format!("{l} G0\n")
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        if last == 0 {
            // A single gate pointing at itself.
            assert!(matches!(parse_fault_tree(&cyclic), Err(FtreeError::CycleDetected(_))));
            continue;
        }
        match parse_fault_tree(&cyclic) {
            Err(FtreeError::CycleDetected(path)) => assert!(path.len() >= 2, "seed {seed}: {path:?}"),
            other => panic!("seed {seed}: expected a cycle, got {other:?}"),
        }
    }
}

#[test]
fn malformed_input_is_reported() {
    assert!(matches!(parse_fault_tree("event A prob=0.1\n"), Err(FtreeError::MissingTop)));
    assert!(matches!(
        parse_fault_tree("event A prob=0.1\nevent A prob=0.2\ngate T OR A\ntop T\n"),
        Err(FtreeError::DuplicateName(_))
    ));
    assert!(matches!(
        parse_fault_tree("event A prob=0.1\ngate T OR A B\ntop T\n"),
        Err(FtreeError::UnresolvedReference(_))
    ));
    assert!(matches!(
        parse_fault_tree("event A prob=1.5\ngate T OR A\ntop T\n"),
        Err(FtreeError::InvalidParameter { .. })
    ));
    assert!(matches!(
        parse_fault_tree("event A prob=0.1\ngate T XOR A\ntop T\n"),
        Err(FtreeError::Syntax { line: 2, .. })
    ));
}

#[test]
fn closed_form_unavailabilities() {
    let q = |p: ReliabilityParam| p.standalone_unavailability().unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-13 * b.abs();
    assert!(close(q(ReliabilityParam::Probability { p: 0.25 }), 0.25));
    assert!(close(
        q(ReliabilityParam::FailureRate { rate: 1e-3, mission: 24.0 }),
        1.0 - (-0.024f64).exp()
    ));
    assert!(close(q(ReliabilityParam::Tested { rate: 1e-5, tau: 720.0 }), 3.6e-3));
    assert!(close(q(ReliabilityParam::Repairable { rate: 1e-4, mttr: 8.0 }), 8e-4 / 1.0008));
    assert_eq!(q(ReliabilityParam::Frequency { freq: 3.0 }), 1.0);

    let tree = parse_fault_tree("event A rate=1e-4\nevent C beta=0.1 of=A\ngate T OR A C\ntop T\n").unwrap();
    let qs = unavailabilities(&tree.params()).unwrap();
    let qa = 1.0 - (-1e-4 * DEFAULT_MISSION_HOURS).exp();
    assert!(close(qs["A"], qa));
    assert!(close(qs["C"], 0.1 * qa));
}

#[test]
fn si_fixtures_have_the_expected_shape() {
    let tree = si_tree();
    assert_eq!(tree.events().len(), 6);
    assert_eq!(tree.gates().len(), 4);
    assert_eq!(tree.top_name(), "SI-FAILS");
    assert!(tree.unreachable_events().is_empty());

    let params = parse_fault_tree(SI_PARAMS_TREE).unwrap();
    assert_eq!(params.event_names(), tree.event_names());
    let q = params.probabilities();
    assert!(q.values().all(|&v| v > 0.0 && v < 1e-3), "{q:?}");
    assert!((q["CCF-SI-RF2-ALL"] - 0.05 * q["SI-P1-RF"]).abs() < 1e-18);
}

fn param_strategy() -> impl Strategy<Value = ReliabilityParam> {
    prop_oneof![
        (0.0..=1.0f64).prop_map(|p| ReliabilityParam::Probability { p }),
        (0.0..1e-2f64, 0.0..1e4f64).prop_map(|(rate, mission)| ReliabilityParam::FailureRate { rate, mission }),
        (0.0..1e-2f64, 0.0..1e4f64).prop_map(|(rate, tau)| ReliabilityParam::Tested { rate, tau }),
        (0.0..1e-2f64, 0.0..1e3f64).prop_map(|(rate, mttr)| ReliabilityParam::Repairable { rate, mttr }),
    ]
}

proptest! {
    #[test]
    fn unavailability_is_a_probability(p in param_strategy()) {
        let q = p.standalone_unavailability().unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
    }

    #[test]
    fn unavailability_grows_with_rate(rate in 1e-9..1e-2f64, k in 1.0..10.0f64, t in 1.0..1e3f64) {
        for make in [
            |r: f64, t: f64| ReliabilityParam::FailureRate { rate: r, mission: t },
            |r: f64, t: f64| ReliabilityParam::Tested { rate: r, tau: t },
            |r: f64, t: f64| ReliabilityParam::Repairable { rate: r, mttr: t },
        ] {
            let lo = make(rate, t).standalone_unavailability().unwrap();
            let hi = make(rate * k, t).standalone_unavailability().unwrap();
            prop_assert!(hi >= lo);
        }
    }
}
