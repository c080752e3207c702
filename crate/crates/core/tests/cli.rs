mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{fixture, fvkit_bin};

fn run(args: &[&str]) -> Output {
    Command::new(fvkit_bin()).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(fvkit_bin()).args(args).env(key, value).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn parse_reports_counts() {
    let si = fixture("si.ft");
    assert_eq!(stdout(&run(&["parse", "--tree", p(&si)])), "OK 6 4\n");
    assert_eq!(stdout(&run(&["parse", "--tree", p(&fixture("si_params.ft"))])), "OK 6 4\n");
}

#[test]
fn cutsets_golden() {
    let out = stdout(&run(&["cutsets", "--tree", p(&fixture("si.ft"))]));
    assert_eq!(
        out,
        "BUS-A-UN\nBUS-B-UN\nCCF-SI-RF2-ALL\nSI-P1-RF SI-P2-DF\nSI-P1-RF SI-P2-RF\n"
    );
    let first = stdout(&run(&["cutsets", "--tree", p(&fixture("si.ft")), "--max-order", "1"]));
    assert_eq!(first, "BUS-A-UN\nBUS-B-UN\nCCF-SI-RF2-ALL\n");
}

#[test]
fn fv_golden() {
    let out = stdout(&run(&["fv", "--tree", p(&fixture("si.ft"))]));
    assert_eq!(
        out,
        "event,probability,fv_cutset,fv_exact
SI-P1-RF,0.990000,1.00000,0.999978
SI-P2-DF,0.990000,0.999799,0.989880
SI-P2-RF,0.0100000,0.0100990,2.00965e-4
CCF-SI-RF2-ALL,2.00000e-5,2.04020e-5,4.01979e-7
BUS-A-UN,5.50000e-7,5.61054e-7,1.10542e-8
BUS-B-UN,5.50000e-7,5.61054e-7,1.10542e-8
"
    );
    let rare = stdout(&run(&["fv", "--tree", p(&fixture("si.ft")), "--method", "rare"]));
    assert!(rare.contains("CCF-SI-RF2-ALL,2.00000e-5,2.02016e-5,"), "{rare}");
    let exact = stdout(&run(&["fv", "--tree", p(&fixture("si.ft")), "--method", "exact"]));
    assert_eq!(exact.lines().count(), 7);
}

#[test]
fn ism_golden_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("si.dot");
    let out = stdout(&run(&["ism", "--ssim", p(&fixture("si_ssim.csv")), "--dot", p(&dot)]));
    let all = "SI-P2-DF SI-P1-RF SI-P2-RF CCF-SI-RF2-ALL BUS-A-UN BUS-B-UN";
    let pumps = "SI-P1-RF SI-P2-RF CCF-SI-RF2-ALL";
    let want = format!(
        "element,reachability,antecedent,intersection
SI-P2-DF,SI-P2-DF {pumps},SI-P2-DF BUS-B-UN,SI-P2-DF
SI-P1-RF,{pumps},{all},{pumps}
SI-P2-RF,{pumps},{all},{pumps}
CCF-SI-RF2-ALL,{pumps},{all},{pumps}
BUS-A-UN,{pumps} BUS-A-UN,BUS-A-UN,BUS-A-UN
BUS-B-UN,SI-P2-DF {pumps} BUS-B-UN,BUS-B-UN,BUS-B-UN

level,elements
1,BUS-A-UN BUS-B-UN
2,SI-P2-DF
3,{pumps}
"
    );
    assert_eq!(out, want);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert_eq!(text.matches(" -> ").count(), 7);
    assert!(text.contains("\"BUS-B-UN\" -> \"SI-P2-DF\";"));

    let top = stdout(&run(&["ism", "--ssim", p(&fixture("si_ssim.csv")), "--orientation", "top"]));
    assert!(top.ends_with(&format!("level,elements\n1,{pumps}\n2,SI-P2-DF BUS-A-UN\n3,BUS-B-UN\n")), "{top}");
}

#[test]
fn exit_codes() {
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(code(run(&[])), 1);
    assert_eq!(code(run(&["--help"])), 0);
    assert_eq!(code(run(&["--version"])), 0);
    assert_eq!(code(run(&["frobnicate"])), 1);
    assert_eq!(code(run(&["fv", "--tree", p(&fixture("si.ft")), "--method", "bogus"])), 1);
    assert_eq!(code(run(&["parse", "--tree", "/definitely/not/here.ft"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ft");
    std::fs::write(&bad, "event A prob=2\ngate T OR A\ntop T\n").unwrap();
    let o = run(&["parse", "--tree", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let out = dir.path().join("d.jsonl");
    assert_eq!(code(run(&["gen", "--tree", p(&fixture("si.ft")), "--n", "0", "--seed", "1", "--out", p(&out)])), 1);

    let si = fixture("si.ft");
    assert_eq!(code(run_env(&["cutsets", "--tree", p(&si)], "FVKIT_CUTSET_CAP", "1")), 3);
    assert_eq!(code(run_env(&["cutsets", "--tree", p(&si)], "FVKIT_CUTSET_CAP", "abc")), 1);
    assert_eq!(code(run_env(&["cutsets", "--tree", p(&si)], "FVKIT_CUTSET_CAP", "1000")), 0);
}

#[test]
fn pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("si.jsonl");
    let si = fixture("si.ft");
    let ssim = fixture("si_ssim.csv");
    stdout(&run(&["gen", "--tree", p(&si), "--n", "40", "--seed", "42", "--out", p(&data), "--ssim", p(&ssim)]));
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 41);
    assert!(text.lines().next().unwrap().starts_with("{\"meta\""));

    // Same seed, same bytes.
    let again = dir.path().join("again.jsonl");
    stdout(&run(&["gen", "--tree", p(&si), "--n", "40", "--seed", "42", "--out", p(&again), "--ssim", p(&ssim)]));
    assert_eq!(std::fs::read(&again).unwrap(), text.as_bytes());

    let edges = dir.path().join("hc.csv");
    let o = run(&["structlearn", "--data", p(&data), "--seed", "1", "--out", p(&edges)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("score"));
    assert!(std::fs::read_to_string(&edges).unwrap().starts_with("from,to\n"));

    for kind in ["gcn", "mlp"] {
        let model = dir.path().join(format!("{kind}.json"));
        let metrics = stdout(&run(&[
            "train", "--data", p(&data), "--model", kind, "--seed", "3", "--out", p(&model), "--epochs", "30",
        ]));
        assert!(metrics.starts_with("MSE,RMSE,MAE,R2\n"), "{metrics}");
        let eval = stdout(&run(&["eval", "--model", p(&model), "--data", p(&data)]));
        // The held-out split reproduces the training-time metrics.
        assert_eq!(eval, metrics);
        let all = stdout(&run(&["eval", "--model", p(&model), "--data", p(&data), "--split", "all"]));
        assert_eq!(all.lines().count(), 2);

        let pred = stdout(&run(&["predict", "--model", p(&model), "--tree", p(&si)]));
        assert!(pred.starts_with("event,q,fv_pred\n"));
        assert_eq!(pred.lines().count(), 7);
        let rank = stdout(&run(&["rank", "--model", p(&model), "--tree", p(&si)]));
        assert!(rank.starts_with("rank,event,q,fv_pred\n1,"));
        assert_eq!(rank.lines().count(), 7);

        let bench = stdout(&run(&["bench", "--tree", p(&si), "--model", p(&model), "--n", "50"]));
        let lines: Vec<&str> = bench.lines().collect();
        assert_eq!(lines[0], "path,n,mean_ms,median_ms,p99_ms");
        assert!(lines[1].starts_with("analytic,50,"));
        assert!(lines[2].starts_with("model,50,"));
    }

    let hc_model = dir.path().join("hc.json");
    stdout(&run(&[
        "train", "--data", p(&data), "--model", "gcn", "--seed", "3", "--out", p(&hc_model), "--epochs", "5", "--edges",
        p(&edges),
    ]));
    // An unreadable model file is an input error.
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{").unwrap();
    assert_eq!(run(&["predict", "--model", p(&junk), "--tree", p(&si)]).status.code(), Some(2));
}
