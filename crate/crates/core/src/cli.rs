//! The `fvkit` command surface. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code:
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success |
//! | 1 | usage error |
//! | 2 | unreadable or invalid input |
//! | 3 | runtime or numeric failure |

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::datagen::{generate_from_cuts, Dataset, DatagenError, PerturbLaw, PerturbSpec};
use crate::ftree::{parse_fault_tree, FaultTree, FtreeError};
use crate::ism::{export_dot, level_partition, load_ssim, reachability, skeleton, IsmError, Orientation};
use crate::neural::{evaluate, train_with_edges, ModelKind, NeuralError, TrainConfig, TrainedModel};
use crate::quant::{fv_from_cuts, minimal_cut_sets_capped, CutSetList, Method, QuantError, DEFAULT_ROW_CAP};
use crate::report::sig6;
use crate::structlearn::{discretize, hill_climb, read_edges_csv, write_edges_csv, HillClimbConfig, StructError};

/// Environment variable overriding the cut-set expansion cap.
pub const CUTSET_CAP_ENV: &str = "FVKIT_CUTSET_CAP";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<FtreeError> for CliError {
    fn from(e: FtreeError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<QuantError> for CliError {
    fn from(e: QuantError) -> Self {
        match e {
            QuantError::MissingProbability(_) => CliError::Input(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<IsmError> for CliError {
    fn from(e: IsmError) -> Self {
        match e {
            IsmError::NoProgress(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<DatagenError> for CliError {
    fn from(e: DatagenError) -> Self {
        match e {
            DatagenError::Quant { .. } | DatagenError::Cutsets(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::NonFiniteLoss { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<StructError> for CliError {
    fn from(e: StructError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "fvkit", version, about = "Fussell-Vesely importance from fault trees and graph surrogates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    /// The held-out indices recorded in the model file.
    Test,
    /// Every sample in the dataset.
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a fault tree and print `OK <events> <gates>`.
    Parse {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Print minimal cut sets, one per line.
    Cutsets {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        max_order: Option<usize>,
    },
    /// Print FV importance of every basic event as CSV.
    Fv {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value = "mcub")]
        method: Method,
    },
    /// Reachability table and level partition of an SSIM.
    Ism {
        #[arg(long)]
        ssim: PathBuf,
        #[arg(long, default_value = "driver")]
        orientation: Orientation,
        /// Write the skeleton DAG as DOT here.
        #[arg(long, alias = "out")]
        dot: Option<PathBuf>,
    },
    /// Generate a labelled dataset by perturbing the tree's parameters.
    Gen {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "mcub")]
        method: Method,
        /// Attach the ISM skeleton of this SSIM as the dataset's edges.
        #[arg(long, conflicts_with = "edges")]
        ssim: Option<PathBuf>,
        /// Attach the edges of this `from,to` CSV.
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Lognormal factors with this error factor instead of log-uniform.
        #[arg(long)]
        error_factor: Option<f64>,
    },
    /// Train a surrogate and write the model file.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Use these edges instead of the dataset's.
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        /// Standardized log10 node features.
        #[arg(long)]
        log_features: bool,
    },
    /// Print `MSE,RMSE,MAE,R2` of a model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: Split,
    },
    /// Predict FV for the tree's own probabilities.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        tree: PathBuf,
    },
    /// Events ordered by predicted FV for the tree's own probabilities.
    Rank {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        tree: PathBuf,
    },
    /// Learn edges by BDeu hill climbing on the median-binarized dataset.
    Structlearn {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        restarts: usize,
        #[arg(long, default_value_t = 1.0)]
        ess: f64,
        #[arg(long, default_value_t = 3)]
        max_in_degree: usize,
    },
    /// Time analytic FV against model inference.
    Bench {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value = "mcub")]
        method: Method,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

pub fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Parse { tree } => {
            let t = load_tree(&tree)?;
            emit(out, &format!("OK {} {}\n", t.events().len(), t.gates().len()))
        }
        Command::Cutsets { tree, max_order } => {
            let t = load_tree(&tree)?;
            let cuts = minimal_cut_sets_capped(&t, max_order, cutset_cap()?)?;
            let mut s = String::new();
            for c in &cuts.sets {
                s.push_str(&c.events.join(" "));
                s.push('\n');
            }
            emit(out, &s)
        }
        Command::Fv { tree, method } => {
            let t = load_tree(&tree)?;
            let cuts = tree_cuts(&t)?;
            emit(out, &fv_csv(&t, &cuts, method)?)
        }
        Command::Ism { ssim, orientation, dot } => {
            let s = load_ssim(&read(&ssim)?)?;
            let m = reachability(&s);
            let lp = level_partition(&m, orientation)?;
            let mut text = String::from("element,reachability,antecedent,intersection\n");
            for r in &lp.table {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    r.element,
                    r.reachability.join(" "),
                    r.antecedent.join(" "),
                    r.intersection.join(" ")
                ));
            }
            text.push_str("\nlevel,elements\n");
            for (i, l) in lp.levels.iter().enumerate() {
                text.push_str(&format!("{},{}\n", i + 1, l.join(" ")));
            }
            if let Some(path) = dot {
                write_file(&path, &export_dot(&skeleton(&m)?))?;
            }
            emit(out, &text)
        }
        Command::Gen {
            tree,
            n,
            seed,
            out: path,
            method,
            ssim,
            edges,
            error_factor,
        } => {
            let t = load_tree(&tree)?;
            let mut spec = PerturbSpec::new(BTreeMap::new(), n as usize, seed);
            if let Some(ef) = error_factor {
                spec.law = PerturbLaw::Lognormal { error_factor: ef };
            }
            let cuts = tree_cuts(&t)?;
            let mut data = generate_from_cuts(&t, &cuts, &spec, method)?;
            if let Some(p) = ssim {
                data = data.with_edges(skeleton(&reachability(&load_ssim(&read(&p)?)?))?.edges);
            } else if let Some(p) = edges {
                data = data.with_edges(load_edges(&p)?);
            }
            check_edges(&data)?;
            write_file(&path, &data.to_jsonl())?;
            let _ = writeln!(err, "wrote {} samples to {}", data.len(), path.display());
            Ok(())
        }
        Command::Train {
            data,
            model,
            seed,
            out: path,
            edges,
            epochs,
            lr,
            log_features,
        } => {
            let d = load_dataset(&data)?;
            let mut cfg = TrainConfig::with_seed(seed);
            if let Some(e) = epochs {
                cfg.epochs = e;
            }
            if let Some(l) = lr {
                cfg.learning_rate = l;
            }
            cfg.log_features = log_features;
            let edges = match edges {
                Some(p) => load_edges(&p)?,
                None if model == ModelKind::Gcn && d.meta.edges.is_empty() => {
                    return Err(NeuralError::NoAdjacency.into())
                }
                None => d.meta.edges.clone(),
            };
            let tm = train_with_edges(model, &d, &edges, &cfg)?;
            write_file(&path, &tm.to_json())?;
            let _ = writeln!(
                err,
                "trained {model} for {} epochs, final train MSE {}",
                tm.loss_trace.len(),
                tm.loss_trace.last().map_or("n/a".into(), |l| sig6(*l))
            );
            emit(out, &metrics_csv(&tm.metrics))
        }
        Command::Eval { model, data, split } => {
            let tm = load_model(&model)?;
            let d = load_dataset(&data)?;
            let ids: Vec<usize> = match split {
                Split::All => (0..d.len()).collect(),
                Split::Test => {
                    if let Some(&bad) = tm.split.test.iter().find(|&&i| i >= d.len()) {
                        return Err(CliError::Input(format!(
                            "model's held-out index {bad} is outside a dataset of {} samples",
                            d.len()
                        )));
                    }
                    tm.split.test.clone()
                }
            };
            let (mut pred, mut truth) = (Vec::new(), Vec::new());
            for i in ids {
                let s = &d.samples[i];
                let p = tm.model.predict(&s.q)?;
                for n in tm.model.node_order() {
                    pred.push(p.fv[n]);
                    truth.push(*s.fv.get(n).ok_or_else(|| NeuralError::MissingEvent(n.clone()))?);
                }
            }
            emit(out, &metrics_csv(&evaluate(&pred, &truth)?))
        }
        Command::Predict { model, tree } => {
            let tm = load_model(&model)?;
            let q = load_tree(&tree)?.probabilities();
            let p = tm.model.predict(&q)?;
            let mut s = String::from("event,q,fv_pred\n");
            for n in tm.model.node_order() {
                s.push_str(&format!("{n},{},{}\n", sig6(q[n]), sig6(p.fv[n])));
            }
            emit(out, &s)
        }
        Command::Rank { model, tree } => {
            let tm = load_model(&model)?;
            let q = load_tree(&tree)?.probabilities();
            let p = tm.model.predict(&q)?;
            let mut s = String::from("rank,event,q,fv_pred\n");
            for (i, n) in p.ranking.iter().enumerate() {
                s.push_str(&format!("{},{n},{},{}\n", i + 1, sig6(q[n]), sig6(p.fv[n])));
            }
            emit(out, &s)
        }
        Command::Structlearn {
            data,
            seed,
            out: path,
            restarts,
            ess,
            max_in_degree,
        } => {
            if !(ess > 0.0 && ess.is_finite()) {
                return Err(CliError::Usage(format!("--ess must be positive, got {ess}")));
            }
            let d = discretize(&load_dataset(&data)?)?;
            let cfg = HillClimbConfig {
                ess,
                max_in_degree,
                restarts,
                seed,
            };
            let r = hill_climb(&d, &cfg);
            let mut buf = Vec::new();
            write_edges_csv(&r.dag.edges(), &mut buf).map_err(|e| CliError::Runtime(e.to_string()))?;
            let text = String::from_utf8(buf).expect("edge names are UTF-8");
            let _ = writeln!(err, "score {} after {} moves", sig6(r.score), r.moves.len());
            match path {
                Some(p) => write_file(&p, &text),
                None => emit(out, &text),
            }
        }
        Command::Bench { tree, model, n, method } => {
            let t = load_tree(&tree)?;
            let tm = load_model(&model)?;
            let q = t.probabilities();
            let cap = cutset_cap()?;
            let n = n as usize;
            let mut analytic = Vec::with_capacity(n);
            let mut inference = Vec::with_capacity(n);
            for _ in 0..n {
                let t0 = Instant::now();
                let cuts = minimal_cut_sets_capped(&t, None, cap)?;
                std::hint::black_box(fv_from_cuts(&t, &cuts, &q, method)?);
                analytic.push(t0.elapsed().as_secs_f64() * 1e3);
                let t0 = Instant::now();
                std::hint::black_box(tm.model.predict(&q)?);
                inference.push(t0.elapsed().as_secs_f64() * 1e3);
            }
            let mut s = String::from("path,n,mean_ms,median_ms,p99_ms\n");
            for (name, v) in [("analytic", analytic), ("model", inference)] {
                let st = timing_stats(&v);
                s.push_str(&format!("{name},{n},{},{},{}\n", sig6(st.mean), sig6(st.median), sig6(st.p99)));
            }
            emit(out, &s)
        }
    }
}

/// Summary of a timing sample, in the sample's units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStats {
    pub mean: f64,
    pub median: f64,
    /// Nearest-rank 99th percentile.
    pub p99: f64,
}

pub fn timing_stats(values: &[f64]) -> TimingStats {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return TimingStats {
            mean: f64::NAN,
            median: f64::NAN,
            p99: f64::NAN,
        };
    }
    let median = if n % 2 == 0 {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    } else {
        v[n / 2]
    };
    let rank = ((0.99 * n as f64).ceil() as usize).clamp(1, n);
    TimingStats {
        mean: v.iter().sum::<f64>() / n as f64,
        median,
        p99: v[rank - 1],
    }
}

/// The `fv` report: one row per event, FV descending, name ascending.
pub fn fv_csv(tree: &FaultTree, cuts: &CutSetList, method: Method) -> Result<String, CliError> {
    let r = fv_from_cuts(tree, cuts, &tree.probabilities(), method)?;
    let mut s = String::from("event,probability,fv_cutset,fv_exact\n");
    for e in r.ranked() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            e.event,
            sig6(e.probability),
            sig6(e.fv_cutset),
            sig6(e.fv_exact)
        ));
    }
    Ok(s)
}

pub fn metrics_csv(m: &crate::neural::Metrics) -> String {
    let r2 = if m.r2.is_nan() { "NaN".to_string() } else { sig6(m.r2) };
    format!("MSE,RMSE,MAE,R2\n{},{},{},{}\n", sig6(m.mse), sig6(m.rmse), sig6(m.mae), r2)
}

fn cutset_cap() -> Result<usize, CliError> {
    match std::env::var(CUTSET_CAP_ENV) {
        Err(_) => Ok(DEFAULT_ROW_CAP),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| CliError::Usage(format!("{CUTSET_CAP_ENV} must be a positive integer, got `{v}`"))),
    }
}

fn tree_cuts(tree: &FaultTree) -> Result<CutSetList, CliError> {
    Ok(minimal_cut_sets_capped(tree, None, cutset_cap()?)?)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(format!("writing output: {e}")))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn load_tree(path: &Path) -> Result<FaultTree, CliError> {
    parse_fault_tree(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let f = fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Dataset::read_jsonl(BufReader::new(f))?)
}

fn load_model(path: &Path) -> Result<TrainedModel, CliError> {
    Ok(TrainedModel::from_json(&read(path)?)?)
}

fn load_edges(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    read_edges_csv(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn check_edges(d: &Dataset) -> Result<(), CliError> {
    for (a, b) in &d.meta.edges {
        for n in [a, b] {
            if !d.meta.events.contains(n) {
                return Err(CliError::Input(format!("edge endpoint `{n}` is not an event of the tree")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = timing_stats(&v);
        assert_eq!(s.median, 50.5);
        assert_eq!(s.p99, 99.0);
        assert_eq!(s.mean, 50.5);
        assert_eq!(timing_stats(&[3.0]).p99, 3.0);
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["fvkit", "nope"], &mut o, &mut e), 1);
        assert_eq!(run(["fvkit", "bench", "--tree", "a", "--model", "b", "--n", "0"], &mut o, &mut e), 1);
        assert_eq!(run(["fvkit", "gen", "--tree", "a", "--n", "5", "--out", "x"], &mut o, &mut e), 1);
        assert_eq!(run(["fvkit", "--help"], &mut o, &mut e), 0);
    }
}
