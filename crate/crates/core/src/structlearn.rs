//! Score-based structure learning baseline: median-binarized event
//! probabilities, the BDeu score, and greedy hill climbing over single-edge
//! operations.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::datagen::{sample_rng, Dataset};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("dataset has no variables")]
    NoVariables,
    #[error("row {row} has {found} values, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("value {value} at row {row} is not binary")]
    NotBinary { row: usize, value: u8 },
    #[error("sample {sample} lacks event `{event}`")]
    MissingEvent { sample: usize, event: String },
    #[error("dag nodes do not match dataset variables")]
    NodeMismatch,
    #[error("invalid dag: {0}")]
    InvalidDag(String),
}

/// Binary observations, one column per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDataset {
    names: Vec<String>,
    rows: Vec<Vec<u8>>,
}

impl DiscreteDataset {
    pub fn new(names: Vec<String>, rows: Vec<Vec<u8>>) -> Result<Self, StructError> {
        if names.is_empty() {
            return Err(StructError::NoVariables);
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != names.len() {
                return Err(StructError::Ragged {
                    row: i,
                    expected: names.len(),
                    found: r.len(),
                });
            }
            if let Some(&v) = r.iter().find(|&&v| v > 1) {
                return Err(StructError::NotBinary { row: i, value: v });
            }
        }
        Ok(DiscreteDataset { names, rows })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// Median of a non-empty slice; the mean of the two middle values for even
/// lengths.
fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

/// 1 where a value exceeds the column median.
pub fn binarize(values: &[f64]) -> Vec<u8> {
    if values.is_empty() {
        return Vec::new();
    }
    let m = median(values);
    values.iter().map(|&v| u8::from(v > m)).collect()
}

/// Per-event median split of the sampled probabilities.
pub fn discretize(data: &Dataset) -> Result<DiscreteDataset, StructError> {
    if data.samples.len() < 2 {
        return Err(StructError::TooFewSamples {
            min: 2,
            got: data.samples.len(),
        });
    }
    let names = data.meta.events.clone();
    let mut columns = Vec::with_capacity(names.len());
    for name in &names {
        let col = data
            .samples
            .iter()
            .map(|s| {
                s.q.get(name).copied().ok_or_else(|| StructError::MissingEvent {
                    sample: s.sample_id,
                    event: name.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        columns.push(binarize(&col));
    }
    let rows = (0..data.samples.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    DiscreteDataset::new(names, rows)
}

/// Directed graph over named variables, stored as parent sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagCandidate {
    nodes: Vec<String>,
    parents: Vec<BTreeSet<usize>>,
}

impl DagCandidate {
    pub fn empty(nodes: Vec<String>) -> Self {
        let n = nodes.len();
        DagCandidate {
            nodes,
            parents: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(nodes: Vec<String>, edges: &[(String, String)]) -> Result<Self, StructError> {
        let mut dag = DagCandidate::empty(nodes);
        for (from, to) in edges {
            let (f, t) = (dag.index(from)?, dag.index(to)?);
            if f == t || dag.reaches(t, f) {
                return Err(StructError::InvalidDag(format!("edge {from} -> {to} closes a cycle")));
            }
            dag.parents[t].insert(f);
        }
        Ok(dag)
    }

    fn index(&self, name: &str) -> Result<usize, StructError> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| StructError::InvalidDag(format!("unknown node `{name}`")))
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn parents(&self, i: usize) -> &BTreeSet<usize> {
        &self.parents[i]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(&from)
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.parents[i].len()
    }

    /// Edges by (from, to) name, sorted.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out: Vec<_> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(t, ps)| ps.iter().map(move |&f| (f, t)))
            .map(|(f, t)| (self.nodes[f].clone(), self.nodes[t].clone()))
            .collect();
        out.sort();
        out
    }

    /// Whether a directed path leads from `from` to `to`.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        let mut stack = vec![to];
        let mut seen = vec![false; self.nodes.len()];
        // Walk parents backwards from `to`.
        while let Some(v) = stack.pop() {
            if v == from {
                return true;
            }
            for &p in &self.parents[v] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        false
    }

    pub fn is_acyclic(&self) -> bool {
        (0..self.nodes.len()).all(|t| self.parents[t].iter().all(|&f| f != t && !self.reaches(t, f)))
    }
}

/// Log marginal likelihood of one variable given its parents.
pub fn family_score(data: &DiscreteDataset, child: usize, parents: &BTreeSet<usize>, ess: f64) -> f64 {
    const R: usize = 2;
    let parents: Vec<usize> = parents.iter().copied().collect();
    let q = 1usize << parents.len();
    let mut counts = vec![[0usize; R]; q];
    for row in &data.rows {
        let j = parents
            .iter()
            .enumerate()
            .fold(0usize, |acc, (b, &p)| acc | (usize::from(row[p]) << b));
        counts[j][usize::from(row[child])] += 1;
    }
    let a_ij = ess / q as f64;
    let a_ijk = ess / (q * R) as f64;
    counts
        .iter()
        .map(|c| {
            let n_ij = (c[0] + c[1]) as f64;
            ln_gamma(a_ij) - ln_gamma(a_ij + n_ij)
                + c.iter()
                    .map(|&n| ln_gamma(a_ijk + n as f64) - ln_gamma(a_ijk))
                    .sum::<f64>()
        })
        .sum()
}

/// BDeu score with binary variables and equivalent sample size `ess`.
pub fn bdeu_score(dag: &DagCandidate, data: &DiscreteDataset, ess: f64) -> Result<f64, StructError> {
    if dag.nodes != data.names {
        return Err(StructError::NodeMismatch);
    }
    Ok((0..data.n_vars())
        .map(|i| family_score(data, i, &dag.parents[i], ess))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeOp {
    Add,
    Delete,
    Reverse,
}

impl fmt::Display for EdgeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeOp::Add => "add",
            EdgeOp::Delete => "delete",
            EdgeOp::Reverse => "reverse",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HillClimbConfig {
    pub ess: f64,
    pub max_in_degree: usize,
    /// Extra runs from seeded random graphs; the best final score wins.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for HillClimbConfig {
    fn default() -> Self {
        HillClimbConfig {
            ess: 1.0,
            max_in_degree: 3,
            restarts: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HillClimbResult {
    pub dag: DagCandidate,
    pub score: f64,
    /// Score of the starting graph, then after each applied move.
    pub trace: Vec<f64>,
    /// Applied moves as (op, from, to).
    pub moves: Vec<(EdgeOp, String, String)>,
}

/// Greedy search from the empty graph, plus `cfg.restarts` runs from
/// random acyclic graphs.
pub fn hill_climb(data: &DiscreteDataset, cfg: &HillClimbConfig) -> HillClimbResult {
    let mut best = hill_climb_from(data, DagCandidate::empty(data.names.clone()), cfg);
    for r in 0..cfg.restarts {
        let mut rng = sample_rng(cfg.seed, r);
        let start = random_dag(&data.names, cfg.max_in_degree, &mut rng);
        let run = hill_climb_from(data, start, cfg);
        if run.score > best.score {
            best = run;
        }
    }
    best
}

/// Random DAG consistent with a shuffled order, each allowed edge kept with
/// probability 1/2 up to the in-degree cap.
pub fn random_dag<R: Rng + ?Sized>(names: &[String], cap: usize, rng: &mut R) -> DagCandidate {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.shuffle(rng);
    let mut dag = DagCandidate::empty(names.to_vec());
    for (a, &f) in order.iter().enumerate() {
        for &t in &order[a + 1..] {
            if dag.in_degree(t) < cap && rng.random_bool(0.5) {
                dag.parents[t].insert(f);
            }
        }
    }
    dag
}

/// One greedy run from `start`, which must be a DAG over the dataset's
/// variables within the in-degree cap.
pub fn hill_climb_from(data: &DiscreteDataset, start: DagCandidate, cfg: &HillClimbConfig) -> HillClimbResult {
    let mut dag = start;
    let n = data.n_vars();
    let mut family: Vec<f64> = (0..n)
        .map(|i| family_score(data, i, &dag.parents[i], cfg.ess))
        .collect();
    let mut score: f64 = family.iter().sum();
    let mut trace = vec![score];
    let mut moves = Vec::new();

    loop {
        // (delta, op, from, to, new family scores)
        let mut best: Option<(f64, EdgeOp, usize, usize, Vec<(usize, f64)>)> = None;
        let mut consider = |delta: f64, op: EdgeOp, f: usize, t: usize, fams: Vec<(usize, f64)>| {
            if delta <= 0.0 {
                return;
            }
            let key = (op, &data.names[f], &data.names[t]);
            let better = match &best {
                None => true,
                Some((d, bop, bf, bt, _)) => match delta.total_cmp(d) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => key < (*bop, &data.names[*bf], &data.names[*bt]),
                },
            };
            if better {
                best = Some((delta, op, f, t, fams));
            }
        };

        for f in 0..n {
            for t in 0..n {
                if f == t {
                    continue;
                }
                if dag.has_edge(f, t) {
                    let mut pt = dag.parents[t].clone();
                    pt.remove(&f);
                    let new_t = family_score(data, t, &pt, cfg.ess);
                    consider(new_t - family[t], EdgeOp::Delete, f, t, vec![(t, new_t)]);

                    // Reverse f→t into t→f: legal unless another path f⇝t exists.
                    if dag.in_degree(f) < cfg.max_in_degree {
                        let mut probe = dag.clone();
                        probe.parents[t].remove(&f);
                        if !probe.reaches(f, t) {
                            let mut pf = dag.parents[f].clone();
                            pf.insert(t);
                            let new_f = family_score(data, f, &pf, cfg.ess);
                            let delta = (new_t - family[t]) + (new_f - family[f]);
                            consider(delta, EdgeOp::Reverse, f, t, vec![(t, new_t), (f, new_f)]);
                        }
                    }
                } else if !dag.has_edge(t, f) && dag.in_degree(t) < cfg.max_in_degree && !dag.reaches(t, f) {
                    let mut pt = dag.parents[t].clone();
                    pt.insert(f);
                    let new_t = family_score(data, t, &pt, cfg.ess);
                    consider(new_t - family[t], EdgeOp::Add, f, t, vec![(t, new_t)]);
                }
            }
        }

        let Some((_, op, f, t, fams)) = best else { break };
        match op {
            EdgeOp::Add => {
                dag.parents[t].insert(f);
            }
            EdgeOp::Delete => {
                dag.parents[t].remove(&f);
            }
            EdgeOp::Reverse => {
                dag.parents[t].remove(&f);
                dag.parents[f].insert(t);
            }
        }
        for (i, s) in fams {
            family[i] = s;
        }
        let next: f64 = family.iter().sum();
        if next <= score {
            // Rounding ate the gain; undo and stop at this optimum.
            match op {
                EdgeOp::Add => {
                    dag.parents[t].remove(&f);
                }
                EdgeOp::Delete => {
                    dag.parents[t].insert(f);
                }
                EdgeOp::Reverse => {
                    dag.parents[f].remove(&t);
                    dag.parents[t].insert(f);
                }
            }
            break;
        }
        score = next;
        trace.push(score);
        moves.push((op, data.names[f].clone(), data.names[t].clone()));
    }
    HillClimbResult {
        dag,
        score,
        trace,
        moves,
    }
}

/// `from,to` CSV with a header row.
pub fn write_edges_csv<W: Write>(edges: &[(String, String)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "from,to")?;
    for (f, t) in edges {
        writeln!(w, "{f},{t}")?;
    }
    Ok(())
}

/// Parses a `from,to` CSV; the header row is optional.
pub fn read_edges_csv(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == "from,to") {
            continue;
        }
        let (f, t) = line
            .split_once(',')
            .ok_or_else(|| format!("line {}: expected `from,to`", i + 1))?;
        let (f, t) = (f.trim(), t.trim());
        if f.is_empty() || t.is_empty() || t.contains(',') {
            return Err(format!("line {}: expected `from,to`", i + 1));
        }
        out.push((f.to_string(), t.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(names: &[&str], rows: Vec<Vec<u8>>) -> DiscreteDataset {
        DiscreteDataset::new(names.iter().map(|s| s.to_string()).collect(), rows).unwrap()
    }

    #[test]
    fn median_split() {
        assert_eq!(binarize(&[1.0, 2.0, 3.0, 4.0]), vec![0, 0, 1, 1]);
        assert_eq!(binarize(&[5.0; 4]), vec![0; 4]);
        assert_eq!(binarize(&[3.0, 1.0, 2.0]), vec![1, 0, 0]);
    }

    #[test]
    fn single_variable_closed_form() {
        let d = ds(&["a"], vec![vec![0], vec![0], vec![1], vec![1]]);
        let s = bdeu_score(&DagCandidate::empty(vec!["a".into()]), &d, 1.0).unwrap();
        let expect = -(24f64).ln() + 2.0 * 0.75f64.ln();
        assert!((s - expect).abs() < 1e-10);
        assert!((s + 3.75342).abs() < 1e-4);
    }

    #[test]
    fn empty_data_scores_zero() {
        let d = ds(&["a", "b"], vec![]);
        let dag = DagCandidate::from_edges(d.names().to_vec(), &[("a".into(), "b".into())]).unwrap();
        assert_eq!(bdeu_score(&dag, &d, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn copy_gets_an_edge() {
        let rows: Vec<Vec<u8>> = (0..200).map(|i| vec![(i % 2) as u8, (i % 2) as u8]).collect();
        let d = ds(&["a", "b"], rows);
        let r = hill_climb(&d, &HillClimbConfig::default());
        assert_eq!(r.dag.edges(), vec![("a".to_string(), "b".to_string())]);
        assert!(r.trace.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn single_variable_no_moves() {
        let d = ds(&["a"], vec![vec![0], vec![1]]);
        let r = hill_climb(&d, &HillClimbConfig::default());
        assert!(r.dag.edges().is_empty());
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn cycle_rejected() {
        let names: Vec<String> = vec!["a".into(), "b".into()];
        let e = [("a".to_string(), "b".to_string()), ("b".to_string(), "a".to_string())];
        assert!(DagCandidate::from_edges(names, &e).is_err());
    }

    #[test]
    fn edges_csv_round_trip() {
        let e = vec![("a".to_string(), "b".to_string())];
        let mut buf = Vec::new();
        write_edges_csv(&e, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "from,to\na,b\n");
        assert_eq!(read_edges_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), e);
    }
}
