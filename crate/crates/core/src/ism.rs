//! Interpretive structural modeling: a Boolean expert-relation matrix is
//! closed into a reachability matrix, partitioned into levels, and reduced
//! to a DAG skeleton that serves as the dependency graph between basic
//! events.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsmError {
    #[error("matrix is not square: {0}")]
    NonSquare(String),
    #[error("row {row}, column {col}: cell `{value}` is not 0 or 1")]
    BadCell { row: usize, col: usize, value: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("row {row} is labelled `{found}`, expected `{expected}`")]
    RowNameMismatch { row: usize, expected: String, found: String },
    #[error("matrix is not a reachability matrix: {0}")]
    NotReachability(String),
    #[error("level extraction made no progress with {0} elements left")]
    NoProgress(usize),
}

/// Square Boolean matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    n: usize,
    cells: Vec<bool>,
}

impl BoolMatrix {
    pub fn new(n: usize) -> Self {
        BoolMatrix {
            n,
            cells: vec![false; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let n = rows.len();
        let mut m = Self::new(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "rows must be square");
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.cells[i * self.n + j] = v;
    }

    /// Boolean product: `(a*b)[i][j] = OR_k a[i][k] AND b[k][j]`.
    pub fn mul(&self, other: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = BoolMatrix::new(n);
        for i in 0..n {
            for k in 0..n {
                if self.get(i, k) {
                    for j in 0..n {
                        if other.get(k, j) {
                            out.set(i, j, true);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn or(&self, other: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.n, other.n);
        BoolMatrix {
            n: self.n,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    /// `true` when every set cell of `self` is also set in `other`.
    pub fn le(&self, other: &BoolMatrix) -> bool {
        self.n == other.n && self.cells.iter().zip(&other.cells).all(|(a, b)| !a || *b)
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        self.cells.chunks(self.n.max(1)).take(self.n).map(|c| c.to_vec()).collect()
    }
}

fn check_unique(names: &[String]) -> Result<(), IsmError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(IsmError::DuplicateName(n.clone()));
        }
    }
    Ok(())
}

/// Structural self-interaction matrix: `cells[i][j]` is set when element
/// `i` directly influences element `j`. The diagonal is always set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsimMatrix {
    pub names: Vec<String>,
    pub cells: BoolMatrix,
}

impl SsimMatrix {
    pub fn new(names: Vec<String>, mut cells: BoolMatrix) -> Result<Self, IsmError> {
        if names.len() != cells.size() {
            return Err(IsmError::NonSquare(format!(
                "{} names for a {}x{} matrix",
                names.len(),
                cells.size(),
                cells.size()
            )));
        }
        check_unique(&names)?;
        for i in 0..names.len() {
            cells.set(i, i, true);
        }
        Ok(SsimMatrix { names, cells })
    }

    /// Builds an SSIM from a list of directed relations.
    pub fn from_edges(names: Vec<String>, edges: &[(String, String)]) -> Result<Self, IsmError> {
        let mut cells = BoolMatrix::new(names.len());
        let idx = |s: &str| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| IsmError::NonSquare(format!("edge endpoint `{s}` is not a listed name")))
        };
        for (a, b) in edges {
            cells.set(idx(a)?, idx(b)?, true);
        }
        SsimMatrix::new(names, cells)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (i, n) in self.names.iter().enumerate() {
            out.push_str(n);
            for j in 0..self.names.len() {
                out.push_str(if self.cells.get(i, j) { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

/// Parses the SSIM CSV: header `,name1,name2,...`, then one `name,cell,...`
/// row per element with cells `0` or `1`.
pub fn load_ssim(csv: &str) -> Result<SsimMatrix, IsmError> {
    let mut lines = csv
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| IsmError::NonSquare("empty input".into()))?;
    let mut head = header.split(',').map(str::trim);
    if head.next().is_some_and(|c| !c.is_empty()) {
        return Err(IsmError::NonSquare("header must start with an empty cell".into()));
    }
    let names: Vec<String> = head.map(str::to_string).collect();
    check_unique(&names)?;
    let n = names.len();

    let mut cells = BoolMatrix::new(n);
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        if i >= n {
            return Err(IsmError::NonSquare(format!("more than {n} data rows")));
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n + 1 {
            return Err(IsmError::NonSquare(format!(
                "row {} has {} cells, expected {n}",
                i + 1,
                fields.len().saturating_sub(1)
            )));
        }
        if fields[0] != names[i] {
            return Err(IsmError::RowNameMismatch {
                row: i + 1,
                expected: names[i].clone(),
                found: fields[0].to_string(),
            });
        }
        for (j, v) in fields[1..].iter().enumerate() {
            match *v {
                "0" => {}
                "1" => cells.set(i, j, true),
                other => {
                    return Err(IsmError::BadCell {
                        row: i + 1,
                        col: j + 1,
                        value: other.to_string(),
                    })
                }
            }
        }
        rows += 1;
    }
    if rows != n {
        return Err(IsmError::NonSquare(format!("{n} columns but {rows} data rows")));
    }
    SsimMatrix::new(names, cells)
}

/// Reflexive, transitive relation: `cells[i][j]` is set when `j` is
/// reachable from `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityMatrix {
    pub names: Vec<String>,
    pub cells: BoolMatrix,
}

impl ReachabilityMatrix {
    /// Wraps a matrix after checking it is reflexive and transitive.
    pub fn new(names: Vec<String>, cells: BoolMatrix) -> Result<Self, IsmError> {
        if names.len() != cells.size() {
            return Err(IsmError::NonSquare(format!(
                "{} names for a {}x{} matrix",
                names.len(),
                cells.size(),
                cells.size()
            )));
        }
        check_unique(&names)?;
        for i in 0..names.len() {
            if !cells.get(i, i) {
                return Err(IsmError::NotReachability(format!("diagonal unset at `{}`", names[i])));
            }
        }
        if !cells.mul(&cells).le(&cells) {
            return Err(IsmError::NotReachability("relation is not transitive".into()));
        }
        Ok(ReachabilityMatrix { names, cells })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn reaches(&self, i: usize, j: usize) -> bool {
        self.cells.get(i, j)
    }

    /// Reachability set R, antecedent set A and their intersection for
    /// every element over the full matrix.
    pub fn table(&self) -> Vec<RacRow> {
        let all: Vec<usize> = (0..self.len()).collect();
        all.iter().map(|&i| self.rac(i, &all)).collect()
    }

    fn rac(&self, i: usize, within: &[usize]) -> RacRow {
        let reach: Vec<usize> = within.iter().copied().filter(|&j| self.reaches(i, j)).collect();
        let ante: Vec<usize> = within.iter().copied().filter(|&j| self.reaches(j, i)).collect();
        let inter: Vec<usize> = reach.iter().copied().filter(|j| ante.contains(j)).collect();
        let names = |v: &[usize]| v.iter().map(|&k| self.names[k].clone()).collect();
        RacRow {
            element: self.names[i].clone(),
            reachability: names(&reach),
            antecedent: names(&ante),
            intersection: names(&inter),
        }
    }
}

/// One row of the reachability / antecedent / intersection table. Sets are
/// listed in matrix order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RacRow {
    pub element: String,
    pub reachability: Vec<String>,
    pub antecedent: Vec<String>,
    pub intersection: Vec<String>,
}

/// `M = I ∨ S ∨ S² ∨ …`, by repeated Boolean squaring until nothing changes.
pub fn reachability(ssim: &SsimMatrix) -> ReachabilityMatrix {
    let mut m = ssim.cells.or(&BoolMatrix::identity(ssim.names.len()));
    loop {
        let next = m.or(&m.mul(&m));
        if next == m {
            break;
        }
        m = next;
    }
    ReachabilityMatrix {
        names: ssim.names.clone(),
        cells: m,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Extract elements whose reachability set equals the intersection
    /// (the dependents) first.
    TopLevelFirst,
    /// Extract elements whose antecedent set equals the intersection (the
    /// drivers) first.
    #[default]
    DriverFirst,
}

impl FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top" => Ok(Orientation::TopLevelFirst),
            "driver" => Ok(Orientation::DriverFirst),
            other => Err(format!("unknown orientation `{other}` (top|driver)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelPartition {
    pub orientation: Orientation,
    /// Levels in extraction order; names inside a level follow matrix order.
    pub levels: Vec<Vec<String>>,
    /// Sets over the full matrix.
    pub table: Vec<RacRow>,
    /// Sets restricted to the elements still present when each element was
    /// extracted, in matrix order.
    pub at_extraction: Vec<RacRow>,
}

impl LevelPartition {
    /// Zero-based level index of `name`.
    pub fn level_of(&self, name: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.iter().any(|n| n == name))
    }
}

pub fn level_partition(
    m: &ReachabilityMatrix,
    orientation: Orientation,
) -> Result<LevelPartition, IsmError> {
    let mut remaining: Vec<usize> = (0..m.len()).collect();
    let mut levels = Vec::new();
    let mut at_extraction: Vec<Option<RacRow>> = vec![None; m.len()];
    while !remaining.is_empty() {
        let mut picked = Vec::new();
        for &i in &remaining {
            let row = m.rac(i, &remaining);
            let hit = match orientation {
                Orientation::TopLevelFirst => row.intersection == row.reachability,
                Orientation::DriverFirst => row.intersection == row.antecedent,
            };
            if hit {
                picked.push(i);
                at_extraction[i] = Some(row);
            }
        }
        if picked.is_empty() {
            return Err(IsmError::NoProgress(remaining.len()));
        }
        remaining.retain(|i| !picked.contains(i));
        levels.push(picked.iter().map(|&i| m.names[i].clone()).collect());
    }
    Ok(LevelPartition {
        orientation,
        levels,
        table: m.table(),
        at_extraction: at_extraction.into_iter().map(|r| r.unwrap()).collect(),
    })
}

/// Transitive skeleton of a reachability matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsmDag {
    pub names: Vec<String>,
    /// Direct edges, sorted by (from, to).
    pub edges: Vec<(String, String)>,
    /// Strongly connected components with more than one member; their
    /// members reach each other and share incoming and outgoing edges.
    pub components: Vec<Vec<String>>,
    /// Zero-based driver-first level of each name, parallel to `names`.
    pub levels: Vec<usize>,
}

/// SCC condensation followed by transitive reduction. Each condensed edge
/// is expanded to every (source member, target member) pair.
pub fn skeleton(m: &ReachabilityMatrix) -> Result<IsmDag, IsmError> {
    let n = m.len();
    // In a transitive relation, mutual reachability is the SCC relation.
    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if comp_of[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (i..n).filter(|&j| m.reaches(i, j) && m.reaches(j, i)).collect();
        for &j in &members {
            comp_of[j] = comps.len();
        }
        comps.push(members);
    }
    let rep = |c: usize| comps[c][0];
    let k = comps.len();
    let mut edges = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if a == b || !m.reaches(rep(a), rep(b)) {
                continue;
            }
            let implied = (0..k).any(|c| {
                c != a && c != b && m.reaches(rep(a), rep(c)) && m.reaches(rep(c), rep(b))
            });
            if !implied {
                for &i in &comps[a] {
                    for &j in &comps[b] {
                        edges.push((m.names[i].clone(), m.names[j].clone()));
                    }
                }
            }
        }
    }
    edges.sort();

    let partition = level_partition(m, Orientation::DriverFirst)?;
    let levels = m
        .names
        .iter()
        .map(|name| partition.level_of(name).expect("partition covers all names"))
        .collect();
    let components = comps
        .iter()
        .filter(|c| c.len() > 1)
        .map(|c| c.iter().map(|&i| m.names[i].clone()).collect())
        .collect();

    Ok(IsmDag {
        names: m.names.clone(),
        edges,
        components,
        levels,
    })
}

fn dot_id(s: &str) -> String {
    let plain = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

/// Deterministic Graphviz rendering with one same-rank group per level.
pub fn export_dot(dag: &IsmDag) -> String {
    if dag.names.is_empty() {
        return "digraph ism { }\n".to_string();
    }
    let mut out = String::from("digraph ism {\n");
    let depth = dag.levels.iter().copied().max().map_or(0, |d| d + 1);
    for level in 0..depth {
        let mut members: Vec<&str> = dag
            .names
            .iter()
            .zip(&dag.levels)
            .filter(|(_, &l)| l == level)
            .map(|(n, _)| n.as_str())
            .collect();
        members.sort_unstable();
        let _ = write!(out, "  subgraph level_{} {{ rank=same;", level + 1);
        for m in members {
            let _ = write!(out, " {};", dot_id(m));
        }
        out.push_str(" }\n");
    }
    for (a, b) in &dag.edges {
        let _ = writeln!(out, "  {} -> {};", dot_id(a), dot_id(b));
    }
    out.push_str("}\n");
    out
}
