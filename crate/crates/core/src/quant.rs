//! Minimal cut sets, top-event probability and Fussell-Vesely importance.
//!
//! Cut sets come from top-down gate substitution: an OR gate splits a row
//! into one row per child, an AND gate extends the row with all of its
//! children. Finished rows are de-duplicated and absorbed (any row that is a
//! superset of another is dropped).
//!
//! [`brute_force_fv`] is an independent check that enumerates every event
//! state and never touches the substitution code.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ftree::{FaultTree, GateOp, Node};

/// Default cap on intermediate substitution rows.
pub const DEFAULT_ROW_CAP: usize = 1_000_000;
/// Largest cut-set list accepted by inclusion-exclusion.
pub const EXACT_MAX_CUTS: usize = 20;
/// Largest event count accepted by state enumeration.
pub const BRUTE_FORCE_MAX_EVENTS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error("cut-set expansion exceeded {cap} intermediate rows")]
    CombinatorialLimit { cap: usize },
    #[error("exact quantification needs at most {EXACT_MAX_CUTS} cut sets, got {0}")]
    ExactTooLarge(usize),
    #[error("enumeration needs at most {BRUTE_FORCE_MAX_EVENTS} events, got {0}")]
    TooManyEvents(usize),
    #[error("no probability given for event `{0}`")]
    MissingProbability(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Sum of cut-set probabilities.
    RareEvent,
    /// Min-cut upper bound, `1 - prod(1 - Q_k)`.
    #[default]
    Mcub,
    /// Inclusion-exclusion over the cut sets.
    Exact,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::RareEvent => "rare",
            Method::Mcub => "mcub",
            Method::Exact => "exact",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rare" => Ok(Method::RareEvent),
            "mcub" => Ok(Method::Mcub),
            "exact" => Ok(Method::Exact),
            other => Err(format!("unknown method `{other}` (rare|mcub|exact)")),
        }
    }
}

/// A set of basic events, names sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CutSet {
    pub events: Vec<String>,
}

impl CutSet {
    pub fn new<I, S>(events: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut events: Vec<String> = events.into_iter().map(Into::into).collect();
        events.sort();
        events.dedup();
        CutSet { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.events.binary_search_by(|e| e.as_str().cmp(name)).is_ok()
    }

    /// Product of member probabilities.
    pub fn probability(&self, q: &BTreeMap<String, f64>) -> Result<f64, QuantError> {
        self.events.iter().try_fold(1.0, |acc, e| {
            q.get(e)
                .map(|p| acc * p)
                .ok_or_else(|| QuantError::MissingProbability(e.clone()))
        })
    }
}

impl fmt::Display for CutSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.events.join(" "))
    }
}

/// Minimal cut sets ordered by (size, names), with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSetList {
    pub sets: Vec<CutSet>,
    pub probabilities: Vec<f64>,
}

impl CutSetList {
    /// Builds a list from arbitrary sets, applying absorption and ordering.
    pub fn from_sets(sets: Vec<CutSet>, q: &BTreeMap<String, f64>) -> Result<Self, QuantError> {
        let sets = minimize(sets);
        let probabilities = sets
            .iter()
            .map(|s| s.probability(q))
            .collect::<Result<_, _>>()?;
        Ok(CutSetList { sets, probabilities })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Recomputes the per-set probabilities for a new probability map.
    pub fn with_probabilities(&self, q: &BTreeMap<String, f64>) -> Result<Self, QuantError> {
        let probabilities = self
            .sets
            .iter()
            .map(|s| s.probability(q))
            .collect::<Result<_, _>>()?;
        Ok(CutSetList {
            sets: self.sets.clone(),
            probabilities,
        })
    }

    /// The sub-list of sets that contain `event`.
    pub fn containing(&self, event: &str) -> CutSetList {
        let (sets, probabilities) = self
            .sets
            .iter()
            .zip(&self.probabilities)
            .filter(|(s, _)| s.contains(event))
            .map(|(s, p)| (s.clone(), *p))
            .unzip();
        CutSetList { sets, probabilities }
    }
}

fn is_subset(a: &[String], b: &[String]) -> bool {
    // both sorted
    let mut it = b.iter();
    a.iter().all(|x| it.by_ref().any(|y| y == x))
}

fn minimize(mut sets: Vec<CutSet>) -> Vec<CutSet> {
    sets.retain(|s| !s.is_empty());
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.events.cmp(&b.events)));
    sets.dedup();
    let mut kept: Vec<CutSet> = Vec::with_capacity(sets.len());
    for s in sets {
        if !kept.iter().any(|k| is_subset(&k.events, &s.events)) {
            kept.push(s);
        }
    }
    kept
}

#[derive(Clone)]
struct Row {
    events: Vec<usize>,
    pending: Vec<usize>,
}

impl Row {
    fn add(&mut self, n: Node) {
        match n {
            Node::Event(i) => {
                if let Err(pos) = self.events.binary_search(&i) {
                    self.events.insert(pos, i);
                }
            }
            Node::Gate(g) => {
                if !self.pending.contains(&g) {
                    self.pending.push(g);
                }
            }
        }
    }
}

/// Minimal cut sets of the top gate, optionally truncated to sets of at
/// most `max_order` events. Probabilities use the tree's own parameters.
pub fn minimal_cut_sets(
    tree: &FaultTree,
    max_order: Option<usize>,
) -> Result<CutSetList, QuantError> {
    minimal_cut_sets_capped(tree, max_order, DEFAULT_ROW_CAP)
}

pub fn minimal_cut_sets_capped(
    tree: &FaultTree,
    max_order: Option<usize>,
    cap: usize,
) -> Result<CutSetList, QuantError> {
    let limit = max_order.unwrap_or(usize::MAX);
    let mut stack = vec![Row {
        events: Vec::new(),
        pending: vec![tree.top()],
    }];
    let mut finished: Vec<Vec<usize>> = Vec::new();

    while let Some(mut row) = stack.pop() {
        let Some(g) = row.pending.pop() else {
            finished.push(row.events);
            continue;
        };
        let children = tree.children(g);
        match tree.gates()[g].op {
            GateOp::And => {
                for &c in children {
                    row.add(c);
                }
                if row.events.len() <= limit {
                    stack.push(row);
                }
            }
            GateOp::Or => {
                for &c in children {
                    let mut branch = row.clone();
                    branch.add(c);
                    if branch.events.len() <= limit {
                        stack.push(branch);
                    }
                }
            }
        }
        if stack.len() + finished.len() > cap {
            return Err(QuantError::CombinatorialLimit { cap });
        }
    }

    let names = tree.event_names();
    let sets = finished
        .into_iter()
        .map(|r| CutSet::new(r.into_iter().map(|i| names[i].clone())))
        .collect();
    CutSetList::from_sets(sets, &tree.probabilities())
}

fn set_probabilities(cuts: &CutSetList, q: &BTreeMap<String, f64>) -> Result<Vec<f64>, QuantError> {
    cuts.sets.iter().map(|s| s.probability(q)).collect()
}

/// Top-event probability from cut sets under `method`.
pub fn top_probability(
    cuts: &CutSetList,
    q: &BTreeMap<String, f64>,
    method: Method,
) -> Result<f64, QuantError> {
    match method {
        Method::RareEvent => Ok(set_probabilities(cuts, q)?.iter().sum()),
        Method::Mcub => {
            // In log space so tiny cut-set probabilities do not cancel to 0.
            let log_survive: f64 = set_probabilities(cuts, q)?.iter().map(|p| (-p).ln_1p()).sum();
            Ok((-log_survive.exp_m1()).clamp(0.0, 1.0))
        }
        Method::Exact => inclusion_exclusion(cuts, q),
    }
}

fn inclusion_exclusion(cuts: &CutSetList, q: &BTreeMap<String, f64>) -> Result<f64, QuantError> {
    if cuts.len() > EXACT_MAX_CUTS {
        return Err(QuantError::ExactTooLarge(cuts.len()));
    }
    // Index the event universe so unions are bitmasks.
    let mut universe: Vec<&str> = cuts
        .sets
        .iter()
        .flat_map(|s| s.events.iter().map(String::as_str))
        .collect();
    universe.sort_unstable();
    universe.dedup();
    let probs: Vec<f64> = universe
        .iter()
        .map(|e| {
            q.get(*e)
                .copied()
                .ok_or_else(|| QuantError::MissingProbability(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let words = universe.len().div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = cuts
        .sets
        .iter()
        .map(|s| {
            let mut m = vec![0u64; words];
            for e in &s.events {
                let i = universe.binary_search(&e.as_str()).unwrap();
                m[i / 64] |= 1 << (i % 64);
            }
            m
        })
        .collect();

    fn product(mask: &[u64], probs: &[f64]) -> f64 {
        let mut p = 1.0;
        for (w, &bits) in mask.iter().enumerate() {
            let mut b = bits;
            while b != 0 {
                let t = b.trailing_zeros() as usize;
                p *= probs[w * 64 + t];
                b &= b - 1;
            }
        }
        p
    }

    fn recurse(start: usize, union: &[u64], depth: usize, masks: &[Vec<u64>], probs: &[f64]) -> f64 {
        let mut total = 0.0;
        for k in start..masks.len() {
            let next: Vec<u64> = union.iter().zip(&masks[k]).map(|(a, b)| a | b).collect();
            let sign = if depth % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * product(&next, probs);
            total += recurse(k + 1, &next, depth + 1, masks, probs);
        }
        total
    }

    let empty = vec![0u64; words];
    Ok(recurse(0, &empty, 0, &masks, &probs).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvEntry {
    pub event: String,
    pub probability: f64,
    pub fv_cutset: f64,
    pub fv_exact: f64,
}

/// Fussell-Vesely importance of each non-frequency basic event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvResult {
    pub entries: Vec<FvEntry>,
    pub top_probability: f64,
    pub method: Method,
}

impl FvResult {
    pub fn get(&self, event: &str) -> Option<&FvEntry> {
        self.entries.iter().find(|e| e.event == event)
    }

    pub fn fv_cutset_map(&self) -> BTreeMap<String, f64> {
        self.entries
            .iter()
            .map(|e| (e.event.clone(), e.fv_cutset))
            .collect()
    }

    /// Entries ordered by `fv_cutset` descending, name ascending on ties.
    pub fn ranked(&self) -> Vec<&FvEntry> {
        let mut v: Vec<&FvEntry> = self.entries.iter().collect();
        v.sort_by(|a, b| {
            b.fv_cutset
                .total_cmp(&a.fv_cutset)
                .then_with(|| a.event.cmp(&b.event))
        });
        v
    }
}

/// FV importance computed from the tree's minimal cut sets.
pub fn fv_importance(
    tree: &FaultTree,
    q: &BTreeMap<String, f64>,
    method: Method,
) -> Result<FvResult, QuantError> {
    let cuts = minimal_cut_sets(tree, None)?;
    fv_from_cuts(tree, &cuts, q, method)
}

/// FV importance from precomputed cut sets, for callers that quantify the
/// same tree under many probability maps.
pub fn fv_from_cuts(
    tree: &FaultTree,
    cuts: &CutSetList,
    q: &BTreeMap<String, f64>,
    method: Method,
) -> Result<FvResult, QuantError> {
    for e in tree.events() {
        if !q.contains_key(&e.name) {
            return Err(QuantError::MissingProbability(e.name.clone()));
        }
    }
    let top = top_probability(cuts, q, method)?;
    let top_mcub = if method == Method::Mcub {
        top
    } else {
        top_probability(cuts, q, Method::Mcub)?
    };

    let mut entries = Vec::new();
    for e in tree.events().iter().filter(|e| !e.param.is_frequency()) {
        let qi = q[&e.name];
        let (fv_cutset, fv_exact) = if top <= 0.0 {
            (0.0, 0.0)
        } else {
            let sub = cuts.containing(&e.name);
            let fv_cutset = if sub.is_empty() {
                0.0
            } else {
                (top_probability(&sub, q, method)? / top).clamp(0.0, 1.0)
            };
            let fv_exact = if sub.is_empty() || top_mcub <= 0.0 {
                0.0
            } else {
                let mut zeroed = q.clone();
                zeroed.insert(e.name.clone(), 0.0);
                let reduced = top_probability(cuts, &zeroed, Method::Mcub)?;
                (1.0 - reduced / top_mcub).clamp(0.0, 1.0)
            };
            (fv_cutset, fv_exact)
        };
        entries.push(FvEntry {
            event: e.name.clone(),
            probability: qi,
            fv_cutset,
            fv_exact,
        });
    }
    Ok(FvResult {
        entries,
        top_probability: top,
        method,
    })
}

/// Exhaustive-enumeration oracle. Minimal cut sets are derived from the
/// structure function directly: a failing state is minimal when clearing
/// any one of its failed events makes the top event succeed.
///
/// `fv_cutset` holds P(some minimal cut set containing the event is fully
/// failed) / P(top); `fv_exact` holds `1 - P(top | q_i = 0) / P(top)`.
pub fn brute_force_fv(tree: &FaultTree, q: &BTreeMap<String, f64>) -> Result<FvResult, QuantError> {
    let n = tree.events().len();
    if n > BRUTE_FORCE_MAX_EVENTS {
        return Err(QuantError::TooManyEvents(n));
    }
    let probs: Vec<f64> = tree
        .events()
        .iter()
        .map(|e| {
            q.get(&e.name)
                .copied()
                .ok_or_else(|| QuantError::MissingProbability(e.name.clone()))
        })
        .collect::<Result<_, _>>()?;

    let states = 1usize << n;
    let mut fails = vec![false; states];
    let mut bits = vec![false; n];
    for (s, f) in fails.iter_mut().enumerate() {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = s >> i & 1 == 1;
        }
        *f = tree.evaluate(&bits);
    }
    let minimal: Vec<usize> = (0..states)
        .filter(|&s| fails[s] && (0..n).all(|i| s >> i & 1 == 0 || !fails[s & !(1 << i)]))
        .collect();

    let weight = |s: usize, zero: Option<usize>| -> f64 {
        (0..n)
            .map(|i| {
                let p = if Some(i) == zero { 0.0 } else { probs[i] };
                if s >> i & 1 == 1 {
                    p
                } else {
                    1.0 - p
                }
            })
            .product()
    };

    // Fixed ascending state order keeps the summation reproducible.
    let mut top = 0.0;
    let mut per_event = vec![0.0; n];
    let mut without = vec![0.0; n];
    let containing: Vec<Vec<usize>> = (0..n)
        .map(|i| minimal.iter().copied().filter(|m| m >> i & 1 == 1).collect())
        .collect();
    for s in 0..states {
        if !fails[s] {
            continue;
        }
        let w = weight(s, None);
        top += w;
        for i in 0..n {
            if containing[i].iter().any(|&m| m & s == m) {
                per_event[i] += w;
            }
            if s >> i & 1 == 0 {
                without[i] += weight(s, Some(i));
            }
        }
    }

    let entries = tree
        .events()
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.param.is_frequency())
        .map(|(i, e)| {
            let (fv_cutset, fv_exact) = if top > 0.0 {
                (
                    (per_event[i] / top).clamp(0.0, 1.0),
                    (1.0 - without[i] / top).clamp(0.0, 1.0),
                )
            } else {
                (0.0, 0.0)
            };
            FvEntry {
                event: e.name.clone(),
                probability: probs[i],
                fv_cutset,
                fv_exact,
            }
        })
        .collect();
    Ok(FvResult {
        entries,
        top_probability: top,
        method: Method::Exact,
    })
}
