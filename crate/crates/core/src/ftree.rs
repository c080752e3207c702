//! Fault-tree data model, the line-oriented text format, and conversion of
//! reliability parameters into basic-event unavailabilities.
//!
//! The text format is one statement per line:
//!
//! ```text
//! # comment
//! event PUMP-A-FS prob=5.0E-5
//! event PUMP-A-FR rate=1e-6 mission=24
//! event CCF-PUMPS beta=0.05 of=PUMP-A-FR
//! gate PUMP-A OR PUMP-A-FS PUMP-A-FR
//! gate TOP OR PUMP-A CCF-PUMPS
//! top TOP
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mission time applied to `rate=` events that omit `mission=`.
pub const DEFAULT_MISSION_HOURS: f64 = 24.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FtreeError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unresolved reference `{0}`")]
    UnresolvedReference(String),
    #[error("gate cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("no `top` statement")]
    MissingTop,
    #[error("invalid parameter for `{name}`: {message}")]
    InvalidParameter { name: String, message: String },
}

/// Reliability model of a basic event. Rates are per hour, times in hours,
/// frequencies per year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReliabilityParam {
    Probability { p: f64 },
    FailureRate { rate: f64, mission: f64 },
    Tested { rate: f64, tau: f64 },
    Repairable { rate: f64, mttr: f64 },
    Frequency { freq: f64 },
    CcfBeta { beta: f64, of: String },
}

impl ReliabilityParam {
    pub fn is_frequency(&self) -> bool {
        matches!(self, ReliabilityParam::Frequency { .. })
    }

    pub fn is_ccf(&self) -> bool {
        matches!(self, ReliabilityParam::CcfBeta { .. })
    }

    /// Numeric fields in a fixed order, paired with whether the field is
    /// capped at 1.
    pub fn numeric_fields(&self) -> Vec<(f64, bool)> {
        use ReliabilityParam::*;
        match self {
            Probability { p } => vec![(*p, true)],
            FailureRate { rate, mission } => vec![(*rate, false), (*mission, false)],
            Tested { rate, tau } => vec![(*rate, false), (*tau, false)],
            Repairable { rate, mttr } => vec![(*rate, false), (*mttr, false)],
            Frequency { freq } => vec![(*freq, false)],
            CcfBeta { beta, .. } => vec![(*beta, true)],
        }
    }

    /// Returns a copy with every numeric field replaced through `f`, which
    /// receives the field index, its value, and whether it is capped at 1.
    pub fn map_numeric(&self, mut f: impl FnMut(usize, f64, bool) -> f64) -> Self {
        use ReliabilityParam::*;
        match self {
            Probability { p } => Probability { p: f(0, *p, true) },
            FailureRate { rate, mission } => FailureRate {
                rate: f(0, *rate, false),
                mission: f(1, *mission, false),
            },
            Tested { rate, tau } => Tested {
                rate: f(0, *rate, false),
                tau: f(1, *tau, false),
            },
            Repairable { rate, mttr } => Repairable {
                rate: f(0, *rate, false),
                mttr: f(1, *mttr, false),
            },
            Frequency { freq } => Frequency {
                freq: f(0, *freq, false),
            },
            CcfBeta { beta, of } => CcfBeta {
                beta: f(0, *beta, true),
                of: of.clone(),
            },
        }
    }

    fn check(&self, name: &str) -> Result<(), FtreeError> {
        for (v, capped) in self.numeric_fields() {
            if !v.is_finite() || v < 0.0 {
                return Err(FtreeError::InvalidParameter {
                    name: name.to_string(),
                    message: format!("value {v} must be finite and non-negative"),
                });
            }
            if capped && v > 1.0 {
                return Err(FtreeError::InvalidParameter {
                    name: name.to_string(),
                    message: format!("value {v} exceeds 1"),
                });
            }
        }
        Ok(())
    }

    /// Unavailability of a parameter that does not depend on another event.
    /// `CcfBeta` needs the referenced event and yields `None` here.
    pub fn standalone_unavailability(&self) -> Option<f64> {
        use ReliabilityParam::*;
        let q = match self {
            Probability { p } => *p,
            FailureRate { rate, mission } => -(-rate * mission).exp_m1(),
            Tested { rate, tau } => (rate * tau / 2.0).min(1.0),
            Repairable { rate, mttr } => {
                let x = rate * mttr;
                x / (1.0 + x)
            }
            // Initiating-event frequencies scale the sequence, they are
            // certain given the demand.
            Frequency { .. } => 1.0,
            CcfBeta { .. } => return None,
        };
        Some(q.clamp(0.0, 1.0))
    }
}

/// Unavailability of `param`, resolving a beta-factor reference through
/// `lookup`. Returns `None` only when a reference cannot be resolved.
pub fn unavailability<'a>(
    param: &ReliabilityParam,
    lookup: impl Fn(&str) -> Option<&'a ReliabilityParam>,
) -> Option<f64> {
    match param {
        ReliabilityParam::CcfBeta { beta, of } => {
            let base = lookup(of)?.standalone_unavailability()?;
            Some((beta * base).clamp(0.0, 1.0))
        }
        other => other.standalone_unavailability(),
    }
}

/// Unavailability of every event in a name → parameter map.
pub fn unavailabilities(
    params: &BTreeMap<String, ReliabilityParam>,
) -> Result<BTreeMap<String, f64>, FtreeError> {
    params
        .iter()
        .map(|(name, p)| {
            unavailability(p, |n| params.get(n))
                .map(|q| (name.clone(), q))
                .ok_or_else(|| match p {
                    ReliabilityParam::CcfBeta { of, .. } => {
                        FtreeError::UnresolvedReference(of.clone())
                    }
                    _ => FtreeError::UnresolvedReference(name.clone()),
                })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicEvent {
    pub name: String,
    pub param: ReliabilityParam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateOp {
    And,
    Or,
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateOp::And => f.write_str("AND"),
            GateOp::Or => f.write_str("OR"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub op: GateOp,
    pub children: Vec<String>,
}

/// Resolved child of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Event(usize),
    Gate(usize),
}

/// A validated, coherent AND/OR fault tree. Immutable once built.
#[derive(Debug, Clone)]
pub struct FaultTree {
    events: Vec<BasicEvent>,
    gates: Vec<Gate>,
    top: usize,
    resolved: Vec<Vec<Node>>,
}

impl PartialEq for FaultTree {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
            && self.gates == other.gates
            && self.top_name() == other.top_name()
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl FaultTree {
    /// Validates the parts and builds the tree.
    pub fn new(events: Vec<BasicEvent>, gates: Vec<Gate>, top: &str) -> Result<Self, FtreeError> {
        let mut names: HashMap<&str, Node> = HashMap::new();
        for (i, e) in events.iter().enumerate() {
            if !valid_name(&e.name) {
                return Err(FtreeError::InvalidParameter {
                    name: e.name.clone(),
                    message: "names must match [A-Za-z0-9_-]+".into(),
                });
            }
            if names.insert(&e.name, Node::Event(i)).is_some() {
                return Err(FtreeError::DuplicateName(e.name.clone()));
            }
        }
        for (i, g) in gates.iter().enumerate() {
            if !valid_name(&g.name) {
                return Err(FtreeError::InvalidParameter {
                    name: g.name.clone(),
                    message: "names must match [A-Za-z0-9_-]+".into(),
                });
            }
            if names.insert(&g.name, Node::Gate(i)).is_some() {
                return Err(FtreeError::DuplicateName(g.name.clone()));
            }
        }

        for e in &events {
            e.param.check(&e.name)?;
            if let ReliabilityParam::CcfBeta { of, .. } = &e.param {
                match names.get(of.as_str()) {
                    Some(Node::Event(j)) if !events[*j].param.is_ccf() => {}
                    Some(_) => {
                        return Err(FtreeError::InvalidParameter {
                            name: e.name.clone(),
                            message: format!("`of={of}` must name a non-CCF basic event"),
                        })
                    }
                    None => return Err(FtreeError::UnresolvedReference(of.clone())),
                }
            }
        }

        let mut resolved = Vec::with_capacity(gates.len());
        for g in &gates {
            if g.children.is_empty() {
                return Err(FtreeError::InvalidParameter {
                    name: g.name.clone(),
                    message: "gate needs at least one child".into(),
                });
            }
            let mut kids = Vec::with_capacity(g.children.len());
            for c in &g.children {
                kids.push(
                    *names
                        .get(c.as_str())
                        .ok_or_else(|| FtreeError::UnresolvedReference(c.clone()))?,
                );
            }
            resolved.push(kids);
        }

        let top = match names.get(top) {
            Some(Node::Gate(i)) => *i,
            Some(Node::Event(_)) => {
                return Err(FtreeError::InvalidParameter {
                    name: top.to_string(),
                    message: "top must name a gate".into(),
                })
            }
            None => return Err(FtreeError::UnresolvedReference(top.to_string())),
        };

        if let Some(cycle) = find_cycle(&gates, &resolved) {
            return Err(FtreeError::CycleDetected(cycle));
        }

        Ok(FaultTree {
            events,
            gates,
            top,
            resolved,
        })
    }

    pub fn events(&self) -> &[BasicEvent] {
        &self.events
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn top_name(&self) -> &str {
        &self.gates[self.top].name
    }

    pub fn event_names(&self) -> Vec<String> {
        self.events.iter().map(|e| e.name.clone()).collect()
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e.name == name)
    }

    pub fn event(&self, name: &str) -> Option<&BasicEvent> {
        self.events.iter().find(|e| e.name == name)
    }

    /// Resolved children of gate `g`.
    pub fn children(&self, g: usize) -> &[Node] {
        &self.resolved[g]
    }

    pub fn params(&self) -> BTreeMap<String, ReliabilityParam> {
        self.events
            .iter()
            .map(|e| (e.name.clone(), e.param.clone()))
            .collect()
    }

    /// Unavailability of every basic event under its declared parameters.
    pub fn probabilities(&self) -> BTreeMap<String, f64> {
        unavailabilities(&self.params()).expect("references validated at construction")
    }

    /// Events not reachable from the top gate.
    pub fn unreachable_events(&self) -> Vec<String> {
        let mut seen_gate = vec![false; self.gates.len()];
        let mut seen_event = vec![false; self.events.len()];
        let mut stack = vec![self.top];
        seen_gate[self.top] = true;
        while let Some(g) = stack.pop() {
            for n in &self.resolved[g] {
                match *n {
                    Node::Event(i) => seen_event[i] = true,
                    Node::Gate(j) => {
                        if !seen_gate[j] {
                            seen_gate[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        self.events
            .iter()
            .zip(seen_event)
            .filter(|(_, s)| !s)
            .map(|(e, _)| e.name.clone())
            .collect()
    }

    /// Evaluates the top gate for a Boolean state per event index.
    pub fn evaluate(&self, state: &[bool]) -> bool {
        let mut memo = vec![None; self.gates.len()];
        self.eval_gate(self.top, state, &mut memo)
    }

    fn eval_gate(&self, g: usize, state: &[bool], memo: &mut [Option<bool>]) -> bool {
        if let Some(v) = memo[g] {
            return v;
        }
        let value = |n: &Node, memo: &mut [Option<bool>]| match *n {
            Node::Event(i) => state[i],
            Node::Gate(j) => self.eval_gate(j, state, memo),
        };
        let v = match self.gates[g].op {
            GateOp::And => self.resolved[g].iter().all(|n| value(n, memo)),
            GateOp::Or => self.resolved[g].iter().any(|n| value(n, memo)),
        };
        memo[g] = Some(v);
        v
    }

    /// Canonical text form; `parse_fault_tree(&t.render())` reproduces `t`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str("event ");
            out.push_str(&e.name);
            out.push(' ');
            out.push_str(&render_param(&e.param));
            out.push('\n');
        }
        for g in &self.gates {
            out.push_str(&format!("gate {} {}", g.name, g.op));
            for c in &g.children {
                out.push(' ');
                out.push_str(c);
            }
            out.push('\n');
        }
        out.push_str(&format!("top {}\n", self.top_name()));
        out
    }
}

fn render_param(p: &ReliabilityParam) -> String {
    use ReliabilityParam::*;
    match p {
        Probability { p } => format!("prob={p:e}"),
        FailureRate { rate, mission } => format!("rate={rate:e} mission={mission:e}"),
        Tested { rate, tau } => format!("rate={rate:e} tau={tau:e}"),
        Repairable { rate, mttr } => format!("rate={rate:e} mttr={mttr:e}"),
        Frequency { freq } => format!("freq={freq:e}"),
        CcfBeta { beta, of } => format!("beta={beta:e} of={of}"),
    }
}

fn find_cycle(gates: &[Gate], resolved: &[Vec<Node>]) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        g: usize,
        resolved: &[Vec<Node>],
        marks: &mut [Mark],
        path: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        marks[g] = Mark::Active;
        path.push(g);
        for n in &resolved[g] {
            if let Node::Gate(j) = *n {
                match marks[j] {
                    Mark::Active => {
                        let start = path.iter().position(|&p| p == j).unwrap();
                        let mut cyc = path[start..].to_vec();
                        cyc.push(j);
                        return Some(cyc);
                    }
                    Mark::New => {
                        if let Some(c) = visit(j, resolved, marks, path) {
                            return Some(c);
                        }
                    }
                    Mark::Done => {}
                }
            }
        }
        path.pop();
        marks[g] = Mark::Done;
        None
    }

    let mut marks = vec![Mark::New; gates.len()];
    for g in 0..gates.len() {
        if marks[g] == Mark::New {
            let mut path = Vec::new();
            if let Some(c) = visit(g, resolved, &mut marks, &mut path) {
                return Some(c.into_iter().map(|i| gates[i].name.clone()).collect());
            }
        }
    }
    None
}

fn parse_float(line: usize, key: &str, v: &str) -> Result<f64, FtreeError> {
    v.parse::<f64>().map_err(|_| FtreeError::Syntax {
        line,
        message: format!("`{key}` expects a number, got `{v}`"),
    })
}

fn parse_event(line: usize, tokens: &[&str]) -> Result<BasicEvent, FtreeError> {
    let syntax = |message: String| FtreeError::Syntax { line, message };
    let name = tokens
        .first()
        .ok_or_else(|| syntax("`event` needs a name".into()))?;
    if !valid_name(name) {
        return Err(syntax(format!("invalid name `{name}`")));
    }
    let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
    for t in &tokens[1..] {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected key=value, got `{t}`")))?;
        if kv.insert(k, v).is_some() {
            return Err(syntax(format!("repeated key `{k}`")));
        }
    }
    let num = |k: &str| parse_float(line, k, kv[k]);
    let keys: Vec<&str> = kv.keys().copied().collect();
    let param = match keys.as_slice() {
        ["prob"] => ReliabilityParam::Probability { p: num("prob")? },
        ["rate"] => ReliabilityParam::FailureRate {
            rate: num("rate")?,
            mission: DEFAULT_MISSION_HOURS,
        },
        ["mission", "rate"] => ReliabilityParam::FailureRate {
            rate: num("rate")?,
            mission: num("mission")?,
        },
        ["rate", "tau"] => ReliabilityParam::Tested {
            rate: num("rate")?,
            tau: num("tau")?,
        },
        ["mttr", "rate"] => ReliabilityParam::Repairable {
            rate: num("rate")?,
            mttr: num("mttr")?,
        },
        ["freq"] => ReliabilityParam::Frequency { freq: num("freq")? },
        ["beta", "of"] => ReliabilityParam::CcfBeta {
            beta: num("beta")?,
            of: kv["of"].to_string(),
        },
        _ => {
            return Err(syntax(format!(
                "unrecognised parameter set {{{}}}",
                keys.join(", ")
            )))
        }
    };
    Ok(BasicEvent {
        name: name.to_string(),
        param,
    })
}

/// Parses and validates a fault tree in the text format.
pub fn parse_fault_tree(text: &str) -> Result<FaultTree, FtreeError> {
    let mut events = Vec::new();
    let mut gates = Vec::new();
    let mut top: Option<String> = None;
    let mut declared: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&kw, rest)) = tokens.split_first() else {
            continue;
        };
        let syntax = |message: String| FtreeError::Syntax { line, message };
        match kw {
            "event" => {
                let e = parse_event(line, rest)?;
                if !declared.insert(e.name.clone()) {
                    return Err(FtreeError::DuplicateName(e.name));
                }
                events.push(e);
            }
            "gate" => {
                if rest.len() < 3 {
                    return Err(syntax("`gate` needs a name, AND|OR and at least one child".into()));
                }
                let name = rest[0];
                if !valid_name(name) {
                    return Err(syntax(format!("invalid name `{name}`")));
                }
                let op = match rest[1] {
                    "AND" => GateOp::And,
                    "OR" => GateOp::Or,
                    other => return Err(syntax(format!("unknown gate type `{other}`"))),
                };
                if !declared.insert(name.to_string()) {
                    return Err(FtreeError::DuplicateName(name.to_string()));
                }
                gates.push(Gate {
                    name: name.to_string(),
                    op,
                    children: rest[2..].iter().map(|s| s.to_string()).collect(),
                });
            }
            "top" => {
                if rest.len() != 1 {
                    return Err(syntax("`top` takes exactly one name".into()));
                }
                if top.is_some() {
                    return Err(syntax("more than one `top` statement".into()));
                }
                top = Some(rest[0].to_string());
            }
            other => return Err(syntax(format!("unknown statement `{other}`"))),
        }
    }

    let top = top.ok_or(FtreeError::MissingTop)?;
    FaultTree::new(events, gates, &top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_tree() {
        let t = parse_fault_tree("event A prob=0.1\ngate G OR A\ntop G").unwrap();
        assert_eq!(t.events().len(), 1);
        assert_eq!(t.gates().len(), 1);
        assert_eq!(t.top_name(), "G");
    }

    #[test]
    fn undeclared_child() {
        assert_eq!(
            parse_fault_tree("gate G OR A\ntop G"),
            Err(FtreeError::UnresolvedReference("A".into()))
        );
    }

    #[test]
    fn missing_and_duplicate_top() {
        assert_eq!(
            parse_fault_tree("event A prob=0.1\ngate G OR A"),
            Err(FtreeError::MissingTop)
        );
        assert!(matches!(
            parse_fault_tree("event A prob=0.1\ngate G OR A\ntop G\ntop G"),
            Err(FtreeError::Syntax { line: 4, .. })
        ));
    }

    #[test]
    fn duplicate_names() {
        assert_eq!(
            parse_fault_tree("event A prob=0.1\nevent A prob=0.2\ngate G OR A\ntop G"),
            Err(FtreeError::DuplicateName("A".into()))
        );
        assert_eq!(
            parse_fault_tree("event A prob=0.1\ngate A OR A\ntop A"),
            Err(FtreeError::DuplicateName("A".into()))
        );
    }

    #[test]
    fn cycle_is_named() {
        let err = parse_fault_tree("event A prob=0.1\ngate G OR A H\ngate H AND G A\ntop G")
            .unwrap_err();
        match err {
            FtreeError::CycleDetected(c) => assert_eq!(c, vec!["G", "H", "G"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = parse_fault_tree("# header\nevent A prob=abc\n").unwrap_err();
        assert!(matches!(err, FtreeError::Syntax { line: 2, .. }));
        let err = parse_fault_tree("event A prob=0.1\ngate G XOR A\ntop G").unwrap_err();
        assert!(matches!(err, FtreeError::Syntax { line: 2, .. }));
        let err = parse_fault_tree("event A prob=0.1 mttr=3\n").unwrap_err();
        assert!(matches!(err, FtreeError::Syntax { line: 1, .. }));
    }

    #[test]
    fn parameter_ranges() {
        assert!(matches!(
            parse_fault_tree("event A prob=1.5\ngate G OR A\ntop G"),
            Err(FtreeError::InvalidParameter { .. })
        ));
        assert!(matches!(
            parse_fault_tree("event A rate=-1\ngate G OR A\ntop G"),
            Err(FtreeError::InvalidParameter { .. })
        ));
        assert!(matches!(
            parse_fault_tree("event A prob=0.1\nevent C beta=0.1 of=C\ngate G OR A C\ntop G"),
            Err(FtreeError::InvalidParameter { .. })
        ));
        assert_eq!(
            parse_fault_tree("event C beta=0.1 of=X\ngate G OR C\ntop G"),
            Err(FtreeError::UnresolvedReference("X".into()))
        );
    }

    #[test]
    fn scientific_notation_and_comments() {
        let t = parse_fault_tree(
            "event A prob=1.0E-4 # demand\nevent B rate=1e-6\n\ngate G AND A B\ntop G\n",
        )
        .unwrap();
        assert_eq!(t.events()[0].param, ReliabilityParam::Probability { p: 1.0e-4 });
        assert_eq!(
            t.events()[1].param,
            ReliabilityParam::FailureRate {
                rate: 1e-6,
                mission: DEFAULT_MISSION_HOURS
            }
        );
    }

    #[test]
    fn unavailability_closed_forms() {
        let p = ReliabilityParam::Probability { p: 5e-5 };
        assert_eq!(p.standalone_unavailability(), Some(5e-5));
        let zero = ReliabilityParam::FailureRate { rate: 0.0, mission: 24.0 };
        assert_eq!(zero.standalone_unavailability(), Some(0.0));

        let fr = ReliabilityParam::FailureRate { rate: 1e-6, mission: 24.0 };
        let q = fr.standalone_unavailability().unwrap();
        // 1 - exp(-2.4e-5) to 6 significant digits, inside the alternating
        // Taylor bracket [lt - (lt)^2/2, lt].
        let lt = 2.4e-5_f64;
        assert!((q - 2.39997e-5).abs() < 5e-11);
        assert!(q <= lt && q >= lt - lt * lt / 2.0);

        let tested = ReliabilityParam::Tested { rate: 1e-3, tau: 3000.0 };
        assert_eq!(tested.standalone_unavailability(), Some(1.0));
        let rep = ReliabilityParam::Repairable { rate: 0.01, mttr: 100.0 };
        assert!((rep.standalone_unavailability().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(
            ReliabilityParam::Frequency { freq: 1e-4 }.standalone_unavailability(),
            Some(1.0)
        );
    }

    #[test]
    fn ccf_beta_scales_referenced_event() {
        let t = parse_fault_tree(
            "event P prob=0.02\nevent CCF beta=0.05 of=P\ngate G OR P CCF\ntop G",
        )
        .unwrap();
        let q = t.probabilities();
        assert!((q["CCF"] - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn unreachable_is_reported() {
        let t = parse_fault_tree("event A prob=0.1\nevent B prob=0.1\ngate G OR A\ntop G").unwrap();
        assert_eq!(t.unreachable_events(), vec!["B".to_string()]);
    }

    #[test]
    fn evaluate_and_or() {
        let t = parse_fault_tree(
            "event A prob=0.1\nevent B prob=0.1\nevent C prob=0.1\ngate H AND B C\ngate G OR A H\ntop G",
        )
        .unwrap();
        assert!(t.evaluate(&[true, false, false]));
        assert!(!t.evaluate(&[false, true, false]));
        assert!(t.evaluate(&[false, true, true]));
    }
}
