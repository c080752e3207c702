//! Seeded synthetic datasets: perturb the reliability parameters of a
//! fault tree, convert them to unavailabilities, and label every sample
//! with cut-set FV importance.
//!
//! Each sample draws from its own ChaCha stream keyed by `(seed,
//! sample_id)`, so a sample's values do not depend on which other samples
//! were generated or in what order.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ftree::{unavailabilities, FaultTree, FtreeError, ReliabilityParam};
use crate::quant::{fv_from_cuts, minimal_cut_sets, CutSetList, Method, QuantError};
use crate::report::sig9;

/// z-score of the 95th percentile of the standard normal.
pub const Z95: f64 = 1.6449;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid perturbation spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Tree(#[from] FtreeError),
    #[error("sample {sample}: {source}")]
    Quant { sample: usize, source: QuantError },
    #[error(transparent)]
    Cutsets(#[from] QuantError),
    #[error("dataset line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lognormal distribution parameterised by its median and error factor
/// (95th percentile / median).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalSpec {
    pub median: f64,
    pub error_factor: f64,
}

impl LognormalSpec {
    pub fn new(median: f64, error_factor: f64) -> Result<Self, DatagenError> {
        if !(median.is_finite() && median > 0.0) {
            return Err(DatagenError::InvalidSpec(format!("median {median} must be positive")));
        }
        if !(error_factor.is_finite() && error_factor >= 1.0) {
            return Err(DatagenError::InvalidSpec(format!(
                "error factor {error_factor} must be at least 1"
            )));
        }
        Ok(LognormalSpec {
            median,
            error_factor,
        })
    }

    /// Log-space standard deviation, `ln(EF) / z95`.
    pub fn sigma(&self) -> f64 {
        self.error_factor.ln() / Z95
    }
}

pub fn lognormal_sample<R: Rng + ?Sized>(spec: &LognormalSpec, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    spec.median * (spec.sigma() * z).exp()
}

/// How each numeric parameter is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum PerturbLaw {
    /// Factor drawn log-uniformly from `[factor_low, factor_high]`.
    LogUniform,
    /// Factor drawn from a median-1 lognormal with this error factor.
    Lognormal { error_factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbSpec {
    pub base: BTreeMap<String, ReliabilityParam>,
    pub factor_low: f64,
    pub factor_high: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub law: PerturbLaw,
}

impl PerturbSpec {
    /// Log-uniform factors within half an order of magnitude either way.
    pub fn new(base: BTreeMap<String, ReliabilityParam>, n_samples: usize, seed: u64) -> Self {
        PerturbSpec {
            base,
            factor_low: 10f64.powf(-0.5),
            factor_high: 10f64.powf(0.5),
            n_samples,
            seed,
            law: PerturbLaw::LogUniform,
        }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.n_samples == 0 {
            return Err(DatagenError::InvalidSpec("n_samples must be at least 1".into()));
        }
        let ok = |f: f64| f.is_finite() && f > 0.0;
        if !ok(self.factor_low) || !ok(self.factor_high) {
            return Err(DatagenError::InvalidSpec("factors must be positive".into()));
        }
        if self.factor_low > self.factor_high {
            return Err(DatagenError::InvalidSpec(format!(
                "factor_low {} exceeds factor_high {}",
                self.factor_low, self.factor_high
            )));
        }
        if let PerturbLaw::Lognormal { error_factor } = self.law {
            LognormalSpec::new(1.0, error_factor)?;
        }
        Ok(())
    }
}

/// Scales every numeric field of every base parameter by an independent
/// random factor. Probabilities and beta factors are capped at 1.
pub fn perturb<R: Rng + ?Sized>(spec: &PerturbSpec, rng: &mut R) -> BTreeMap<String, ReliabilityParam> {
    let (lo, hi) = (spec.factor_low.ln(), spec.factor_high.ln());
    spec.base
        .iter()
        .map(|(name, p)| {
            let scaled = p.map_numeric(|_, v, capped| {
                let factor = match spec.law {
                    PerturbLaw::LogUniform if lo == hi => spec.factor_low,
                    PerturbLaw::LogUniform => rng.random_range(lo..=hi).exp(),
                    PerturbLaw::Lognormal { error_factor } => lognormal_sample(
                        &LognormalSpec {
                            median: 1.0,
                            error_factor,
                        },
                        rng,
                    ),
                };
                let v = v * factor;
                if capped {
                    v.min(1.0)
                } else {
                    v
                }
            });
            (name.clone(), scaled)
        })
        .collect()
}

/// Per-sample generator keyed by `(seed, sample_id)`.
pub fn sample_rng(seed: u64, sample_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_id as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub sample_id: usize,
    pub q: BTreeMap<String, f64>,
    pub fv: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub tree_hash: String,
    pub method: Method,
    /// Node order used by the models.
    pub events: Vec<String>,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub samples: Vec<Sample>,
}

/// SHA-256 of the tree's canonical rendering.
pub fn tree_hash(tree: &FaultTree) -> String {
    Sha256::digest(tree.render().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Generates `spec.n_samples` labelled samples for `tree`. The spec's base
/// parameters override the tree's own for any event they name.
pub fn generate(tree: &FaultTree, spec: &PerturbSpec, method: Method) -> Result<Dataset, DatagenError> {
    spec.validate()?;
    let cuts = minimal_cut_sets(tree, None)?;
    generate_from_cuts(tree, &cuts, spec, method)
}

/// [`generate`] with the tree's minimal cut sets supplied by the caller.
pub fn generate_from_cuts(
    tree: &FaultTree,
    cuts: &CutSetList,
    spec: &PerturbSpec,
    method: Method,
) -> Result<Dataset, DatagenError> {
    spec.validate()?;
    let mut base = tree.params();
    base.extend(spec.base.iter().map(|(k, v)| (k.clone(), v.clone())));
    let spec = PerturbSpec {
        base,
        ..spec.clone()
    };
    let events: Vec<String> = tree
        .events()
        .iter()
        .filter(|e| !e.param.is_frequency())
        .map(|e| e.name.clone())
        .collect();

    let samples = (0..spec.n_samples)
        .map(|sample_id| {
            let mut rng = sample_rng(spec.seed, sample_id);
            let params = perturb(&spec, &mut rng);
            let q_all = unavailabilities(&params)?;
            let fv = fv_from_cuts(tree, cuts, &q_all, method)
                .map_err(|source| DatagenError::Quant {
                    sample: sample_id,
                    source,
                })?
                .fv_cutset_map();
            let q = events.iter().map(|e| (e.clone(), sig9(q_all[e]))).collect();
            let fv = fv.into_iter().map(|(k, v)| (k, sig9(v))).collect();
            Ok(Sample { sample_id, q, fv })
        })
        .collect::<Result<Vec<_>, DatagenError>>()?;

    Ok(Dataset {
        meta: DatasetMeta {
            seed: spec.seed,
            tree_hash: tree_hash(tree),
            method,
            events,
            edges: Vec::new(),
        },
        samples,
    })
}

impl Dataset {
    pub fn with_edges(mut self, edges: Vec<(String, String)>) -> Self {
        self.meta.edges = edges;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Writes the metadata line followed by one line per sample, ascending
    /// `sample_id`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), DatagenError> {
        let meta = json!({ "meta": self.meta });
        writeln!(w, "{meta}")?;
        let mut order: Vec<&Sample> = self.samples.iter().collect();
        order.sort_by_key(|s| s.sample_id);
        for s in order {
            writeln!(w, "{}", serde_json::to_string(s).expect("sample serializes"))?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Dataset, DatagenError> {
        #[derive(Deserialize)]
        struct MetaLine {
            meta: DatasetMeta,
        }
        let mut lines = r.lines().enumerate().filter(|(_, l)| {
            l.as_ref().map_or(true, |s| !s.trim().is_empty())
        });
        let (_, first) = lines.next().ok_or(DatagenError::Format {
            line: 1,
            message: "empty dataset".into(),
        })?;
        let meta: MetaLine = serde_json::from_str(&first?).map_err(|e| DatagenError::Format {
            line: 1,
            message: e.to_string(),
        })?;
        let mut samples = Vec::new();
        for (i, line) in lines {
            let s: Sample = serde_json::from_str(&line?).map_err(|e| DatagenError::Format {
                line: i + 1,
                message: e.to_string(),
            })?;
            for e in &meta.meta.events {
                if !s.q.contains_key(e) || !s.fv.contains_key(e) {
                    return Err(DatagenError::Format {
                        line: i + 1,
                        message: format!("sample {} lacks event `{e}`", s.sample_id),
                    });
                }
            }
            samples.push(s);
        }
        Ok(Dataset {
            meta: meta.meta,
            samples,
        })
    }
}
