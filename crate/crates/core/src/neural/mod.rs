//! Dense linear algebra, graph-convolutional and fully connected
//! regressors trained by full-batch gradient descent, and regression
//! metrics. Everything is hand-written on `f64` and single-threaded, so a
//! fixed seed reproduces weights bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod gcn;
pub mod matrix;
pub mod metrics;
pub mod mlp;
pub mod train;

pub use gcn::{normalize_adjacency, GcnModel};
pub use matrix::DenseMatrix;
pub use metrics::{evaluate, Metrics};
pub use mlp::MlpModel;
pub use train::{split_indices, train, train_with_edges, ModelFile, Optimizer, SplitIndices, TrainConfig, TrainedModel, MIN_SAMPLES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("no probability for event `{0}`")]
    MissingEvent(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("prediction has {pred} values, truth has {truth}")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("dataset carries no adjacency; pass edges explicitly")]
    NoAdjacency,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("bad model file: {0}")]
    BadModelFile(String),
}

/// Floor applied before taking logarithms of probabilities.
pub const LOG_FLOOR: f64 = 1e-12;

/// Map from a probability to the scalar node feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureScaling {
    Raw,
    /// `(log10(max(q, LOG_FLOOR)) - mean) / std`.
    Log10 { mean: f64, std: f64 },
}

impl FeatureScaling {
    pub fn apply(&self, q: f64) -> f64 {
        match *self {
            FeatureScaling::Raw => q,
            FeatureScaling::Log10 { mean, std } => (q.max(LOG_FLOOR).log10() - mean) / std,
        }
    }

    /// Fits the log scaling to a pool of probabilities.
    pub fn fit_log10<'a>(qs: impl IntoIterator<Item = &'a f64>) -> Self {
        let logs: Vec<f64> = qs.into_iter().map(|q| q.max(LOG_FLOOR).log10()).collect();
        let n = logs.len().max(1) as f64;
        let mean = logs.iter().sum::<f64>() / n;
        let var = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
        FeatureScaling::Log10 { mean, std }
    }
}

pub(crate) fn glorot<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> DenseMatrix {
    let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out).map(|_| rng.random_range(-s..s)).collect();
    DenseMatrix::from_vec(fan_in, fan_out, data)
}

/// `grad` where the pre-activation is positive, zero elsewhere.
pub(crate) fn relu_mask(grad: &DenseMatrix, pre: &DenseMatrix) -> DenseMatrix {
    DenseMatrix {
        rows: grad.rows,
        cols: grad.cols,
        data: grad
            .data
            .iter()
            .zip(&pre.data)
            .map(|(g, z)| if *z > 0.0 { *g } else { 0.0 })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gcn,
    Mlp,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Gcn => "gcn",
            ModelKind::Mlp => "mlp",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gcn" => Ok(ModelKind::Gcn),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(format!("unknown model `{other}` (gcn|mlp)")),
        }
    }
}

/// Either regressor behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Gcn(GcnModel),
    Mlp(MlpModel),
}

/// Model output for one probability map.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Estimates clamped to [0, 1].
    pub fv: BTreeMap<String, f64>,
    /// Unclamped outputs.
    pub raw: BTreeMap<String, f64>,
    /// Node names by descending raw output, name ascending on ties.
    pub ranking: Vec<String>,
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Gcn(_) => ModelKind::Gcn,
            Model::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn node_order(&self) -> &[String] {
        match self {
            Model::Gcn(m) => &m.node_order,
            Model::Mlp(m) => &m.node_order,
        }
    }

    pub fn edges(&self) -> &[(String, String)] {
        match self {
            Model::Gcn(m) => &m.edges,
            Model::Mlp(m) => &m.edges,
        }
    }

    pub fn scaling(&self) -> FeatureScaling {
        match self {
            Model::Gcn(m) => m.scaling,
            Model::Mlp(m) => m.scaling,
        }
    }

    pub fn set_scaling(&mut self, s: FeatureScaling) {
        match self {
            Model::Gcn(m) => m.scaling = s,
            Model::Mlp(m) => m.scaling = s,
        }
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        match self {
            Model::Gcn(m) => m.layer_dims(),
            Model::Mlp(m) => m.layer_dims(),
        }
    }

    pub fn params(&self) -> Vec<&DenseMatrix> {
        match self {
            Model::Gcn(m) => m.params(),
            Model::Mlp(m) => m.params(),
        }
    }

    pub(crate) fn params_mut(&mut self) -> Vec<&mut DenseMatrix> {
        match self {
            Model::Gcn(m) => m.params_mut(),
            Model::Mlp(m) => m.params_mut(),
        }
    }

    /// Scaled node features in node order.
    pub fn features(&self, q: &BTreeMap<String, f64>) -> Result<DenseMatrix, NeuralError> {
        let s = self.scaling();
        let values = self
            .node_order()
            .iter()
            .map(|n| {
                q.get(n)
                    .map(|&v| s.apply(v))
                    .ok_or_else(|| NeuralError::MissingEvent(n.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DenseMatrix::column(&values))
    }

    /// Unclamped outputs for already-scaled features.
    pub fn forward_raw(&self, x: &DenseMatrix) -> Result<DenseMatrix, NeuralError> {
        match self {
            Model::Gcn(m) => m.forward_raw(x),
            Model::Mlp(m) => m.forward_raw(x),
        }
    }

    /// Sum over nodes of squared error, with gradients ordered as
    /// [`Model::params`].
    pub fn sse_and_grad(&self, x: &DenseMatrix, y: &[f64]) -> Result<(f64, Vec<DenseMatrix>), NeuralError> {
        let (out, grads) = match self {
            Model::Gcn(m) => {
                let (out, cache) = m.forward_cached(&m.adjacency, x);
                let d = output_grad(&out, y)?;
                (out, m.backward(&cache, &d))
            }
            Model::Mlp(m) => {
                let (out, cache) = m.forward_cached(x)?;
                let d = output_grad(&out, y)?;
                (out, m.backward(&cache, &d))
            }
        };
        let sse = out.data.iter().zip(y).map(|(o, t)| (o - t) * (o - t)).sum();
        Ok((sse, grads))
    }

    pub fn predict(&self, q: &BTreeMap<String, f64>) -> Result<Prediction, NeuralError> {
        let out = self.forward_raw(&self.features(q)?)?;
        let names = self.node_order();
        let raw: BTreeMap<String, f64> = names.iter().cloned().zip(out.data.iter().copied()).collect();
        let fv = raw.iter().map(|(k, v)| (k.clone(), v.clamp(0.0, 1.0))).collect();
        let mut ranking: Vec<String> = names.to_vec();
        ranking.sort_by(|a, b| raw[b].total_cmp(&raw[a]).then_with(|| a.cmp(b)));
        Ok(Prediction { fv, raw, ranking })
    }
}

fn output_grad(out: &DenseMatrix, y: &[f64]) -> Result<DenseMatrix, NeuralError> {
    if out.rows != y.len() {
        return Err(NeuralError::DimensionMismatch {
            expected: format!("{} labels", out.rows),
            found: format!("{} labels", y.len()),
        });
    }
    Ok(DenseMatrix::from_vec(
        out.rows,
        1,
        out.data.iter().zip(y).map(|(o, t)| 2.0 * (o - t)).collect(),
    ))
}

/// Outcome of [`gradient_check_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// Largest `|a - n| / max(1e-8, |a| + |n|)` over compared coordinates.
    pub max_rel_error: f64,
    pub compared: usize,
    /// Coordinates whose ±h step flips a hidden ReLU, where the central
    /// difference straddles a kink and is not a derivative.
    pub skipped_kinks: usize,
}

/// Largest relative disagreement between backpropagated gradients and
/// central differences (step 1e-5) of the per-sample mean squared error,
/// over every weight and bias.
pub fn gradient_check(
    model: &Model,
    q: &BTreeMap<String, f64>,
    fv: &BTreeMap<String, f64>,
) -> Result<f64, NeuralError> {
    Ok(gradient_check_report(model, q, fv)?.max_rel_error)
}

pub fn gradient_check_report(
    model: &Model,
    q: &BTreeMap<String, f64>,
    fv: &BTreeMap<String, f64>,
) -> Result<GradientCheck, NeuralError> {
    const H: f64 = 1e-5;
    let x = model.features(q)?;
    let y: Vec<f64> = model
        .node_order()
        .iter()
        .map(|n| fv.get(n).copied().ok_or_else(|| NeuralError::MissingEvent(n.clone())))
        .collect::<Result<_, _>>()?;
    let n = y.len() as f64;
    let (_, grads) = model.sse_and_grad(&x, &y)?;
    // Per-sample mean loss and hidden ReLU signs from one forward pass.
    let probe_eval = |m: &Model| -> Result<(f64, Vec<bool>), NeuralError> {
        let (out, pattern) = match m {
            Model::Gcn(g) => g.forward_pattern(&x),
            Model::Mlp(p) => p.forward_pattern(&x)?,
        };
        let sse: f64 = out.data.iter().zip(&y).map(|(o, t)| (o - t) * (o - t)).sum();
        Ok((sse / n, pattern))
    };
    let (_, base) = probe_eval(model)?;

    let mut probe = model.clone();
    let mut out = GradientCheck {
        max_rel_error: 0.0,
        compared: 0,
        skipped_kinks: 0,
    };
    for (p, g) in grads.iter().enumerate() {
        for k in 0..g.data.len() {
            let orig = probe.params()[p].data[k];
            probe.params_mut()[p].data[k] = orig + H;
            let (up, pat_up) = probe_eval(&probe)?;
            probe.params_mut()[p].data[k] = orig - H;
            let (down, pat_down) = probe_eval(&probe)?;
            probe.params_mut()[p].data[k] = orig;
            if pat_up != base || pat_down != base {
                out.skipped_kinks += 1;
                continue;
            }
            let numeric = (up - down) / (2.0 * H);
            let analytic = g.data[k] / n;
            let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8);
            out.max_rel_error = out.max_rel_error.max(rel);
            out.compared += 1;
        }
    }
    Ok(out)
}
