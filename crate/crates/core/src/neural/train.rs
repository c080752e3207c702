use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{
    evaluate, normalize_adjacency, DenseMatrix, FeatureScaling, GcnModel, Metrics, MlpModel, Model,
    ModelKind, NeuralError,
};
use crate::datagen::{sample_rng, Dataset};

/// Smallest dataset accepted by [`train`].
pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Adam { beta1: f64, beta2: f64, eps: f64 },
    Sgd,
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Stop after this many epochs without held-out improvement and keep
    /// the best weights seen.
    pub early_stopping: Option<usize>,
    /// Standardized log10 features instead of raw probabilities.
    pub log_features: bool,
    /// Self-loops in the GCN adjacency before normalization.
    pub self_loops: bool,
    /// Per-layer self weights in the GCN, alongside the neighbourhood
    /// weights.
    pub root_weights: bool,
    pub gcn_dims: Vec<usize>,
    pub mlp_hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            epochs: 2000,
            train_fraction: 0.8,
            seed: 0,
            optimizer: Optimizer::default(),
            early_stopping: None,
            log_features: false,
            self_loops: true,
            root_weights: true,
            gcn_dims: vec![1, 32, 32, 1],
            mlp_hidden: vec![64, 64, 64],
        }
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        TrainConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(NeuralError::InvalidConfig(format!(
                "train_fraction {} must lie in (0, 1)",
                self.train_fraction
            )));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(NeuralError::InvalidConfig(format!(
                "learning_rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: Model,
    pub config: TrainConfig,
    pub split: SplitIndices,
    /// Held-out metrics on clamped outputs, pooled over nodes.
    pub metrics: Metrics,
    /// Training MSE before each update.
    pub loss_trace: Vec<f64>,
}

/// Seeded shuffle of `0..n`, first `round(n * fraction)` to train.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> SplitIndices {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut sample_rng(seed, usize::MAX));
    let n_train = ((n as f64 * fraction).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let test = idx.split_off(n_train);
    SplitIndices { train: idx, test }
}

/// Trains on the dataset's own adjacency.
pub fn train(kind: ModelKind, data: &Dataset, cfg: &TrainConfig) -> Result<TrainedModel, NeuralError> {
    if kind == ModelKind::Gcn && data.meta.edges.is_empty() {
        return Err(NeuralError::NoAdjacency);
    }
    train_with_edges(kind, data, &data.meta.edges, cfg)
}

/// Trains with an explicit edge list, which may be empty.
pub fn train_with_edges(
    kind: ModelKind,
    data: &Dataset,
    edges: &[(String, String)],
    cfg: &TrainConfig,
) -> Result<TrainedModel, NeuralError> {
    cfg.validate()?;
    if data.samples.len() < MIN_SAMPLES {
        return Err(NeuralError::TooFewSamples {
            min: MIN_SAMPLES,
            got: data.samples.len(),
        });
    }
    let nodes = data.meta.events.clone();
    let split = split_indices(data.samples.len(), cfg.train_fraction, cfg.seed);

    let mut init_rng = sample_rng(cfg.seed, 0);
    let mut model = match kind {
        ModelKind::Gcn => Model::Gcn(GcnModel::new(
            nodes.clone(),
            edges.to_vec(),
            &cfg.gcn_dims,
            cfg.self_loops,
            cfg.root_weights,
            &mut init_rng,
        )?),
        ModelKind::Mlp => Model::Mlp(MlpModel::new(
            nodes.clone(),
            edges.to_vec(),
            &cfg.mlp_hidden,
            &mut init_rng,
        )?),
    };
    if cfg.log_features {
        let pool = split
            .train
            .iter()
            .flat_map(|&i| nodes.iter().map(move |n| &data.samples[i].q[n]));
        model.set_scaling(FeatureScaling::fit_log10(pool));
    }

    let encode = |model: &Model, ids: &[usize]| -> Result<Vec<(DenseMatrix, Vec<f64>)>, NeuralError> {
        ids.iter()
            .map(|&i| {
                let s = &data.samples[i];
                let y = nodes
                    .iter()
                    .map(|n| s.fv.get(n).copied().ok_or_else(|| NeuralError::MissingEvent(n.clone())))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((model.features(&s.q)?, y))
            })
            .collect()
    };
    let train_set = encode(&model, &split.train)?;
    let test_set = encode(&model, &split.test)?;
    let denom = (train_set.len() * nodes.len()) as f64;

    let mut opt = OptimizerState::new(cfg.optimizer, &model);
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, Model)> = None;
    let mut since_best = 0;

    for epoch in 0..cfg.epochs {
        let mut sse = 0.0;
        let mut grads: Option<Vec<DenseMatrix>> = None;
        for (x, y) in &train_set {
            let (l, g) = model.sse_and_grad(x, y)?;
            sse += l;
            match grads.as_mut() {
                None => grads = Some(g),
                Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| a.add_assign(b)),
            }
        }
        let loss = sse / denom;
        if !loss.is_finite() {
            return Err(NeuralError::NonFiniteLoss { epoch });
        }
        loss_trace.push(loss);

        if let Some(patience) = cfg.early_stopping {
            let held = raw_mse(&model, &test_set)?;
            if best.as_ref().is_none_or(|(b, _)| held < *b) {
                best = Some((held, model.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    break;
                }
            }
        }

        let mut grads = grads.expect("train split is non-empty");
        for g in &mut grads {
            g.scale(1.0 / denom);
        }
        opt.step(&mut model, &grads, cfg.learning_rate);
    }
    if let Some((_, m)) = best {
        model = m;
    }

    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for (x, y) in &test_set {
        let out = model.forward_raw(x)?;
        pred.extend(out.data.iter().map(|v| v.clamp(0.0, 1.0)));
        truth.extend_from_slice(y);
    }
    let metrics = evaluate(&pred, &truth)?;

    Ok(TrainedModel {
        model,
        config: cfg.clone(),
        split,
        metrics,
        loss_trace,
    })
}

fn raw_mse(model: &Model, set: &[(DenseMatrix, Vec<f64>)]) -> Result<f64, NeuralError> {
    let mut sse = 0.0;
    let mut count = 0usize;
    for (x, y) in set {
        sse += model.sse_and_grad(x, y)?.0;
        count += y.len();
    }
    Ok(sse / count.max(1) as f64)
}

struct OptimizerState {
    kind: Optimizer,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl OptimizerState {
    fn new(kind: Optimizer, model: &Model) -> Self {
        let zeros: Vec<Vec<f64>> = model.params().iter().map(|p| vec![0.0; p.data.len()]).collect();
        OptimizerState {
            kind,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, model: &mut Model, grads: &[DenseMatrix], lr: f64) {
        self.t += 1;
        match self.kind {
            Optimizer::Sgd => {
                for (p, g) in model.params_mut().into_iter().zip(grads) {
                    for (w, d) in p.data.iter_mut().zip(&g.data) {
                        *w -= lr * d;
                    }
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let c1 = 1.0 - beta1.powi(self.t);
                let c2 = 1.0 - beta2.powi(self.t);
                for (k, (p, g)) in model.params_mut().into_iter().zip(grads).enumerate() {
                    for (j, (w, d)) in p.data.iter_mut().zip(&g.data).enumerate() {
                        let m = &mut self.m[k][j];
                        let v = &mut self.v[k][j];
                        *m = beta1 * *m + (1.0 - beta1) * d;
                        *v = beta2 * *v + (1.0 - beta2) * d * d;
                        *w -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                    }
                }
            }
        }
    }
}

/// On-disk JSON form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub kind: ModelKind,
    pub node_order: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub layer_dims: Vec<usize>,
    /// Row-major weight matrices, one per layer.
    pub weights: Vec<Vec<f64>>,
    /// GCN self weights, one per layer, or empty.
    #[serde(default)]
    pub root_weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub feature_scaling: FeatureScaling,
    pub self_loops: bool,
    pub train_config: TrainConfig,
    pub split_indices: SplitIndices,
    pub metrics: Metrics,
}

impl TrainedModel {
    pub fn to_file(&self) -> ModelFile {
        let (weights, roots, biases, self_loops) = match &self.model {
            Model::Gcn(m) => (&m.weights, m.roots.as_slice(), &m.biases, m.self_loops),
            Model::Mlp(m) => (&m.weights, &[][..], &m.biases, false),
        };
        ModelFile {
            kind: self.model.kind(),
            node_order: self.model.node_order().to_vec(),
            edges: self.model.edges().to_vec(),
            layer_dims: self.model.layer_dims(),
            weights: weights.iter().map(|w| w.data.clone()).collect(),
            root_weights: roots.iter().map(|r| r.data.clone()).collect(),
            biases: biases.iter().map(|b| b.data.clone()).collect(),
            feature_scaling: self.model.scaling(),
            self_loops,
            train_config: self.config.clone(),
            split_indices: self.split.clone(),
            metrics: self.metrics,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, NeuralError> {
        let f: ModelFile = serde_json::from_str(text).map_err(|e| NeuralError::BadModelFile(e.to_string()))?;
        TrainedModel::from_file(f)
    }

    pub fn from_file(f: ModelFile) -> Result<TrainedModel, NeuralError> {
        let dims = &f.layer_dims;
        if dims.len() < 2 || f.weights.len() != dims.len() - 1 || f.biases.len() != dims.len() - 1 {
            return Err(NeuralError::BadModelFile("layer count mismatch".into()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (l, pair) in dims.windows(2).enumerate() {
            if f.weights[l].len() != pair[0] * pair[1] || f.biases[l].len() != pair[1] {
                return Err(NeuralError::BadModelFile(format!("layer {l} has wrong size")));
            }
            weights.push(DenseMatrix::from_vec(pair[0], pair[1], f.weights[l].clone()));
            biases.push(DenseMatrix::from_vec(1, pair[1], f.biases[l].clone()));
        }
        let roots = if f.root_weights.is_empty() {
            Vec::new()
        } else if f.kind == ModelKind::Gcn && f.root_weights.len() == weights.len() {
            let mut roots = Vec::new();
            for (r, w) in f.root_weights.iter().zip(&weights) {
                if r.len() != w.data.len() {
                    return Err(NeuralError::BadModelFile("root weight has wrong size".into()));
                }
                roots.push(DenseMatrix::from_vec(w.rows, w.cols, r.clone()));
            }
            roots
        } else {
            return Err(NeuralError::BadModelFile("unexpected root weights".into()));
        };
        let n = f.node_order.len();
        let model = match f.kind {
            ModelKind::Gcn => {
                if dims[0] != 1 || dims[dims.len() - 1] != 1 {
                    return Err(NeuralError::BadModelFile("GCN dims must start and end with 1".into()));
                }
                Model::Gcn(GcnModel {
                    adjacency: normalize_adjacency(&f.edges, &f.node_order, f.self_loops)?,
                    node_order: f.node_order,
                    edges: f.edges,
                    self_loops: f.self_loops,
                    weights,
                    roots,
                    biases,
                    scaling: f.feature_scaling,
                })
            }
            ModelKind::Mlp => {
                if dims[0] != n + n * n || dims[dims.len() - 1] != n {
                    return Err(NeuralError::BadModelFile("MLP dims do not match node count".into()));
                }
                let mut m = MlpModel::new(f.node_order, f.edges, &[], &mut sample_rng(0, 0))?;
                m.weights = weights;
                m.biases = biases;
                m.scaling = f.feature_scaling;
                Model::Mlp(m)
            }
        };
        Ok(TrainedModel {
            model,
            config: f.train_config,
            split: f.split_indices,
            metrics: f.metrics,
            loss_trace: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_covers_everything_once() {
        let s = split_indices(50, 0.8, 3);
        assert_eq!(s.train.len(), 40);
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        assert_eq!(split_indices(50, 0.8, 3), s);
        assert_ne!(split_indices(50, 0.8, 4), s);
    }

    #[test]
    fn config_validation() {
        let mut c = TrainConfig::default();
        c.train_fraction = 1.0;
        assert!(c.validate().is_err());
        c.train_fraction = 0.5;
        c.learning_rate = f64::NAN;
        assert!(c.validate().is_err());
    }
}
