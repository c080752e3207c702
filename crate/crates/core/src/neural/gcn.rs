use std::collections::HashMap;

use rand::Rng;

use super::matrix::DenseMatrix;
use super::{glorot, relu_mask, FeatureScaling, NeuralError};

/// `D⁻¹A` for the undirected version of `edges` over `nodes`. With
/// `self_loops` every node also links to itself. Rows of isolated nodes
/// become identity rows.
pub fn normalize_adjacency(
    edges: &[(String, String)],
    nodes: &[String],
    self_loops: bool,
) -> Result<DenseMatrix, NeuralError> {
    let n = nodes.len();
    let idx: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let lookup = |s: &str| idx.get(s).copied().ok_or_else(|| NeuralError::UnknownNode(s.to_string()));
    let mut a = DenseMatrix::zeros(n, n);
    for (from, to) in edges {
        let (i, j) = (lookup(from)?, lookup(to)?);
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    if self_loops {
        for i in 0..n {
            a[(i, i)] = 1.0;
        }
    }
    for i in 0..n {
        let deg: f64 = a.row(i).iter().sum();
        if deg == 0.0 {
            a[(i, i)] = 1.0;
        } else {
            for j in 0..n {
                a[(i, j)] /= deg;
            }
        }
    }
    Ok(a)
}

/// Graph-convolutional regressor: one scalar feature in, one scalar out
/// per node. Every layer computes `Â·H·W + H·R + b`, where the root
/// weights `R` carry a node's own state past the neighbourhood average;
/// with `roots` empty the layer is the plain `Â·H·W + b`. Hidden layers
/// apply ReLU.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    pub node_order: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub self_loops: bool,
    pub adjacency: DenseMatrix,
    pub weights: Vec<DenseMatrix>,
    /// One per layer, or empty.
    pub roots: Vec<DenseMatrix>,
    pub biases: Vec<DenseMatrix>,
    pub scaling: FeatureScaling,
}

pub(crate) struct GcnCache {
    /// Layer inputs `H_l`.
    inputs: Vec<DenseMatrix>,
    /// `Â·H_l` per layer.
    propagated: Vec<DenseMatrix>,
    /// Pre-activations per layer.
    pre: Vec<DenseMatrix>,
}

impl GcnModel {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(
        node_order: Vec<String>,
        edges: Vec<(String, String)>,
        layer_dims: &[usize],
        self_loops: bool,
        root_weights: bool,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        if layer_dims.len() < 2 || layer_dims[0] != 1 || *layer_dims.last().unwrap() != 1 {
            return Err(NeuralError::InvalidConfig(
                "GCN layer dims must start and end with 1".into(),
            ));
        }
        let adjacency = normalize_adjacency(&edges, &node_order, self_loops)?;
        let weights = layer_dims
            .windows(2)
            .map(|w| glorot(w[0], w[1], rng))
            .collect();
        let roots = if root_weights {
            layer_dims.windows(2).map(|w| glorot(w[0], w[1], rng)).collect()
        } else {
            Vec::new()
        };
        let biases = layer_dims[1..].iter().map(|&d| DenseMatrix::zeros(1, d)).collect();
        Ok(GcnModel {
            node_order,
            edges,
            self_loops,
            adjacency,
            weights,
            roots,
            biases,
            scaling: FeatureScaling::Raw,
        })
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.weights[0].rows];
        dims.extend(self.weights.iter().map(|w| w.cols));
        dims
    }

    pub fn n_nodes(&self) -> usize {
        self.node_order.len()
    }

    /// Raw outputs for node features `x` (already scaled) under an
    /// arbitrary normalized adjacency.
    pub fn forward_with(&self, adjacency: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix, NeuralError> {
        if x.shape() != (adjacency.rows, 1) || adjacency.rows != adjacency.cols {
            return Err(NeuralError::DimensionMismatch {
                expected: format!("{}x1", adjacency.rows),
                found: format!("{}x{}", x.rows, x.cols),
            });
        }
        Ok(self.forward_cached(adjacency, x).0)
    }

    pub fn forward_raw(&self, x: &DenseMatrix) -> Result<DenseMatrix, NeuralError> {
        self.forward_with(&self.adjacency, x)
    }

    pub(crate) fn forward_cached(&self, adjacency: &DenseMatrix, x: &DenseMatrix) -> (DenseMatrix, GcnCache) {
        let last = self.weights.len() - 1;
        let mut h = x.clone();
        let mut cache = GcnCache {
            inputs: Vec::with_capacity(self.weights.len()),
            propagated: Vec::with_capacity(self.weights.len()),
            pre: Vec::with_capacity(self.weights.len()),
        };
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let p = adjacency.matmul(&h);
            let mut z = p.matmul(w);
            if let Some(r) = self.roots.get(l) {
                z.add_assign(&h.matmul(r));
            }
            z.add_row(b);
            let next = if l == last { z.clone() } else { z.map(|v| v.max(0.0)) };
            cache.inputs.push(std::mem::replace(&mut h, next));
            cache.propagated.push(p);
            cache.pre.push(z);
        }
        (h, cache)
    }

    /// Gradients of a loss with output gradient `dout` (n×1), in the
    /// order of [`GcnModel::params`].
    pub(crate) fn backward(&self, cache: &GcnCache, dout: &DenseMatrix) -> Vec<DenseMatrix> {
        let layers = self.weights.len();
        let mut per_layer = Vec::with_capacity(layers);
        let mut g = dout.clone();
        for l in (0..layers).rev() {
            let dw = cache.propagated[l].t_matmul(&g);
            let dr = self.roots.get(l).map(|_| cache.inputs[l].t_matmul(&g));
            let db = g.col_sums();
            if l > 0 {
                let dp = g.matmul_t(&self.weights[l]);
                let mut dh = self.adjacency.t_matmul(&dp);
                if let Some(r) = self.roots.get(l) {
                    dh.add_assign(&g.matmul_t(r));
                }
                g = relu_mask(&dh, &cache.pre[l - 1]);
            }
            per_layer.push((dw, dr, db));
        }
        per_layer
            .into_iter()
            .rev()
            .flat_map(|(dw, dr, db)| std::iter::once(dw).chain(dr).chain(std::iter::once(db)))
            .collect()
    }

    /// `[W1, R1, b1, W2, R2, b2, ...]`, omitting `R` when there are no
    /// root weights.
    /// Raw output and the sign of every hidden pre-activation.
    pub(crate) fn forward_pattern(&self, x: &DenseMatrix) -> (DenseMatrix, Vec<bool>) {
        let (out, cache) = self.forward_cached(&self.adjacency, x);
        let hidden = cache.pre.len() - 1;
        let pattern = cache.pre[..hidden].iter().flat_map(|z| z.data.iter().map(|&v| v > 0.0)).collect();
        (out, pattern)
    }

    pub(crate) fn params(&self) -> Vec<&DenseMatrix> {
        let mut out = Vec::new();
        for l in 0..self.weights.len() {
            out.push(&self.weights[l]);
            if let Some(r) = self.roots.get(l) {
                out.push(r);
            }
            out.push(&self.biases[l]);
        }
        out
    }

    pub(crate) fn params_mut(&mut self) -> Vec<&mut DenseMatrix> {
        let mut roots = self.roots.iter_mut();
        let mut out = Vec::new();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w);
            if let Some(r) = roots.next() {
                out.push(r);
            }
            out.push(b);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::sample_rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("n{i}")).collect()
    }

    #[test]
    fn single_node_self_loop() {
        let a = normalize_adjacency(&[], &names(1), true).unwrap();
        assert_eq!(a.data, vec![1.0]);
        let a = normalize_adjacency(&[], &names(1), false).unwrap();
        assert_eq!(a.data, vec![1.0]);
    }

    #[test]
    fn two_nodes_one_edge() {
        let a = normalize_adjacency(&[("n0".into(), "n1".into())], &names(2), true).unwrap();
        assert_eq!(a.data, vec![0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn unknown_node() {
        assert!(matches!(
            normalize_adjacency(&[("n0".into(), "zz".into())], &names(2), true),
            Err(NeuralError::UnknownNode(_))
        ));
    }

    #[test]
    fn zero_weights_zero_output() {
        let mut m = GcnModel::new(names(1), vec![], &[1, 32, 32, 1], true, true, &mut sample_rng(0, 0)).unwrap();
        for p in m.params_mut() {
            p.scale(0.0);
        }
        let out = m.forward_raw(&DenseMatrix::column(&[0.0])).unwrap();
        assert_eq!(out.data, vec![0.0]);
    }

    #[test]
    fn passthrough_weights() {
        let mut m = GcnModel::new(
            names(2),
            vec![("n0".into(), "n1".into())],
            &[1, 32, 32, 1],
            true,
            true,
            &mut sample_rng(0, 0),
        )
        .unwrap();
        for p in m.params_mut() {
            p.scale(0.0);
        }
        m.weights[0][(0, 0)] = 1.0;
        m.weights[1][(0, 0)] = 1.0;
        m.weights[2][(0, 0)] = 1.0;
        // Â = [[.5,.5],[.5,.5]]: Âx = [2,2], and Â leaves [2,2] unchanged.
        let out = m.forward_raw(&DenseMatrix::column(&[1.0, 3.0])).unwrap();
        assert_eq!(out.data, vec![2.0, 2.0]);
    }

    #[test]
    fn input_shape_checked() {
        let m = GcnModel::new(names(2), vec![], &[1, 4, 1], true, false, &mut sample_rng(0, 0)).unwrap();
        assert!(matches!(
            m.forward_raw(&DenseMatrix::column(&[1.0, 2.0, 3.0])),
            Err(NeuralError::DimensionMismatch { .. })
        ));
    }
}
