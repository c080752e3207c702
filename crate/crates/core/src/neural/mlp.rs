use rand::Rng;

use super::matrix::DenseMatrix;
use super::{glorot, relu_mask, FeatureScaling, NeuralError};

/// Fully connected baseline. Input is the scaled per-node features
/// followed by the flattened symmetric 0/1 adjacency; output is one value
/// per node.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub node_order: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub adjacency_flat: Vec<f64>,
    pub weights: Vec<DenseMatrix>,
    pub biases: Vec<DenseMatrix>,
    pub scaling: FeatureScaling,
}

pub(crate) struct MlpCache {
    inputs: Vec<DenseMatrix>,
    pre: Vec<DenseMatrix>,
}

/// Symmetric 0/1 adjacency without self-loops, row-major.
fn flat_adjacency(edges: &[(String, String)], nodes: &[String]) -> Result<Vec<f64>, NeuralError> {
    let n = nodes.len();
    let pos = |s: &str| {
        nodes
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| NeuralError::UnknownNode(s.to_string()))
    };
    let mut flat = vec![0.0; n * n];
    for (from, to) in edges {
        let (i, j) = (pos(from)?, pos(to)?);
        flat[i * n + j] = 1.0;
        flat[j * n + i] = 1.0;
    }
    Ok(flat)
}

impl MlpModel {
    /// `hidden` lists the hidden widths; input and output widths follow
    /// from the node count.
    pub fn new<R: Rng + ?Sized>(
        node_order: Vec<String>,
        edges: Vec<(String, String)>,
        hidden: &[usize],
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        let n = node_order.len();
        let adjacency_flat = flat_adjacency(&edges, &node_order)?;
        let mut dims = vec![n + n * n];
        dims.extend_from_slice(hidden);
        dims.push(n);
        Ok(MlpModel {
            node_order,
            edges,
            adjacency_flat,
            weights: dims.windows(2).map(|w| glorot(w[0], w[1], rng)).collect(),
            biases: dims[1..].iter().map(|&d| DenseMatrix::zeros(1, d)).collect(),
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

    fn input(&self, x: &DenseMatrix) -> Result<DenseMatrix, NeuralError> {
        let n = self.n_nodes();
        if x.shape() != (n, 1) {
            return Err(NeuralError::DimensionMismatch {
                expected: format!("{n}x1"),
                found: format!("{}x{}", x.rows, x.cols),
            });
        }
        let mut data = x.data.clone();
        data.extend_from_slice(&self.adjacency_flat);
        Ok(DenseMatrix::from_vec(1, data.len(), data))
    }

    pub fn forward_raw(&self, x: &DenseMatrix) -> Result<DenseMatrix, NeuralError> {
        Ok(self.forward_cached(x)?.0)
    }

    pub(crate) fn forward_cached(&self, x: &DenseMatrix) -> Result<(DenseMatrix, MlpCache), NeuralError> {
        let last = self.weights.len() - 1;
        let mut h = self.input(x)?;
        let mut cache = MlpCache {
            inputs: Vec::with_capacity(self.weights.len()),
            pre: Vec::with_capacity(self.weights.len()),
        };
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = h.matmul(w);
            z.add_row(b);
            cache.inputs.push(h);
            h = if l == last { z.clone() } else { z.map(|v| v.max(0.0)) };
            cache.pre.push(z);
        }
        // Output row → column so both models return n×1.
        Ok((DenseMatrix::from_vec(h.cols, 1, h.data), cache))
    }

    pub(crate) fn backward(&self, cache: &MlpCache, dout: &DenseMatrix) -> Vec<DenseMatrix> {
        let layers = self.weights.len();
        let mut grads = vec![DenseMatrix::zeros(0, 0); 2 * layers];
        let mut g = DenseMatrix::from_vec(1, dout.rows, dout.data.clone());
        for l in (0..layers).rev() {
            grads[2 * l] = cache.inputs[l].t_matmul(&g);
            grads[2 * l + 1] = g.clone();
            if l > 0 {
                let dh = g.matmul_t(&self.weights[l]);
                g = relu_mask(&dh, &cache.pre[l - 1]);
            }
        }
        grads
    }

    /// Raw output and the sign of every hidden pre-activation.
    pub(crate) fn forward_pattern(&self, x: &DenseMatrix) -> Result<(DenseMatrix, Vec<bool>), NeuralError> {
        let (out, cache) = self.forward_cached(x)?;
        let hidden = cache.pre.len() - 1;
        let pattern = cache.pre[..hidden].iter().flat_map(|z| z.data.iter().map(|&v| v > 0.0)).collect();
        Ok((out, pattern))
    }

    pub(crate) fn params(&self) -> Vec<&DenseMatrix> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    pub(crate) fn params_mut(&mut self) -> Vec<&mut DenseMatrix> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w, b])
            .collect()
    }
}
