use serde::{Deserialize, Serialize};

use super::NeuralError;

/// Regression error summary. `r2` is NaN when the truth is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub r2: f64,
}

impl Metrics {
    pub fn r2_defined(&self) -> bool {
        !self.r2.is_nan()
    }
}

pub fn evaluate(pred: &[f64], truth: &[f64]) -> Result<Metrics, NeuralError> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(NeuralError::LengthMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let (mut sse, mut sae, mut sst) = (0.0, 0.0, 0.0);
    for (p, y) in pred.iter().zip(truth) {
        let e = y - p;
        sse += e * e;
        sae += e.abs();
        sst += (y - mean) * (y - mean);
    }
    let mse = sse / n;
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { f64::NAN };
    Ok(Metrics {
        mse,
        rmse: mse.sqrt(),
        mae: sae / n,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit() {
        let m = evaluate(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!((m.mse, m.rmse, m.mae, m.r2), (0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn mean_predictor_scores_zero() {
        let m = evaluate(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.r2, 0.0);
    }

    #[test]
    fn hand_example() {
        let m = evaluate(&[0.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).unwrap();
        assert!((m.mse - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.rmse - 0.57735).abs() < 5e-6);
        assert!((m.mae - 1.0 / 3.0).abs() < 1e-15);
        // SSE = 1, SST = 2.
        assert!((m.r2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn errors_and_constant_truth() {
        assert!(evaluate(&[1.0], &[1.0, 2.0]).is_err());
        assert!(evaluate(&[], &[]).is_err());
        assert!(!evaluate(&[1.0, 2.0], &[3.0, 3.0]).unwrap().r2_defined());
    }
}
