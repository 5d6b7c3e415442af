//! Orthonormal regularization `|W^T W - I|_F^2`, the baseline MHE is compared
//! against. Columns of `W` are the neurons.

use crate::error::{MheError, Result};
use crate::neurons::dot;

/// Returns `|W^T W - I|_F^2` and its gradient `4 W (W^T W - I)`, one gradient
/// vector per column.
pub fn orthonormal_reg(columns: &[Vec<f64>]) -> Result<(f64, Vec<Vec<f64>>)> {
    let n = columns.len();
    let dim = columns.first().map(Vec::len).ok_or(MheError::TooFewNeurons {
        required: 1,
        found: 0,
    })?;
    if let Some(bad) = columns.iter().find(|c| c.len() != dim) {
        return Err(MheError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }

    // residual = W^T W - I
    let mut residual = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let g = dot(&columns[i], &columns[j]) - if i == j { 1.0 } else { 0.0 };
            residual[i * n + j] = g;
            residual[j * n + i] = g;
        }
    }
    let value = residual.iter().map(|r| r * r).sum();

    let grad = (0..n)
        .map(|j| {
            let mut g = vec![0.0; dim];
            for (i, col) in columns.iter().enumerate() {
                let r = 4.0 * residual[i * n + j];
                for (gk, wk) in g.iter_mut().zip(col) {
                    *gk += r * wk;
                }
            }
            g
        })
        .collect();
    Ok((value, grad))
}
