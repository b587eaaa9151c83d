//! Closed-form parameter estimation from a data matrix and a pair of label
//! assignments.

use crate::error::{Error, Result};
use crate::model::{Axis, BinaryMatrix, LBMParameters, LabelAssignment};

/// Estimates `(pi, rho, alpha)` given labels: class proportions are member
/// counts over `n` (resp. `d`) and `alpha[k][l]` is the mean of `x` over
/// the `(k,l)` block. Block sums accumulate in integers over one matrix
/// pass, dividing once at the end.
pub fn estimate_parameters(
    x: &BinaryMatrix,
    z: &LabelAssignment,
    w: &LabelAssignment,
) -> Result<LBMParameters> {
    if z.len() != x.n() {
        return Err(Error::LengthMismatch {
            expected: x.n(),
            actual: z.len(),
        });
    }
    if w.len() != x.d() {
        return Err(Error::LengthMismatch {
            expected: x.d(),
            actual: w.len(),
        });
    }
    let g = z.class_count;
    let m = w.class_count;
    let row_sizes = z.class_sizes();
    let col_sizes = w.class_sizes();
    if let Some(k) = row_sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyClass {
            axis: Axis::Row,
            class: k,
        });
    }
    if let Some(l) = col_sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyClass {
            axis: Axis::Column,
            class: l,
        });
    }

    let mut block_sums = vec![0u64; g * m];
    for i in 0..x.n() {
        let k = z.labels[i];
        let row = x.row(i);
        for (j, &e) in row.iter().enumerate() {
            block_sums[k * m + w.labels[j]] += u64::from(e);
        }
    }

    let alpha = (0..g)
        .map(|k| {
            (0..m)
                .map(|l| block_sums[k * m + l] as f64 / (row_sizes[k] * col_sizes[l]) as f64)
                .collect()
        })
        .collect();
    let pi = row_sizes.iter().map(|&s| s as f64 / x.n() as f64).collect();
    let rho = col_sizes.iter().map(|&s| s as f64 / x.d() as f64).collect();
    Ok(LBMParameters {
        g,
        m,
        pi,
        rho,
        alpha,
    })
}
