//! Label-switching-aware comparison: equivalence up to a class
//! permutation, the alignment permutation, the sup-norm parameter distance
//! and the compound success event.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FitResult, LBMParameters, LabelAssignment};

/// Result of aligning an estimated labeling with the truth.
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentResult {
    /// True iff some class permutation makes the labelings identical.
    pub equivalent: bool,
    /// `permutation[k]` is the true class matched to estimated class `k`.
    /// Absent when the class counts differ.
    pub permutation: Option<Vec<usize>>,
    /// Fraction of indices whose permuted estimated label equals the true
    /// label, maximized over all bijections. Zero when counts differ.
    pub agreement: f64,
}

/// Maximum-weight bijection on the confusion matrix via subset dynamic
/// programming, O(2^c * c^2). Returns (assignment est -> true, weight).
fn best_assignment(confusion: &[Vec<usize>], c: usize) -> (Vec<usize>, usize) {
    // best[mask] = max weight assigning the first popcount(mask) estimated
    // classes to the true classes in `mask`.
    let full = 1usize << c;
    let mut best = vec![0usize; full];
    let mut choice = vec![usize::MAX; full];
    let mut reachable = vec![false; full];
    reachable[0] = true;
    for mask in 0..full - 1 {
        if !reachable[mask] {
            continue;
        }
        let k = mask.count_ones() as usize;
        for l in 0..c {
            if mask & (1 << l) != 0 {
                continue;
            }
            let next = mask | (1 << l);
            let w = best[mask] + confusion[k][l];
            if !reachable[next] || w > best[next] {
                best[next] = w;
                choice[next] = l;
                reachable[next] = true;
            }
        }
    }
    let mut assignment = vec![0usize; c];
    let mut mask = full - 1;
    for k in (0..c).rev() {
        let l = choice[mask];
        assignment[k] = l;
        mask &= !(1 << l);
    }
    (assignment, best[full - 1])
}

/// Finds the class permutation maximizing label agreement. When the class
/// counts differ the labelings are not equivalent and no permutation is
/// reported.
pub fn align_labels(
    estimated: &LabelAssignment,
    truth: &LabelAssignment,
) -> Result<AlignmentResult> {
    if estimated.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: estimated.len(),
        });
    }
    if estimated.class_count != truth.class_count {
        return Ok(AlignmentResult {
            equivalent: false,
            permutation: None,
            agreement: 0.0,
        });
    }
    let c = estimated.class_count;
    let mut confusion = vec![vec![0usize; c]; c];
    for (&e, &t) in estimated.labels.iter().zip(&truth.labels) {
        confusion[e][t] += 1;
    }
    let (permutation, weight) = best_assignment(&confusion, c);
    let agreement = weight as f64 / estimated.len() as f64;
    Ok(AlignmentResult {
        equivalent: weight == estimated.len(),
        permutation: Some(permutation),
        agreement,
    })
}

fn check_bijection(perm: &[usize], size: usize) -> Result<()> {
    let mut seen = vec![false; size];
    if perm.len() != size {
        return Err(Error::InvalidParameters(format!(
            "permutation length {} does not match class count {size}",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= size || seen[p] {
            return Err(Error::InvalidParameters(
                "malformed permutation".to_string(),
            ));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Inverse of a bijection on `{0, ..., len-1}`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// The distance `d_inf`: `+inf` when the class counts differ, otherwise
/// the max of the three sup-norm differences after permuting `theta_a` by
/// `(row_perm, col_perm)` (the `theta^{s,t}` construction: component `k`
/// of the permuted parameter is component `row_perm[k]` of the original).
pub fn dinf_distance(
    theta_a: &LBMParameters,
    theta_b: &LBMParameters,
    row_perm: Option<&[usize]>,
    col_perm: Option<&[usize]>,
) -> Result<f64> {
    if theta_a.g != theta_b.g || theta_a.m != theta_b.m {
        return Ok(f64::INFINITY);
    }
    let g = theta_a.g;
    let m = theta_a.m;
    let identity_g: Vec<usize> = (0..g).collect();
    let identity_m: Vec<usize> = (0..m).collect();
    let s = row_perm.unwrap_or(&identity_g);
    let t = col_perm.unwrap_or(&identity_m);
    check_bijection(s, g)?;
    check_bijection(t, m)?;

    let pi: Vec<f64> = s.iter().map(|&k| theta_a.pi[k]).collect();
    let rho: Vec<f64> = t.iter().map(|&l| theta_a.rho[l]).collect();
    let mut alpha_diff = 0.0f64;
    for k in 0..g {
        for l in 0..m {
            alpha_diff = alpha_diff.max((theta_a.alpha[s[k]][t[l]] - theta_b.alpha[k][l]).abs());
        }
    }
    Ok(sup_diff(&pi, &theta_b.pi)
        .max(sup_diff(&rho, &theta_b.rho))
        .max(alpha_diff))
}

/// Sub-events of the compound failure event of the concentration bound.
#[derive(Debug, Clone, Serialize)]
pub struct EventRecord {
    pub g_mismatch: bool,
    pub m_mismatch: bool,
    pub z_not_equivalent: bool,
    pub w_not_equivalent: bool,
    /// Aligned parameter distance; `+inf` when either equivalence fails.
    pub dinf: f64,
    pub dinf_exceeds: bool,
    /// True iff any sub-event holds.
    pub compound_failure: bool,
}

/// Evaluates the compound event: class-count mismatch, label
/// non-equivalence on either axis, or aligned parameter distance above
/// `t`. The distance is evaluated with the alignment permutations when
/// both equivalences hold and recorded as a failure otherwise.
pub fn joint_success(
    fit: &FitResult,
    truth_z: &LabelAssignment,
    truth_w: &LabelAssignment,
    truth_theta: &LBMParameters,
    t: f64,
) -> Result<EventRecord> {
    let rows = align_labels(&fit.z_hat, truth_z)?;
    let cols = align_labels(&fit.w_hat, truth_w)?;
    let g_mismatch = fit.g_hat != truth_theta.g;
    let m_mismatch = fit.m_hat != truth_theta.m;
    let dinf = if rows.equivalent && cols.equivalent {
        // The alignment maps estimated class k to true class p[k]; the
        // theta^{s,t} construction reads component s(k) of the estimate,
        // so s is the inverse map.
        let s = invert_permutation(rows.permutation.as_ref().expect("equivalent"));
        let tt = invert_permutation(cols.permutation.as_ref().expect("equivalent"));
        dinf_distance(&fit.theta_hat, truth_theta, Some(&s), Some(&tt))?
    } else {
        f64::INFINITY
    };
    let dinf_exceeds = dinf > t;
    Ok(EventRecord {
        g_mismatch,
        m_mismatch,
        z_not_equivalent: !rows.equivalent,
        w_not_equivalent: !cols.equivalent,
        dinf,
        dinf_exceeds,
        compound_failure: g_mismatch
            || m_mismatch
            || !rows.equivalent
            || !cols.equivalent
            || dinf_exceeds,
    })
}
