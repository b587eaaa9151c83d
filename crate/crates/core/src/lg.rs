//! The Largest Gaps procedure: marginal means, gap profiles, 1-d gap
//! clustering, the four threshold schedules and the combined fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::estimate_parameters;
use crate::model::{Axis, BinaryMatrix, FitResult, KeyParameters, LabelAssignment};

/// Sorted marginal means together with the sort permutation and the
/// consecutive jumps `gaps[i] = sorted[i+1] - sorted[i]`.
#[derive(Debug, Clone)]
pub struct GapProfile {
    pub sorted_values: Vec<f64>,
    /// `sort_permutation[p]` is the original index of sorted position `p`.
    pub sort_permutation: Vec<usize>,
    pub gaps: Vec<f64>,
}

/// Normalized row sums `x_{i+}/d`. Integer accumulation per row, one
/// division at the end, so the pass touches each entry exactly once.
pub fn row_means(x: &BinaryMatrix) -> Vec<f64> {
    let d = x.d() as f64;
    (0..x.n())
        .map(|i| x.row(i).iter().map(|&e| u64::from(e)).sum::<u64>() as f64 / d)
        .collect()
}

/// Normalized column sums `x_{+j}/n`, accumulated per column in a single
/// row-major pass.
pub fn column_means(x: &BinaryMatrix) -> Vec<f64> {
    let mut sums = vec![0u64; x.d()];
    for i in 0..x.n() {
        for (s, &e) in sums.iter_mut().zip(x.row(i)) {
            *s += u64::from(e);
        }
    }
    let n = x.n() as f64;
    sums.into_iter().map(|s| s as f64 / n).collect()
}

/// Ascending stable sort of the values followed by the jump computation.
pub fn build_gap_profile(values: &[f64]) -> Result<GapProfile> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable: ties keep original relative order.
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("non-NaN values"));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let gaps: Vec<f64> = sorted_values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(GapProfile {
        sorted_values,
        sort_permutation: order,
        gaps,
    })
}

/// One-dimensional gap clustering outcome.
#[derive(Debug, Clone)]
pub struct Clustering1d {
    pub count: usize,
    pub labels: LabelAssignment,
    /// Sorted positions `i` with `gaps[i] > threshold` (cut between sorted
    /// positions `i` and `i+1`).
    pub cut_positions: Vec<usize>,
}

/// Splits the sorted values at every gap strictly greater than the
/// threshold. Classes are numbered in ascending order of segment means,
/// which coincides with sorted-segment order.
pub fn cluster_1d(values: &[f64], threshold: f64) -> Result<Clustering1d> {
    if threshold <= 0.0 {
        return Err(Error::Threshold(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let profile = build_gap_profile(values)?;
    let cut_positions: Vec<usize> = profile
        .gaps
        .iter()
        .enumerate()
        .filter(|&(_, &gap)| gap > threshold)
        .map(|(i, _)| i)
        .collect();
    let count = cut_positions.len() + 1;
    let mut labels = vec![0usize; values.len()];
    let mut class = 0usize;
    let mut cuts = cut_positions.iter().peekable();
    for (pos, &orig) in profile.sort_permutation.iter().enumerate() {
        labels[orig] = class;
        if cuts.peek() == Some(&&pos) {
            class += 1;
            cuts.next();
        }
    }
    Ok(Clustering1d {
        count,
        labels: LabelAssignment {
            labels,
            class_count: count,
        },
        cut_positions,
    })
}

/// The four threshold schedules studied in the simulation design. The
/// constant schedule is the oracle `delta/2` and needs the key parameters;
/// the three scalable schedules depend only on the matrix dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdStrategy {
    /// `delta_pi/2` for rows, `delta_rho/2` for columns (S1).
    Constant,
    /// `sqrt(2 ln(count)/opposite + 1e-10)` (S2). The additive term keeps
    /// the threshold positive when `ln(count)/opposite` underflows.
    LowerLimit,
    /// `2 sqrt(2 ln(count)/opposite)` (S3).
    MiddleLimit,
    /// `(ln(count)/opposite)^(1/4)` (S4).
    UpperLimit,
}

/// Resolves a strategy to a numeric threshold for one axis. For rows,
/// `count = n` and `opposite = d`; for columns the roles are exchanged and
/// `delta_rho` replaces `delta_pi`.
pub fn threshold_value(
    strategy: ThresholdStrategy,
    axis: Axis,
    n: usize,
    d: usize,
    key: Option<&KeyParameters>,
) -> Result<f64> {
    let (count, opposite) = match axis {
        Axis::Row => (n as f64, d as f64),
        Axis::Column => (d as f64, n as f64),
    };
    let value = match strategy {
        ThresholdStrategy::Constant => {
            let key = key.ok_or_else(|| {
                Error::Threshold("constant strategy requires key parameters".to_string())
            })?;
            let delta = match axis {
                Axis::Row => key.delta_pi,
                Axis::Column => key.delta_rho,
            };
            if !delta.is_finite() || delta <= 0.0 {
                return Err(Error::Threshold(format!(
                    "constant strategy requires finite positive delta, got {delta}"
                )));
            }
            delta / 2.0
        }
        ThresholdStrategy::LowerLimit => (2.0 * count.ln() / opposite + 1e-10).sqrt(),
        ThresholdStrategy::MiddleLimit => 2.0 * (2.0 * count.ln() / opposite).sqrt(),
        ThresholdStrategy::UpperLimit => (count.ln() / opposite).powf(0.25),
    };
    if value <= 0.0 {
        return Err(Error::Threshold(format!(
            "{strategy:?} produced nonpositive threshold {value} for count {count}"
        )));
    }
    Ok(value)
}

/// Full Largest Gaps fit: gap-clusters the row means with `s_g`, the
/// column means with `s_m`, then estimates `theta` by block averaging.
pub fn largest_gaps_fit(x: &BinaryMatrix, s_g: f64, s_m: f64) -> Result<FitResult> {
    let rows = cluster_1d(&row_means(x), s_g)?;
    let cols = cluster_1d(&column_means(x), s_m)?;
    let theta_hat = estimate_parameters(x, &rows.labels, &cols.labels)?;
    Ok(FitResult {
        g_hat: rows.count,
        m_hat: cols.count,
        z_hat: rows.labels,
        w_hat: cols.labels,
        theta_hat,
        s_g,
        s_m,
        cut_positions_rows: rows.cut_positions,
        cut_positions_cols: cols.cut_positions,
    })
}
