//! LBM parameter space, validation, key separability quantities and the
//! synthetic data sampler.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of a proportion vector. Sums off by more than this
/// are rejected rather than renormalized: silent renormalization hides
/// configuration bugs.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Row or column side of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => write!(f, "row"),
            Axis::Column => write!(f, "column"),
        }
    }
}

/// Full LBM parameter `theta = (pi, rho, alpha)`: class proportions for
/// rows and columns plus the `g x m` matrix of block Bernoulli means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LBMParameters {
    pub g: usize,
    pub m: usize,
    pub pi: Vec<f64>,
    pub rho: Vec<f64>,
    /// Row-major `g x m`.
    pub alpha: Vec<Vec<f64>>,
}

/// Outcome of one validation check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Report-valued validation outcome: one entry per invariant.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// First failing check, if any.
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }
}

fn proportion_checks(name: &str, count: usize, declared: usize, v: &[f64]) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    checks.push(CheckResult::new(
        &format!("{name}_length"),
        v.len() == declared && count == declared,
        format!("{name} has {} entries for {} classes", v.len(), declared),
    ));
    let sum: f64 = v.iter().sum();
    checks.push(CheckResult::new(
        &format!("{name}_sums_to_one"),
        (sum - 1.0).abs() <= PROB_SUM_TOL,
        format!("sum({name}) = {sum}"),
    ));
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(CheckResult::new(
        &format!("{name}_positive"),
        v.iter().all(|&p| p > 0.0),
        if min > 0.0 {
            format!("min({name}) = {min}")
        } else {
            format!("zero proportion violates M.1: min({name}) = {min}")
        },
    ));
    checks
}

impl LBMParameters {
    /// Checks every invariant and reports pass/fail per constraint.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = proportion_checks("pi", self.g, self.pi.len(), &self.pi);
        checks.extend(proportion_checks("rho", self.m, self.rho.len(), &self.rho));
        let shape_ok = self.alpha.len() == self.g && self.alpha.iter().all(|r| r.len() == self.m);
        checks.push(CheckResult::new(
            "alpha_shape",
            shape_ok,
            format!("alpha is {}x{} for g={}, m={}", self.alpha.len(),
                self.alpha.first().map_or(0, |r| r.len()), self.g, self.m),
        ));
        let range_ok = self
            .alpha
            .iter()
            .flatten()
            .all(|&a| (0.0..=1.0).contains(&a));
        checks.push(CheckResult::new(
            "alpha_range",
            range_ok,
            if range_ok {
                "all alpha entries in [0,1]".to_string()
            } else {
                "alpha outside [0,1]".to_string()
            },
        ));
        checks.push(CheckResult::new(
            "class_counts_positive",
            self.g >= 1 && self.m >= 1,
            format!("g = {}, m = {}", self.g, self.m),
        ));
        ValidationReport { checks }
    }

    /// Errors with the first violated constraint, for call sites that need
    /// valid parameters.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        match report.first_failure() {
            None => Ok(()),
            Some(c) => Err(Error::InvalidParameters(format!("{}: {}", c.name, c.detail))),
        }
    }
}

/// Class labels for one axis: one index in `{0, ..., class_count-1}` per
/// row (or column). Index form of the one-hot indicator matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelAssignment {
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl LabelAssignment {
    pub fn new(labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::InvalidParameters(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(LabelAssignment {
            labels,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of members per class.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.class_count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Binary indicator matrix, `indicator[i][k] = 1` iff `labels[i] = k`.
    pub fn to_indicator(&self) -> Vec<Vec<u8>> {
        self.labels
            .iter()
            .map(|&l| {
                let mut row = vec![0u8; self.class_count];
                row[l] = 1;
                row
            })
            .collect()
    }

    /// Inverse of [`to_indicator`]: each row must contain exactly one 1.
    pub fn from_indicator(indicator: &[Vec<u8>], class_count: usize) -> Result<Self> {
        let mut labels = Vec::with_capacity(indicator.len());
        for row in indicator {
            if row.len() != class_count {
                return Err(Error::LengthMismatch {
                    expected: class_count,
                    actual: row.len(),
                });
            }
            let ones: Vec<usize> = (0..class_count).filter(|&k| row[k] == 1).collect();
            match ones.as_slice() {
                [k] => labels.push(*k),
                _ => {
                    return Err(Error::Parse(
                        "indicator row must contain exactly one 1".to_string(),
                    ))
                }
            }
        }
        LabelAssignment::new(labels, class_count)
    }
}

/// Dense `n x d` matrix with entries in {0,1}, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    n: usize,
    d: usize,
    entries: Vec<u8>,
}

impl BinaryMatrix {
    pub fn new(n: usize, d: usize, entries: Vec<u8>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidParameters(format!(
                "matrix dimensions must be >= 1, got {n}x{d}"
            )));
        }
        if entries.len() != n * d {
            return Err(Error::LengthMismatch {
                expected: n * d,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|&e| e > 1) {
            return Err(Error::InvalidParameters(
                "matrix entries must be 0 or 1".to_string(),
            ));
        }
        Ok(BinaryMatrix { n, d, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.d + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut entries = vec![0u8; self.n * self.d];
        for i in 0..self.n {
            for j in 0..self.d {
                entries[j * self.n + i] = self.get(i, j);
            }
        }
        BinaryMatrix {
            n: self.d,
            d: self.n,
            entries,
        }
    }
}

/// Derived separability quantities driving gap detectability and the
/// concentration bounds: `tau = alpha * rho`, `xi = pi^T * alpha`, the
/// minimal pairwise separations `delta_pi`/`delta_rho` and the minimal
/// class proportions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyParameters {
    pub tau: Vec<f64>,
    pub xi: Vec<f64>,
    /// `min_{k != k'} |tau_k - tau_{k'}|`, `+inf` when `g = 1`.
    pub delta_pi: f64,
    /// `min_{l != l'} |xi_l - xi_{l'}|`, `+inf` when `m = 1`.
    pub delta_rho: f64,
    pub pi_min: f64,
    pub rho_min: f64,
}

fn min_pairwise_gap(values: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, &a) in values.iter().enumerate() {
        for &b in &values[i + 1..] {
            best = best.min((a - b).abs());
        }
    }
    best
}

/// Computes the key quantities from valid parameters.
pub fn compute_key_parameters(params: &LBMParameters) -> KeyParameters {
    let tau: Vec<f64> = (0..params.g)
        .map(|k| (0..params.m).map(|l| params.alpha[k][l] * params.rho[l]).sum())
        .collect();
    let xi: Vec<f64> = (0..params.m)
        .map(|l| (0..params.g).map(|k| params.pi[k] * params.alpha[k][l]).sum())
        .collect();
    KeyParameters {
        delta_pi: min_pairwise_gap(&tau),
        delta_rho: min_pairwise_gap(&xi),
        pi_min: params.pi.iter().cloned().fold(f64::INFINITY, f64::min),
        rho_min: params.rho.iter().cloned().fold(f64::INFINITY, f64::min),
        tau,
        xi,
    }
}

/// Pass/fail report on the model assumptions M.1, M.2 and the threshold
/// admissibility AL.1, each with the offending value when violated.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub m1: CheckResult,
    pub m2: CheckResult,
    pub al1_row: CheckResult,
    pub al1_col: CheckResult,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.m1.passed && self.m2.passed && self.al1_row.passed && self.al1_col.passed
    }
}

/// Checks M.1 (positive minimal proportions), M.2 (positive separations)
/// and AL.1 (thresholds strictly inside the admissible open intervals).
pub fn check_assumptions(
    key: &KeyParameters,
    _n: usize,
    _d: usize,
    s_g: f64,
    s_m: f64,
) -> AssumptionReport {
    let m1_ok = key.pi_min > 0.0 && key.rho_min > 0.0;
    let m2_ok = key.delta_pi > 0.0 && key.delta_rho > 0.0;
    let row_ok = s_g > 0.0 && s_g < key.delta_pi;
    let col_ok = s_m > 0.0 && s_m < key.delta_rho;
    AssumptionReport {
        m1: CheckResult::new(
            "M.1",
            m1_ok,
            format!("pi_min = {}, rho_min = {}", key.pi_min, key.rho_min),
        ),
        m2: CheckResult::new(
            "M.2",
            m2_ok,
            format!("delta_pi = {}, delta_rho = {}", key.delta_pi, key.delta_rho),
        ),
        al1_row: CheckResult::new(
            "AL.1-row",
            row_ok,
            format!("S_g = {} must lie in ]0, {}[", s_g, key.delta_pi),
        ),
        al1_col: CheckResult::new(
            "AL.1-col",
            col_ok,
            format!("S_m = {} must lie in ]0, {}[", s_m, key.delta_rho),
        ),
    }
}

/// Uniform f64 in [0,1) from the top 53 bits of one generator word.
#[inline]
fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF categorical draw over the proportion vector in index order,
/// so the result does not depend on library internals.
#[inline]
fn categorical(rng: &mut ChaCha8Rng, proportions: &[f64]) -> usize {
    let u = uniform_f64(rng);
    let mut cum = 0.0;
    for (k, &p) in proportions.iter().enumerate() {
        cum += p;
        if u < cum {
            return k;
        }
    }
    proportions.len() - 1
}

/// Samples `(z, w, x)` from the LBM: `z_i ~ categorical(pi)`,
/// `w_j ~ categorical(rho)`, then `x_ij ~ Bernoulli(alpha[z_i][w_j])`
/// independently across cells. Deterministic given `(params, n, d, seed)`;
/// the stream order is z first, then w, then x row-major.
pub fn sample(
    params: &LBMParameters,
    n: usize,
    d: usize,
    seed: u64,
) -> Result<(LabelAssignment, LabelAssignment, BinaryMatrix)> {
    params.ensure_valid()?;
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameters(format!(
            "sample dimensions must be >= 1, got {n}x{d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<usize> = (0..n).map(|_| categorical(&mut rng, &params.pi)).collect();
    let w: Vec<usize> = (0..d).map(|_| categorical(&mut rng, &params.rho)).collect();

    // 64-bit integer thresholds: x_ij = 1 iff next_u64 < alpha * 2^64.
    // One generator word per cell, no float comparison in the hot loop.
    let thresholds: Vec<Vec<u64>> = params
        .alpha
        .iter()
        .map(|row| {
            row.iter()
                .map(|&a| {
                    if a >= 1.0 {
                        u64::MAX
                    } else {
                        (a * 18_446_744_073_709_551_616.0) as u64
                    }
                })
                .collect()
        })
        .collect();
    let all_ones: Vec<bool> = params
        .alpha
        .iter()
        .map(|row| row.iter().all(|&a| a >= 1.0))
        .collect();

    let mut entries = vec![0u8; n * d];
    for i in 0..n {
        let trow = &thresholds[z[i]];
        let saturated = all_ones[z[i]];
        let out = &mut entries[i * d..(i + 1) * d];
        for j in 0..d {
            let t = trow[w[j]];
            out[j] = if saturated || t == u64::MAX {
                // Bernoulli(1) is degenerate; still consume one word to keep
                // the stream position independent of alpha.
                rng.next_u64();
                1
            } else {
                u8::from(rng.next_u64() < t)
            };
        }
    }

    Ok((
        LabelAssignment {
            labels: z,
            class_count: params.g,
        },
        LabelAssignment {
            labels: w,
            class_count: params.m,
        },
        BinaryMatrix { n, d, entries },
    ))
}

/// Output of the full Largest Gaps fit: selected class counts, labels,
/// estimated parameters, the thresholds used and the sorted-order cut
/// positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub g_hat: usize,
    pub m_hat: usize,
    pub z_hat: LabelAssignment,
    pub w_hat: LabelAssignment,
    pub theta_hat: LBMParameters,
    pub s_g: f64,
    pub s_m: f64,
    pub cut_positions_rows: Vec<usize>,
    pub cut_positions_cols: Vec<usize>,
}
