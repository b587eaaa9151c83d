//! Executable non-asymptotic guarantees: the per-axis classification and
//! model-selection bounds, and the full compound concentration bound, for
//! numeric evaluation and Monte Carlo validation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::KeyParameters;

/// Everything the bound formulas consume.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub key: KeyParameters,
    pub g_star: usize,
    pub m_star: usize,
    pub n: usize,
    pub d: usize,
    pub s_g: f64,
    pub s_m: f64,
    /// Parameter-accuracy radius of the compound event.
    pub t: f64,
}

impl BoundInputs {
    /// The bounds are only stated under AL.1, so admissibility is an error
    /// rather than a report here.
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.d < 1 {
            return Err(Error::InvalidParameters(format!(
                "dimensions must be >= 1, got n={}, d={}",
                self.n, self.d
            )));
        }
        if self.t <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "accuracy radius t must be positive, got {}",
                self.t
            )));
        }
        if !(self.s_g > 0.0 && self.s_g < self.key.delta_pi) {
            return Err(Error::AssumptionViolated(format!(
                "AL.1: S_g = {} must lie in ]0, {}[",
                self.s_g, self.key.delta_pi
            )));
        }
        if !(self.s_m > 0.0 && self.s_m < self.key.delta_rho) {
            return Err(Error::AssumptionViolated(format!(
                "AL.1: S_m = {} must lie in ]0, {}[",
                self.s_m, self.key.delta_rho
            )));
        }
        Ok(())
    }
}

/// A probability bound before and after clipping to [0,1]. Raw values aid
/// diagnostics at sizes where the formula exceeds 1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundValue {
    pub raw: f64,
    pub clipped: f64,
}

impl BoundValue {
    fn from_raw(raw: f64) -> Self {
        BoundValue {
            raw,
            clipped: raw.min(1.0),
        }
    }
}

fn axis_bound(count: usize, opposite: usize, delta: f64, s: f64, c_star: usize, p_min: f64) -> f64 {
    let deviation = 2.0 * count as f64 * (-0.5 * opposite as f64 * (delta - s).min(s).powi(2)).exp();
    let empty_class = c_star as f64 * (1.0 - p_min).powf(count as f64);
    deviation + empty_class
}

/// Bound on `P(g_hat != g* or z_hat not equivalent to z*)`:
/// `2n exp(-(d/2) min(delta_pi - S_g, S_g)^2) + g*(1 - pi_min)^n`.
pub fn prop1_row_bound(inputs: &BoundInputs) -> Result<BoundValue> {
    inputs.validate()?;
    Ok(BoundValue::from_raw(axis_bound(
        inputs.n,
        inputs.d,
        inputs.key.delta_pi,
        inputs.s_g,
        inputs.g_star,
        inputs.key.pi_min,
    )))
}

/// Column mirror of [`prop1_row_bound`] with `(n, d)` exchanged and
/// `(delta_rho, rho_min, S_m, m*)` in place of the row quantities.
pub fn prop1_col_bound(inputs: &BoundInputs) -> Result<BoundValue> {
    inputs.validate()?;
    Ok(BoundValue::from_raw(axis_bound(
        inputs.d,
        inputs.n,
        inputs.key.delta_rho,
        inputs.s_m,
        inputs.m_star,
        inputs.key.rho_min,
    )))
}

/// One term of the compound bound: coefficient times `exp(exponent)`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundTerm {
    pub name: &'static str,
    pub coefficient: f64,
    pub exponent: f64,
    pub value: f64,
}

impl BoundTerm {
    fn new(name: &'static str, coefficient: f64, exponent: f64) -> Self {
        BoundTerm {
            name,
            coefficient,
            exponent,
            value: coefficient * exponent.exp(),
        }
    }

    /// Natural log of the term, finite even where `value` underflows.
    pub fn ln_value(&self) -> f64 {
        self.coefficient.ln() + self.exponent
    }
}

/// Term-by-term evaluation of the compound concentration bound.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremBreakdown {
    pub terms: Vec<BoundTerm>,
    pub raw_total: f64,
    pub clipped_total: f64,
    /// log-sum-exp over the term logs; stays informative when every term
    /// underflows to zero in direct evaluation.
    pub ln_total: f64,
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + logs.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}

/// The full compound bound on
/// `P(g_hat != g* or m_hat != m* or z not equiv or w not equiv or
/// d_inf(theta_hat aligned, theta*) > t)`: doubled row/column
/// classification terms, the block-average accuracy terms for `alpha`, and
/// the proportion accuracy terms for `pi` and `rho`.
pub fn theorem1_bound(inputs: &BoundInputs) -> Result<TheoremBreakdown> {
    inputs.validate()?;
    let n = inputs.n as f64;
    let d = inputs.d as f64;
    let g = inputs.g_star as f64;
    let m = inputs.m_star as f64;
    let t = inputs.t;
    let key = &inputs.key;
    let pr = key.pi_min * key.rho_min;

    let terms = vec![
        BoundTerm::new(
            "row_deviation",
            4.0 * n,
            -0.5 * d * (key.delta_pi - inputs.s_g).min(inputs.s_g).powi(2),
        ),
        BoundTerm::new("row_empty_class", 2.0 * g, n * (1.0 - key.pi_min).ln()),
        BoundTerm::new(
            "col_deviation",
            4.0 * d,
            -0.5 * n * (key.delta_rho - inputs.s_m).min(inputs.s_m).powi(2),
        ),
        BoundTerm::new("col_empty_class", 2.0 * m, d * (1.0 - key.rho_min).ln()),
        BoundTerm::new("alpha_accuracy", 2.0 * g * m, -pr * n * d * t * t),
        BoundTerm::new("block_size_n", 4.0 * g * m, -pr * pr * n / 8.0),
        BoundTerm::new("block_size_d", 4.0 * g * m, -pr * pr * d / 8.0),
        BoundTerm::new("pi_accuracy", 2.0 * g, -2.0 * n * t * t),
        BoundTerm::new("rho_accuracy", 2.0 * m, -2.0 * d * t * t),
    ];
    let raw_total: f64 = terms.iter().map(|t| t.value).sum();
    let ln_total = log_sum_exp(&terms.iter().map(|t| t.ln_value()).collect::<Vec<_>>());
    Ok(TheoremBreakdown {
        clipped_total: raw_total.min(1.0),
        raw_total,
        ln_total,
        terms,
    })
}
