//! Monte Carlo study harness: design generators, grids over
//! `(n, d, epsilon, threshold strategy)`, deterministic replicate
//! execution and aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::joint_success;
use crate::lg::{largest_gaps_fit, threshold_value, ThresholdStrategy};
use crate::model::{compute_key_parameters, sample, Axis, LBMParameters};
use crate::seed::stable_seed;

/// The two proportion regimes of the simulation design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    Balanced,
    Arithmetic,
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Design::Balanced => write!(f, "balanced"),
            Design::Arithmetic => write!(f, "arithmetic"),
        }
    }
}

impl std::str::FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(Design::Balanced),
            "arithmetic" => Ok(Design::Arithmetic),
            other => Err(Error::Parse(format!("unknown design {other:?}"))),
        }
    }
}

/// Named threshold schedule of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyId {
    S1,
    S2,
    S3,
    S4,
}

impl StrategyId {
    pub const ALL: [StrategyId; 4] = [StrategyId::S1, StrategyId::S2, StrategyId::S3, StrategyId::S4];

    pub fn strategy(self) -> ThresholdStrategy {
        match self {
            StrategyId::S1 => ThresholdStrategy::Constant,
            StrategyId::S2 => ThresholdStrategy::LowerLimit,
            StrategyId::S3 => ThresholdStrategy::MiddleLimit,
            StrategyId::S4 => ThresholdStrategy::UpperLimit,
        }
    }

    fn index(self) -> u64 {
        match self {
            StrategyId::S1 => 1,
            StrategyId::S2 => 2,
            StrategyId::S3 => 3,
            StrategyId::S4 => 4,
        }
    }
}

impl std::fmt::Display for StrategyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S{}", self.index())
    }
}

impl std::str::FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S1" | "s1" => Ok(StrategyId::S1),
            "S2" | "s2" => Ok(StrategyId::S2),
            "S3" | "s3" => Ok(StrategyId::S3),
            "S4" | "s4" => Ok(StrategyId::S4),
            other => Err(Error::Parse(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Grid specification for one study run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub design: Design,
    pub epsilons: Vec<f64>,
    pub n_values: Vec<usize>,
    pub d_values: Vec<usize>,
    pub strategies: Vec<StrategyId>,
    pub replicates: usize,
    pub master_seed: u64,
    /// Accuracy radius of the compound event.
    #[serde(default = "default_t")]
    pub t: f64,
}

fn default_t() -> f64 {
    0.1
}

impl ExperimentConfig {
    /// Desk-scale replica of the full study grid: the full grid (20..4000
    /// step 20, 1000 replicates) remains expressible in a config file.
    pub fn desk_default(design: Design) -> Self {
        ExperimentConfig {
            design,
            epsilons: vec![0.05, 0.1, 0.15, 0.2, 0.25],
            n_values: vec![100, 200, 400, 800, 1600],
            d_values: vec![100, 200, 400, 800, 1600],
            strategies: StrategyId::ALL.to_vec(),
            replicates: 200,
            master_seed: 20170,
            t: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::InvalidConfig("replicates must be >= 1".to_string()));
        }
        if let Some(&bad) = self
            .epsilons
            .iter()
            .find(|&&e| !(e > 0.0 && e < 0.5))
        {
            return Err(Error::InvalidConfig(format!(
                "epsilon {bad} outside (0, 0.5)"
            )));
        }
        if let Some(&bad) = self
            .n_values
            .iter()
            .chain(&self.d_values)
            .find(|&&v| v < 2)
        {
            return Err(Error::InvalidConfig(format!("dimension {bad} < 2")));
        }
        if self.t <= 0.0 {
            return Err(Error::InvalidConfig(format!("t = {} must be > 0", self.t)));
        }
        Ok(())
    }
}

/// One simulated-and-fitted replicate.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRecord {
    pub design: Design,
    pub epsilon: f64,
    pub n: usize,
    pub d: usize,
    pub strategy: StrategyId,
    pub replicate_index: usize,
    pub seed: u64,
    pub g_hat: usize,
    pub m_hat: usize,
    pub g_correct: bool,
    pub m_correct: bool,
    pub z_equivalent: bool,
    pub w_equivalent: bool,
    pub dinf: f64,
    pub compound_failure: bool,
    /// Wall time of the fit alone. Diagnostic only: excluded from the
    /// records CSV so that identical configs produce identical bytes.
    pub fit_millis: f64,
}

/// True parameters of the study design: `g* = 5`, `m* = 4`, the staircase
/// `alpha*` template (row `k` has `k-1` entries `1 - epsilon` then `epsilon`)
/// and the proportion regime.
pub fn design_parameters(design: Design, epsilon: f64) -> Result<LBMParameters> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameters(format!(
            "epsilon {epsilon} outside (0, 0.5)"
        )));
    }
    let (g, m) = (5, 4);
    let alpha = (0..g)
        .map(|k| {
            (0..m)
                .map(|l| if l < k { 1.0 - epsilon } else { epsilon })
                .collect()
        })
        .collect();
    let (pi, rho) = match design {
        Design::Balanced => (vec![0.2; 5], vec![0.25; 4]),
        Design::Arithmetic => (vec![0.1, 0.15, 0.2, 0.25, 0.3], vec![0.1, 0.2, 0.3, 0.4]),
    };
    Ok(LBMParameters {
        g,
        m,
        pi,
        rho,
        alpha,
    })
}

/// Seed of replicate `r` in cell `(design, epsilon, n, d, strategy)`.
/// Epsilon enters as micro-units so the derivation is exact for the grid
/// values in use.
pub fn replicate_seed(
    master_seed: u64,
    design: Design,
    epsilon: f64,
    n: usize,
    d: usize,
    strategy: StrategyId,
    replicate: usize,
) -> u64 {
    let design_tag = match design {
        Design::Balanced => 1u64,
        Design::Arithmetic => 2u64,
    };
    stable_seed(&[
        master_seed,
        design_tag,
        (epsilon * 1e6).round() as u64,
        n as u64,
        d as u64,
        strategy.index(),
        replicate as u64,
    ])
}

struct Cell {
    epsilon: f64,
    n: usize,
    d: usize,
    strategy: StrategyId,
    params: LBMParameters,
    s_g: f64,
    s_m: f64,
}

fn build_cells(config: &ExperimentConfig) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for &epsilon in &config.epsilons {
        let params = design_parameters(config.design, epsilon)?;
        let key = compute_key_parameters(&params);
        for &n in &config.n_values {
            for &d in &config.d_values {
                for &strategy in &config.strategies {
                    let s_g =
                        threshold_value(strategy.strategy(), Axis::Row, n, d, Some(&key))?;
                    let s_m =
                        threshold_value(strategy.strategy(), Axis::Column, n, d, Some(&key))?;
                    cells.push(Cell {
                        epsilon,
                        n,
                        d,
                        strategy,
                        params: params.clone(),
                        s_g,
                        s_m,
                    });
                }
            }
        }
    }
    Ok(cells)
}

fn run_replicate(config: &ExperimentConfig, cell: &Cell, replicate: usize) -> Result<ReplicateRecord> {
    let seed = replicate_seed(
        config.master_seed,
        config.design,
        cell.epsilon,
        cell.n,
        cell.d,
        cell.strategy,
        replicate,
    );
    let (z, w, x) = sample(&cell.params, cell.n, cell.d, seed)?;
    let start = std::time::Instant::now();
    let fit = largest_gaps_fit(&x, cell.s_g, cell.s_m)?;
    let fit_millis = start.elapsed().as_secs_f64() * 1e3;
    let event = joint_success(&fit, &z, &w, &cell.params, config.t)?;
    Ok(ReplicateRecord {
        design: config.design,
        epsilon: cell.epsilon,
        n: cell.n,
        d: cell.d,
        strategy: cell.strategy,
        replicate_index: replicate,
        seed,
        g_hat: fit.g_hat,
        m_hat: fit.m_hat,
        g_correct: fit.g_hat == cell.params.g,
        m_correct: fit.m_hat == cell.params.m,
        z_equivalent: !event.z_not_equivalent,
        w_equivalent: !event.w_not_equivalent,
        dinf: event.dinf,
        compound_failure: event.compound_failure,
        fit_millis,
    })
}

/// Runs every grid cell and replicate, in parallel across replicates, and
/// returns records in canonical order (grid cell, then replicate index).
/// Each replicate seeds its own generator, so the output is a pure
/// function of the config regardless of thread count or schedule.
pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<ReplicateRecord>> {
    config.validate()?;
    let cells = build_cells(config)?;
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.replicates).map(move |r| (c, r)))
        .collect();
    let mut records = tasks
        .par_iter()
        .map(|&(c, r)| run_replicate(config, &cells[c], r).map(|rec| (c, r, rec)))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|&(c, r, _)| (c, r));
    Ok(records.into_iter().map(|(_, _, rec)| rec).collect())
}

/// One aggregate row per grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub design: Design,
    pub epsilon: f64,
    pub n: usize,
    pub d: usize,
    pub strategy: StrategyId,
    pub replicates: usize,
    pub g_correct_rate: f64,
    pub m_correct_rate: f64,
    pub z_equivalent_rate: f64,
    pub w_equivalent_rate: f64,
    pub compound_success_rate: f64,
    /// Mean distance over replicates where the compound event succeeded;
    /// NaN when none did.
    pub mean_dinf_success: f64,
}

fn cell_key(r: &ReplicateRecord) -> (Design, u64, usize, usize, StrategyId) {
    (r.design, (r.epsilon * 1e6).round() as u64, r.n, r.d, r.strategy)
}

/// Groups records by grid cell and emits success proportions, suitable for
/// heat-map plotting.
pub fn summarize(records: &[ReplicateRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let key = cell_key(&records[start]);
        let mut end = start;
        while end < records.len() && cell_key(&records[end]) == key {
            end += 1;
        }
        let group = &records[start..end];
        let count = group.len() as f64;
        let frac = |pred: fn(&ReplicateRecord) -> bool| {
            group.iter().filter(|r| pred(r)).count() as f64 / count
        };
        let successes: Vec<&ReplicateRecord> =
            group.iter().filter(|r| !r.compound_failure).collect();
        let mean_dinf = if successes.is_empty() {
            f64::NAN
        } else {
            successes.iter().map(|r| r.dinf).sum::<f64>() / successes.len() as f64
        };
        let first = &group[0];
        rows.push(SummaryRow {
            design: first.design,
            epsilon: first.epsilon,
            n: first.n,
            d: first.d,
            strategy: first.strategy,
            replicates: group.len(),
            g_correct_rate: frac(|r| r.g_correct),
            m_correct_rate: frac(|r| r.m_correct),
            z_equivalent_rate: frac(|r| r.z_equivalent),
            w_equivalent_rate: frac(|r| r.w_equivalent),
            compound_success_rate: frac(|r| !r.compound_failure),
            mean_dinf_success: mean_dinf,
        });
        start = end;
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compute_key_parameters;

    #[test]
    fn balanced_design_matches_template() {
        let p = design_parameters(Design::Balanced, 0.05).unwrap();
        assert_eq!(p.pi, vec![0.2; 5]);
        assert_eq!(p.rho, vec![0.25; 4]);
        assert_eq!(p.alpha[0][0], 0.05);
        assert_eq!(p.alpha[4][3], 0.95);
        assert_eq!(p.alpha[2], vec![0.95, 0.95, 0.05, 0.05]);
        assert!(p.validate().is_valid());
    }

    #[test]
    fn arithmetic_design_proportions() {
        let p = design_parameters(Design::Arithmetic, 0.1).unwrap();
        assert_eq!(p.pi, vec![0.1, 0.15, 0.2, 0.25, 0.3]);
        assert_eq!(p.rho, vec![0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn balanced_delta_pi_is_closed_form() {
        for &eps in &[0.05, 0.1, 0.15, 0.2, 0.25] {
            let key = compute_key_parameters(&design_parameters(Design::Balanced, eps).unwrap());
            assert!(
                (key.delta_pi - (0.25 - 0.5 * eps)).abs() < 1e-12,
                "eps = {eps}: delta_pi = {}",
                key.delta_pi
            );
            assert!((key.pi_min - 0.2).abs() < 1e-15);
        }
        let key = compute_key_parameters(&design_parameters(Design::Balanced, 0.05).unwrap());
        assert!((key.delta_rho - 0.18).abs() < 1e-12);
    }

    #[test]
    fn arithmetic_delta_pi_is_closed_form() {
        for &eps in &[0.05, 0.1, 0.2] {
            let key =
                compute_key_parameters(&design_parameters(Design::Arithmetic, eps).unwrap());
            assert!(
                (key.delta_pi - (0.1 - 0.2 * eps)).abs() < 1e-12,
                "eps = {eps}: delta_pi = {}",
                key.delta_pi
            );
            assert!((key.pi_min - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn out_of_range_epsilon_rejected() {
        assert!(design_parameters(Design::Balanced, 0.0).is_err());
        assert!(design_parameters(Design::Balanced, 0.5).is_err());
    }

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            design: Design::Balanced,
            epsilons: vec![0.1],
            n_values: vec![60],
            d_values: vec![80],
            strategies: vec![StrategyId::S1],
            replicates: 3,
            master_seed: 5,
            t: 0.1,
        }
    }

    #[test]
    fn empty_epsilons_give_zero_records() {
        let mut c = tiny_config();
        c.epsilons.clear();
        assert!(run_grid(&c).unwrap().is_empty());
        assert!(summarize(&[]).is_empty());
    }

    #[test]
    fn run_grid_is_deterministic() {
        let c = tiny_config();
        let a = run_grid(&c).unwrap();
        let b = run_grid(&c).unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.g_hat, y.g_hat);
            assert_eq!(x.dinf.to_bits(), y.dinf.to_bits());
        }
    }

    #[test]
    fn invalid_config_rejected_before_work() {
        let mut c = tiny_config();
        c.replicates = 0;
        assert!(run_grid(&c).is_err());
        let mut c = tiny_config();
        c.epsilons = vec![0.6];
        assert!(run_grid(&c).is_err());
        let mut c = tiny_config();
        c.n_values = vec![1];
        assert!(run_grid(&c).is_err());
    }

    #[test]
    fn summarize_matches_naive_group_by() {
        let mut c = tiny_config();
        c.epsilons = vec![0.1, 0.2];
        c.strategies = vec![StrategyId::S1, StrategyId::S2];
        c.replicates = 5;
        let records = run_grid(&c).unwrap();
        let rows = summarize(&records);
        assert_eq!(rows.len(), 4);
        for row in &rows {
            // Naive oracle: filter and count.
            let members: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|r| {
                    r.epsilon == row.epsilon
                        && r.n == row.n
                        && r.d == row.d
                        && r.strategy == row.strategy
                })
                .collect();
            assert_eq!(members.len(), row.replicates);
            let g_rate =
                members.iter().filter(|r| r.g_correct).count() as f64 / members.len() as f64;
            assert_eq!(g_rate, row.g_correct_rate);
        }
    }

    #[test]
    fn all_success_records_summarize_to_one() {
        let c = ExperimentConfig {
            design: Design::Balanced,
            epsilons: vec![0.05],
            n_values: vec![2000],
            d_values: vec![2000],
            strategies: vec![StrategyId::S1],
            replicates: 4,
            master_seed: 9,
            t: 0.2,
        };
        let rows = summarize(&run_grid(&c).unwrap());
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].compound_success_rate, 1.0);
        assert!(rows[0].mean_dinf_success.is_finite());
    }
}
