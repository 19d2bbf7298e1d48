//! Reproducible Monte Carlo estimation of the ROI error.
//!
//! A run follows a fixed recipe:
//!
//! 1. Build a case: pick an actual cost (uniformly from a project band, or
//!    verbatim), set the actual benefit to `cost · ratio`, and take
//!    `R_act = ratio - 1`.
//! 2. For each iteration draw `u, v` uniform on `[-1, 1)` and form the
//!    estimated benefit `β = B(1 + u·e_b)` and cost `ζ = C(1 + v·e_c)`.
//! 3. Report the mean absolute error `(1/N) Σ |R_act - R_est,i|` together with
//!    summary statistics of the estimated ROI values.
//!
//! Sampling happens in relative space, so the estimated ROI of every draw
//! depends only on the benefit-cost ratio and the deviates, never on the
//! project's size. Runs with different actual costs but the same seed produce
//! bit-identical ROI sequences.
//!
//! Iteration `i` takes its randomness from the substream keyed by
//! `(seed, i)`, and the absolute errors are summed sequentially in index
//! order. Results are therefore identical whatever the size of the rayon
//! pool the run executes on. Sweeps reuse the same seed at every grid point,
//! which gives common random numbers across the grid.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, RoiError};
use crate::propagation::{self, exact_worst_case_bounds, max_probable_error, probable_error};
use crate::rng::{StreamDomain, Substream};
use crate::roi::{Estimate, Money, RoiValue};

pub const DEFAULT_ITERATIONS: usize = 30_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_RATIO: f64 = 2.0;
pub const DEFAULT_N_LIST: [usize; 6] = [1_000, 5_000, 15_000, 20_000, 30_000, 100_000];
pub const DEFAULT_SEED_COUNT: usize = 20;
/// Cost relative errors at or above this value are rejected.
pub const MAX_COST_ERROR: f64 = 0.999;
/// Relative slack allowed when checking draws against the exact bounds,
/// which are evaluated by a different (but equivalent) floating-point route.
pub const CONTAINMENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectBand {
    Small,
    Medium,
    Large,
}

impl ProjectBand {
    /// Actual-cost range in thousands.
    pub fn cost_range(self) -> (f64, f64) {
        match self {
            ProjectBand::Small => (100.0, 500.0),
            ProjectBand::Medium => (501.0, 900.0),
            ProjectBand::Large => (901.0, 1300.0),
        }
    }
}

impl FromStr for ProjectBand {
    type Err = RoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(ProjectBand::Small),
            "medium" => Ok(ProjectBand::Medium),
            "large" => Ok(ProjectBand::Large),
            other => Err(RoiError::InvalidArgument(format!(
                "unknown project band '{other}' (expected small, medium or large)"
            ))),
        }
    }
}

impl fmt::Display for ProjectBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjectBand::Small => "small",
            ProjectBand::Medium => "medium",
            ProjectBand::Large => "large",
        })
    }
}

/// Where the actual cost of a case comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseSource {
    Band(ProjectBand),
    ActualCost(Money),
}

impl Default for CaseSource {
    fn default() -> Self {
        CaseSource::Band(ProjectBand::Small)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub iterations: usize,
    pub seed: u64,
    pub case_source: CaseSource,
    pub benefit_cost_ratio: f64,
    pub e_benefit: f64,
    pub e_cost: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            iterations: DEFAULT_ITERATIONS,
            seed: DEFAULT_SEED,
            case_source: CaseSource::default(),
            benefit_cost_ratio: DEFAULT_RATIO,
            e_benefit: 0.0,
            e_cost: 0.0,
        }
    }
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio.is_finite() && ratio > 0.0 {
        Ok(())
    } else {
        Err(RoiError::InvalidRatio(ratio))
    }
}

fn check_relative_errors(e_benefit: f64, e_cost: f64) -> Result<()> {
    for e in [e_benefit, e_cost] {
        if !(e.is_finite() && e >= 0.0) {
            return Err(RoiError::InvalidRelativeError(e));
        }
    }
    if e_cost >= MAX_COST_ERROR {
        return Err(RoiError::CostErrorTooLarge(e_cost));
    }
    // beyond 100% the sampled benefit could go negative
    if e_benefit > 1.0 {
        return Err(RoiError::InvalidArgument(format!(
            "benefit relative error must not exceed 1, got {e_benefit}"
        )));
    }
    Ok(())
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(RoiError::InvalidArgument(
                "iterations must be at least 1".into(),
            ));
        }
        check_ratio(self.benefit_cost_ratio)?;
        check_relative_errors(self.e_benefit, self.e_cost)?;
        if let CaseSource::ActualCost(c) = self.case_source {
            if c.amount() <= 0.0 {
                return Err(RoiError::NonPositiveCost(c.amount()));
            }
        }
        Ok(())
    }
}

/// The actual (realized) figures a simulation run estimates against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case {
    pub cost_act: Money,
    pub benefit_act: Money,
    pub ratio: f64,
    pub roi_act: RoiValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrawRecord {
    pub beta: Money,
    pub zeta: Money,
    pub roi_est: RoiValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrawStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub actual_roi: RoiValue,
    pub mean_abs_error: f64,
    pub draw_stats: DrawStats,
    pub iterations: usize,
    pub seed: u64,
    pub cost_act: Money,
    pub benefit_act: Money,
    pub config: SimulationConfig,
}

/// `benefit / cost` for building a case from totals.
pub fn benefit_cost_ratio(benefit: Money, cost: Money) -> Result<f64> {
    if cost.amount() <= 0.0 {
        return Err(RoiError::NonPositiveCost(cost.amount()));
    }
    let ratio = benefit.amount() / cost.amount();
    check_ratio(ratio)?;
    Ok(ratio)
}

/// Picks the actual cost and derives the actual benefit and ROI.
pub fn build_case(source: CaseSource, ratio: f64, stream: &mut Substream) -> Result<Case> {
    check_ratio(ratio)?;
    let cost = match source {
        CaseSource::ActualCost(c) => {
            if c.amount() <= 0.0 {
                return Err(RoiError::NonPositiveCost(c.amount()));
            }
            c
        }
        CaseSource::Band(band) => {
            let (lo, hi) = band.cost_range();
            Money::new(stream.uniform(lo, hi))?
        }
    };
    Ok(Case {
        cost_act: cost,
        benefit_act: Money::new(cost.amount() * ratio)?,
        ratio,
        roi_act: RoiValue::new(ratio - 1.0)?,
    })
}

fn draw_relative(case: &Case, e_benefit: f64, e_cost: f64, stream: &mut Substream) -> DrawRecord {
    let u = stream.symmetric_unit();
    let v = stream.symmetric_unit();
    let benefit_factor = 1.0 + u * e_benefit;
    let cost_factor = 1.0 + v * e_cost;
    DrawRecord {
        beta: Money::new(case.benefit_act.amount() * benefit_factor).expect("e_benefit <= 1"),
        zeta: Money::new(case.cost_act.amount() * cost_factor).expect("e_cost < 1"),
        roi_est: RoiValue::new(case.ratio * (benefit_factor / cost_factor) - 1.0)
            .expect("finite factors"),
    }
}

/// One estimated benefit/cost pair drawn uniformly around the actual values.
///
/// The ROI is evaluated as `(B/C) · (β/B) / (ζ/C) - 1`, which equals
/// `(β - ζ)/ζ` but depends on the amounts only through their ratio.
pub fn sample_draw(
    benefit_act: Money,
    cost_act: Money,
    e_benefit: f64,
    e_cost: f64,
    stream: &mut Substream,
) -> Result<DrawRecord> {
    check_relative_errors(e_benefit, e_cost)?;
    if cost_act.amount() <= 0.0 {
        return Err(RoiError::NonPositiveCost(cost_act.amount()));
    }
    let case = Case {
        cost_act,
        benefit_act,
        ratio: benefit_act.amount() / cost_act.amount(),
        roi_act: crate::roi::compute_roi(benefit_act, cost_act)?,
    };
    Ok(draw_relative(&case, e_benefit, e_cost, stream))
}

/// Builds the case and performs every draw of a run, in iteration order.
pub fn simulate_draws(config: &SimulationConfig) -> Result<(Case, Vec<DrawRecord>)> {
    config.validate()?;
    let mut case_stream = Substream::new(config.seed, StreamDomain::Case, 0);
    let case = build_case(
        config.case_source,
        config.benefit_cost_ratio,
        &mut case_stream,
    )?;
    let draws = (0..config.iterations as u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = Substream::new(config.seed, StreamDomain::Draw, i);
            draw_relative(&case, config.e_benefit, config.e_cost, &mut stream)
        })
        .collect();
    Ok((case, draws))
}

/// Linear interpolation between closest ranks; `sorted` must be non-empty.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = p * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

fn draw_stats(values: &[f64]) -> DrawStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    DrawStats {
        mean,
        std,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        p5: percentile(&sorted, 0.05),
        p50: percentile(&sorted, 0.50),
        p95: percentile(&sorted, 0.95),
    }
}

pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationResult> {
    let (case, draws) = simulate_draws(config)?;
    let roi_act = case.roi_act.fraction();
    let values: Vec<f64> = draws.iter().map(|d| d.roi_est.fraction()).collect();
    let total_abs: f64 = values.iter().map(|r| (roi_act - r).abs()).sum();
    Ok(SimulationResult {
        actual_roi: case.roi_act,
        mean_abs_error: total_abs / values.len() as f64,
        draw_stats: draw_stats(&values),
        iterations: config.iterations,
        seed: config.seed,
        cost_act: case.cost_act,
        benefit_act: case.benefit_act,
        config: config.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepRange {
    /// 0% to 45%.
    Low,
    /// 40% to 95%.
    High,
    Custom {
        start: f64,
        stop: f64,
    },
}

impl SweepRange {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            SweepRange::Low => (0.0, 0.45),
            SweepRange::High => (0.40, 0.95),
            SweepRange::Custom { start, stop } => (start, stop),
        }
    }
}

impl FromStr for SweepRange {
    type Err = RoiError;

    /// `low`, `high`, or `START:STOP`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(SweepRange::Low),
            "high" => Ok(SweepRange::High),
            other => {
                let bad = || {
                    RoiError::InvalidArgument(format!(
                        "invalid sweep range '{other}' (expected low, high or START:STOP)"
                    ))
                };
                let (a, b) = other.split_once(':').ok_or_else(bad)?;
                let start = a.trim().parse::<f64>().map_err(|_| bad())?;
                let stop = b.trim().parse::<f64>().map_err(|_| bad())?;
                Ok(SweepRange::Custom { start, stop })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub range: SweepRange,
    pub step: f64,
    pub ratio: f64,
    pub iterations: usize,
    pub seed: u64,
    pub case_source: CaseSource,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            range: SweepRange::Low,
            step: 0.05,
            ratio: DEFAULT_RATIO,
            iterations: DEFAULT_ITERATIONS,
            seed: DEFAULT_SEED,
            case_source: CaseSource::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub e: f64,
    pub delta_r: f64,
    pub ratio: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// Grid of common relative errors for a sweep.
pub fn sweep_grid(range: SweepRange, step: f64) -> Result<Vec<f64>> {
    let (start, stop) = range.bounds();
    if !(step.is_finite() && step > 0.0) {
        return Err(RoiError::InvalidArgument(format!(
            "sweep step must be positive, got {step}"
        )));
    }
    if !(start.is_finite() && stop.is_finite() && start >= 0.0 && stop >= start) {
        return Err(RoiError::InvalidArgument(format!(
            "sweep range must satisfy 0 <= start <= stop, got {start}:{stop}"
        )));
    }
    let grid = propagation::grid(start, stop, step);
    if let Some(&last) = grid.last() {
        if last >= MAX_COST_ERROR {
            return Err(RoiError::CostErrorTooLarge(last));
        }
    }
    Ok(grid)
}

/// One simulation per grid point with `e_benefit = e_cost = e`, all sharing
/// the same seed and therefore the same deviates.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    sweep_grid(config.range, config.step)?
        .into_iter()
        .map(|e| {
            let sim = SimulationConfig {
                iterations: config.iterations,
                seed: config.seed,
                case_source: config.case_source,
                benefit_cost_ratio: config.ratio,
                e_benefit: e,
                e_cost: e,
            };
            let result = run_simulation(&sim)?;
            Ok(SweepRow {
                e,
                delta_r: result.mean_abs_error,
                ratio: config.ratio,
                iterations: config.iterations,
                seed: config.seed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub spread: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Runs `seed_count` seeds (`config.seed`, `config.seed + 1`, ...) at each
/// iteration count and reports the spread of the mean absolute error.
pub fn convergence_study(
    config: &SimulationConfig,
    n_list: &[usize],
    seed_count: usize,
) -> Result<Vec<ConvergenceRow>> {
    if n_list.is_empty() {
        return Err(RoiError::InvalidArgument(
            "iteration list must not be empty".into(),
        ));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RoiError::InvalidArgument(
            "iteration list must be strictly ascending".into(),
        ));
    }
    if seed_count < 2 {
        return Err(RoiError::InvalidArgument(format!(
            "spread needs at least 2 seeds, got {seed_count}"
        )));
    }
    n_list
        .iter()
        .map(|&n| {
            let errors = (0..seed_count as u64)
                .map(|k| {
                    let run = SimulationConfig {
                        iterations: n,
                        seed: config.seed.wrapping_add(k),
                        ..config.clone()
                    };
                    run_simulation(&run).map(|r| r.mean_abs_error)
                })
                .collect::<Result<Vec<f64>>>()?;
            let min = errors.iter().copied().fold(f64::INFINITY, f64::min);
            let max = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(ConvergenceRow {
                n,
                spread: max - min,
                mean: errors.iter().sum::<f64>() / errors.len() as f64,
                min,
                max,
            })
        })
        .collect()
}

/// Analytic error measures placed next to a simulation's mean absolute error.
///
/// The two kinds of numbers answer different questions (a bound-style error
/// vs. an average deviation); no fixed relation between them is implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticComparison {
    pub max_probable_error: f64,
    pub probable_error: f64,
    pub roi_lower: RoiValue,
    pub roi_upper: RoiValue,
    pub mc_mean_abs_error: f64,
    /// Every draw lies inside the exact worst-case interval.
    pub draws_contained: bool,
    /// `probable_error <= max_probable_error`.
    pub probable_within_max: bool,
}

pub fn compare_with_analytic(result: &SimulationResult) -> Result<AnalyticComparison> {
    let b = result.benefit_act.amount();
    let c = result.cost_act.amount();
    let benefit = Estimate::new(b, b * result.config.e_benefit)?;
    let cost = Estimate::new(c, c * result.config.e_cost)?;
    let max_err = max_probable_error(&benefit, &cost)?;
    let prob_err = probable_error(&benefit, &cost)?;
    let (lower, upper) = exact_worst_case_bounds(&benefit, &cost)?;
    Ok(AnalyticComparison {
        max_probable_error: max_err,
        probable_error: prob_err,
        roi_lower: lower,
        roi_upper: upper,
        mc_mean_abs_error: result.mean_abs_error,
        draws_contained: within(lower, upper, result.draw_stats.min)
            && within(lower, upper, result.draw_stats.max),
        probable_within_max: prob_err <= max_err,
    })
}

/// `roi` lies in `[lower, upper]` up to [`CONTAINMENT_SLACK`].
pub fn within(lower: RoiValue, upper: RoiValue, roi: f64) -> bool {
    let slack = |x: f64| CONTAINMENT_SLACK * x.abs().max(1.0);
    roi >= lower.fraction() - slack(lower.fraction())
        && roi <= upper.fraction() + slack(upper.fraction())
}
