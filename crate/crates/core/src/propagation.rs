//! Analytic propagation of benefit and cost estimation errors through the
//! ROI formula.
//!
//! Three families of results are produced:
//!
//! * exact worst-case bounds, `(B ± δB) / (C ∓ δC) - 1`, with no
//!   approximation;
//! * the first-order maximum probable error,
//!   `(B/C) · (δB/B + δC/C)`, where the errors combine in the most adverse
//!   direction;
//! * the probable error for independent errors, combined in quadrature,
//!   `(B/C) · sqrt((δB/B)² + (δC/C)²)`.
//!
//! The first-order formula can be reached three ways (linearising the upper
//! bound, expanding `1/(1 - δC/C)` to two Taylor terms, or taking the total
//! differential). All three land on the same expression, so it is
//! implemented once. The cost of the Taylor truncation is tabulated by
//! [`taylor_validity_table`].
//!
//! Itemized scenarios are reduced to totals first, either by summing the
//! component errors ([`aggregate_error_sum`]) or adding them in quadrature
//! ([`aggregate_error_quadrature`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RoiError};
use crate::roi::{
    compute_roi, relative_error_of, total_value, Estimate, Money, RoiValue, Scenario,
};

/// How per-component errors are combined into a total error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    /// Plain sum of absolute errors (maximum probable error).
    #[default]
    Sum,
    /// Square root of the sum of squares (probable error).
    Quadrature,
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationMode::Sum => "sum",
            AggregationMode::Quadrature => "quadrature",
        })
    }
}

impl FromStr for AggregationMode {
    type Err = RoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(AggregationMode::Sum),
            "quadrature" => Ok(AggregationMode::Quadrature),
            other => Err(RoiError::InvalidArgument(format!(
                "unknown aggregation mode '{other}' (expected sum or quadrature)"
            ))),
        }
    }
}

/// Point ROI with every analytic error measure and the exact bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub roi: RoiValue,
    pub max_probable_error: f64,
    pub probable_error: f64,
    pub roi_lower: RoiValue,
    pub roi_upper: RoiValue,
    /// `max_probable_error / |roi|`; `None` at break-even.
    pub relative_max_error: Option<f64>,
    pub benefit_total: Estimate,
    pub cost_total: Estimate,
    pub aggregation_mode: AggregationMode,
}

/// One point of the comparison between `1/(1 - x)` and its two-term
/// expansion `1 + x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityRow {
    pub rel_error: f64,
    pub exact: f64,
    pub approx: f64,
    pub relative_gap: f64,
}

fn benefit_cost_terms(benefit: &Estimate, cost: &Estimate) -> Result<(f64, f64, f64)> {
    let rb = relative_error_of(benefit)?;
    let rc = relative_error_of(cost)?;
    Ok((benefit.value() / cost.value(), rb, rc))
}

/// First-order worst-case ROI error, `(B/C) · (δB/B + δC/C)`.
pub fn max_probable_error(benefit: &Estimate, cost: &Estimate) -> Result<f64> {
    let (ratio, rb, rc) = benefit_cost_terms(benefit, cost)?;
    Ok(ratio * (rb + rc))
}

/// Independent-error ROI error, `(B/C) · sqrt((δB/B)² + (δC/C)²)`.
pub fn probable_error(benefit: &Estimate, cost: &Estimate) -> Result<f64> {
    let (ratio, rb, rc) = benefit_cost_terms(benefit, cost)?;
    Ok(ratio * rb.hypot(rc))
}

/// Exact `(lower, upper)` ROI when benefit and cost errors align in the
/// most adverse directions.
pub fn exact_worst_case_bounds(
    benefit: &Estimate,
    cost: &Estimate,
) -> Result<(RoiValue, RoiValue)> {
    let (b, db) = (benefit.value(), benefit.abs_error());
    let (c, dc) = (cost.value(), cost.abs_error());
    if dc >= c {
        return Err(RoiError::WorstCaseDenominator {
            cost: c,
            cost_error: dc,
        });
    }
    if db > b {
        return Err(RoiError::NegativeWorstCaseBenefit {
            benefit: b,
            benefit_error: db,
        });
    }
    let lower = (b - db) / (c + dc) - 1.0;
    let upper = (b + db) / (c - dc) - 1.0;
    Ok((RoiValue::new(lower)?, RoiValue::new(upper)?))
}

/// `delta_r / |roi|`.
///
/// Dividing the first-order error by the point ROI does not reduce to
/// `δB/B + δC/C`: since `R = B/C - 1`, the quotient carries an extra factor
/// `(B/C) / (B/C - 1)`. The plain sum of relative errors is the relative
/// error of the quotient `B/C`, not of the ROI. This function performs the
/// literal division.
pub fn relative_form(delta_r: f64, roi: RoiValue) -> Result<f64> {
    if roi.fraction() == 0.0 {
        return Err(RoiError::ZeroRoi);
    }
    Ok(delta_r / roi.fraction().abs())
}

fn amounts(component_errors: &[Money]) -> impl Iterator<Item = f64> + '_ {
    component_errors.iter().map(|m| m.amount())
}

/// Sum of component errors.
pub fn aggregate_error_sum(component_errors: &[Money]) -> Money {
    let total: f64 = amounts(component_errors).sum();
    Money::new(total).expect("sum of non-negative finite amounts")
}

/// Square root of the sum of squared component errors.
pub fn aggregate_error_quadrature(component_errors: &[Money]) -> Money {
    let squares: f64 = amounts(component_errors).map(|x| x * x).sum();
    Money::new(squares.sqrt()).expect("root of non-negative finite sum")
}

/// Collapses a list of component estimates into a single total estimate.
pub fn aggregate_estimates(components: &[Estimate], mode: AggregationMode) -> Estimate {
    let errors: Vec<Money> = components.iter().map(|e| e.abs_error).collect();
    let error = match mode {
        AggregationMode::Sum => aggregate_error_sum(&errors),
        AggregationMode::Quadrature => aggregate_error_quadrature(&errors),
    };
    Estimate {
        value: total_value(components),
        abs_error: error,
    }
}

/// Full report for a pair of total estimates.
pub fn error_report(
    benefit: &Estimate,
    cost: &Estimate,
    mode: AggregationMode,
) -> Result<ErrorReport> {
    let (roi_lower, roi_upper) = exact_worst_case_bounds(benefit, cost)?;
    let roi = compute_roi(benefit.value, cost.value)?;
    let max_err = max_probable_error(benefit, cost)?;
    let prob_err = probable_error(benefit, cost)?;
    let relative_max_error = match relative_form(max_err, roi) {
        Ok(r) => Some(r),
        Err(RoiError::ZeroRoi) => None,
        Err(e) => return Err(e),
    };
    Ok(ErrorReport {
        roi,
        max_probable_error: max_err,
        probable_error: prob_err,
        roi_lower,
        roi_upper,
        relative_max_error,
        benefit_total: *benefit,
        cost_total: *cost,
        aggregation_mode: mode,
    })
}

/// Aggregates the scenario's component errors per `mode` and reports on the
/// totals.
///
/// Both error measures and both exact bounds are always computed from the
/// aggregated totals; `mode` only selects how the components are combined.
pub fn scenario_error_report(s: &Scenario, mode: AggregationMode) -> Result<ErrorReport> {
    let benefit = aggregate_estimates(&s.benefit_estimates(), mode);
    let cost = aggregate_estimates(&s.cost_estimates(), mode);
    error_report(&benefit, &cost, mode)
}

fn validity_row(x: f64) -> ValidityRow {
    // (exact - approx) / exact = 1 - (1 + x)(1 - x) = x², without the cancellation
    ValidityRow {
        rel_error: x,
        exact: 1.0 / (1.0 - x),
        approx: 1.0 + x,
        relative_gap: x * x,
    }
}

/// Evenly spaced grid `start, start + step, ...` up to and including `stop`,
/// tolerant of accumulated rounding and snapped to 12 decimals.
pub(crate) fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|k| {
            let x = start + k as f64 * step;
            (x * 1e12).round() / 1e12
        })
        .collect()
}

/// Rows for `x = 0, step, 2·step, ... ≤ max_x`.
pub fn taylor_validity_table(max_x: f64, step: f64) -> Result<Vec<ValidityRow>> {
    if max_x.is_nan() || max_x >= 1.0 {
        return Err(RoiError::InvalidArgument(format!(
            "max relative error must be below 1 (pole of 1/(1-x)), got {max_x}"
        )));
    }
    if !(step > 0.0 && step <= max_x) {
        return Err(RoiError::InvalidArgument(format!(
            "step must satisfy 0 < step <= max, got step {step} with max {max_x}"
        )));
    }
    Ok(grid(0.0, max_x, step)
        .into_iter()
        .map(validity_row)
        .collect())
}
