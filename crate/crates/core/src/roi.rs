//! Monetary values, estimates with absolute error bounds, itemized scenarios
//! and the ROI ratio itself.
//!
//! Amounts are abstract non-negative reals. The band constants used by the
//! simulation are expressed in thousands, but nothing here depends on a unit.
//! ROI is always held as a fraction (1.0 is 100%); percent is a display
//! concern handled at the I/O edge.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RoiError};

/// A non-negative, finite monetary amount.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Money(f64);

impl Money {
    pub const ZERO: Money = Money(0.0);

    pub fn new(amount: f64) -> Result<Self> {
        if amount.is_finite() && amount >= 0.0 {
            // normalise -0.0
            Ok(Money(amount + 0.0))
        } else {
            Err(RoiError::InvalidMoney(amount))
        }
    }

    pub fn amount(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Money {
    type Error = RoiError;

    fn try_from(value: f64) -> Result<Self> {
        Money::new(value)
    }
}

impl From<Money> for f64 {
    fn from(m: Money) -> f64 {
        m.0
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An estimated amount together with its absolute error bound (`value ± abs_error`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Money,
    pub abs_error: Money,
}

impl Estimate {
    pub fn new(value: f64, abs_error: f64) -> Result<Self> {
        Ok(Estimate {
            value: Money::new(value)?,
            abs_error: Money::new(abs_error)?,
        })
    }

    /// Builds an estimate from a relative error, `abs_error = value * relative`.
    pub fn with_relative_error(value: f64, relative: f64) -> Result<Self> {
        if !(relative.is_finite() && relative >= 0.0) {
            return Err(RoiError::InvalidRelativeError(relative));
        }
        Estimate::new(value, value * relative)
    }

    pub fn exact(value: f64) -> Result<Self> {
        Estimate::new(value, 0.0)
    }

    pub fn value(&self) -> f64 {
        self.value.amount()
    }

    pub fn abs_error(&self) -> f64 {
        self.abs_error.amount()
    }

    /// Multiplies both the value and the error by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Estimate::new(self.value() * k, self.abs_error() * k)
    }
}

/// A labelled benefit or cost line item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub estimate: Estimate,
}

impl Component {
    pub fn new(label: impl Into<String>, estimate: Estimate) -> Self {
        Component {
            label: label.into(),
            estimate,
        }
    }
}

/// An itemized project: benefit and cost components with per-item errors.
///
/// Construction checks that there is at least one cost item, that the total
/// cost is positive and that the summed cost error stays below the total
/// cost. The summed error is the larger of the two aggregation modes, so a
/// valid scenario is valid under both.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    name: String,
    currency_label: Option<String>,
    benefits: Vec<Component>,
    costs: Vec<Component>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        currency_label: Option<String>,
        benefits: Vec<Component>,
        costs: Vec<Component>,
    ) -> Result<Self> {
        let cost_estimates: Vec<Estimate> = costs.iter().map(|c| c.estimate).collect();
        let total_cost = total_value(&cost_estimates).amount();
        if costs.is_empty() || total_cost <= 0.0 {
            return Err(RoiError::NonPositiveCost(total_cost));
        }
        let total_cost_error: f64 = cost_estimates.iter().map(Estimate::abs_error).sum();
        if total_cost_error >= total_cost {
            return Err(RoiError::WorstCaseDenominator {
                cost: total_cost,
                cost_error: total_cost_error,
            });
        }
        Ok(Scenario {
            name: name.into(),
            currency_label,
            benefits,
            costs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn currency_label(&self) -> Option<&str> {
        self.currency_label.as_deref()
    }

    pub fn benefits(&self) -> &[Component] {
        &self.benefits
    }

    pub fn costs(&self) -> &[Component] {
        &self.costs
    }

    pub fn benefit_estimates(&self) -> Vec<Estimate> {
        self.benefits.iter().map(|c| c.estimate).collect()
    }

    pub fn cost_estimates(&self) -> Vec<Estimate> {
        self.costs.iter().map(|c| c.estimate).collect()
    }

    pub fn total_benefit(&self) -> Money {
        total_value(&self.benefit_estimates())
    }

    pub fn total_cost(&self) -> Money {
        total_value(&self.cost_estimates())
    }
}

/// A dimensionless return on investment, stored as a fraction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoiValue(f64);

impl RoiValue {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(RoiValue(value))
        } else {
            Err(RoiError::InvalidArgument(format!(
                "ROI must be finite, got {value}"
            )))
        }
    }

    pub fn fraction(self) -> f64 {
        self.0
    }

    pub fn percent(self) -> f64 {
        self.0 * 100.0
    }
}

impl fmt::Display for RoiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `(benefit - cost) / cost`.
pub fn compute_roi(benefit_total: Money, cost_total: Money) -> Result<RoiValue> {
    let cost = cost_total.amount();
    if cost <= 0.0 {
        return Err(RoiError::NonPositiveCost(cost));
    }
    RoiValue::new((benefit_total.amount() - cost) / cost)
}

/// Sum of component values; zero for an empty list.
pub fn total_value(components: &[Estimate]) -> Money {
    let sum: f64 = components.iter().map(Estimate::value).sum();
    Money(sum + 0.0)
}

/// `abs_error / value`.
pub fn relative_error_of(e: &Estimate) -> Result<f64> {
    if e.value() > 0.0 {
        Ok(e.abs_error() / e.value())
    } else {
        Err(RoiError::ZeroValue)
    }
}
