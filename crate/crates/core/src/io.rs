//! Scenario documents and result serialization.
//!
//! Scenarios are TOML:
//!
//! ```toml
//! name = "CRM rollout"
//! currency_label = "CAD thousands"   # optional
//!
//! [[benefits]]
//! label = "Staff time saved"
//! amount = 200.0
//! relative_error = 0.1               # fraction of amount
//!
//! [[costs]]
//! label = "Licences"
//! amount = 100.0
//! abs_error = 10.0                   # same units as amount
//! ```
//!
//! Each item carries exactly one of `abs_error` or `relative_error`; relative
//! errors are normalised to absolute amounts on load.
//!
//! Results are written as CSV or JSON. Every float is rounded to 15
//! significant digits and printed in its shortest round-trip form, so output
//! is stable and free of representation noise like `0.04000000000000003`.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::error::RoiError;
use crate::propagation::{ErrorReport, ValidityRow};
use crate::roi::{Component, Estimate, Scenario};
use crate::simulation::{
    AnalyticComparison, CaseSource, ConvergenceRow, SimulationResult, SweepRow,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario document: {0}")]
    Syntax(String),

    #[error("{path}: {reason}")]
    Field { path: String, reason: String },
}

impl ScenarioError {
    fn field(path: impl Into<String>, reason: impl Into<String>) -> Self {
        ScenarioError::Field {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ItemDoc {
    label: String,
    amount: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    abs_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relative_error: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    currency_label: Option<String>,
    #[serde(default)]
    benefits: Vec<ItemDoc>,
    #[serde(default)]
    costs: Vec<ItemDoc>,
}

#[derive(Clone, Copy)]
enum Side {
    Benefit,
    Cost,
}

impl Side {
    fn key(self) -> &'static str {
        match self {
            Side::Benefit => "benefits",
            Side::Cost => "costs",
        }
    }
}

fn item_to_component(item: &ItemDoc, side: Side, index: usize) -> Result<Component, ScenarioError> {
    let path = |field: &str| format!("{}[{index}].{field}", side.key());
    if !(item.amount.is_finite() && item.amount >= 0.0) {
        return Err(ScenarioError::field(
            path("amount"),
            "amount must be finite and non-negative",
        ));
    }
    let abs = match (item.abs_error, item.relative_error) {
        (Some(_), Some(_)) => {
            return Err(ScenarioError::field(
                path("abs_error"),
                "give exactly one of abs_error or relative_error, not both",
            ))
        }
        (None, None) => {
            return Err(ScenarioError::field(
                format!("{}[{index}]", side.key()),
                "missing error: give abs_error or relative_error",
            ))
        }
        (Some(abs), None) => {
            if !(abs.is_finite() && abs >= 0.0) {
                return Err(ScenarioError::field(
                    path("abs_error"),
                    "error must be finite and non-negative",
                ));
            }
            if matches!(side, Side::Cost) && item.amount > 0.0 && abs >= item.amount {
                return Err(ScenarioError::field(path("abs_error"), "cost error ≥ 100%"));
            }
            abs
        }
        (None, Some(rel)) => {
            if !(rel.is_finite() && rel >= 0.0) {
                return Err(ScenarioError::field(
                    path("relative_error"),
                    "error must be finite and non-negative",
                ));
            }
            if item.amount <= 0.0 {
                return Err(ScenarioError::field(
                    path("amount"),
                    "amount must be positive when relative_error is given",
                ));
            }
            if matches!(side, Side::Cost) && rel >= 1.0 {
                return Err(ScenarioError::field(
                    path("relative_error"),
                    "cost error ≥ 100%",
                ));
            }
            item.amount * rel
        }
    };
    let estimate = Estimate::new(item.amount, abs)
        .map_err(|e| ScenarioError::field(path("amount"), e.to_string()))?;
    Ok(Component::new(item.label.clone(), estimate))
}

/// Parses and validates a scenario document, normalising every error to an
/// absolute amount.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc =
        toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
    let convert = |items: &[ItemDoc], side| {
        items
            .iter()
            .enumerate()
            .map(|(i, item)| item_to_component(item, side, i))
            .collect::<Result<Vec<_>, _>>()
    };
    let benefits = convert(&doc.benefits, Side::Benefit)?;
    let costs = convert(&doc.costs, Side::Cost)?;
    Scenario::new(doc.name, doc.currency_label, benefits, costs).map_err(|e| match e {
        RoiError::NonPositiveCost(_) => ScenarioError::field("costs", "total cost must be positive"),
        RoiError::WorstCaseDenominator { cost, cost_error } => ScenarioError::field(
            "costs",
            format!("aggregated cost error {cost_error} is not below total cost {cost} (cost error ≥ 100%)"),
        ),
        other => ScenarioError::field("costs", other.to_string()),
    })
}

/// Writes a scenario back out as a document, with absolute errors.
pub fn scenario_to_toml(s: &Scenario) -> String {
    let items = |cs: &[Component]| {
        cs.iter()
            .map(|c| ItemDoc {
                label: c.label.clone(),
                amount: c.estimate.value(),
                abs_error: Some(c.estimate.abs_error()),
                relative_error: None,
            })
            .collect()
    };
    let doc = ScenarioDoc {
        name: s.name().to_string(),
        currency_label: s.currency_label().map(str::to_string),
        benefits: items(s.benefits()),
        costs: items(s.costs()),
    };
    toml::to_string(&doc).expect("scenario documents always serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = RoiError;

    fn from_str(s: &str) -> Result<Self, RoiError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(RoiError::InvalidArgument(format!(
                "unknown format '{other}'"
            ))),
        }
    }
}

/// Rounds to 15 significant decimal digits.
pub fn round_sig15(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Shortest text that reads back as `round_sig15(x)`; integers keep `.0`.
pub fn format_number(x: f64) -> String {
    format!("{:?}", round_sig15(x) + 0.0)
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Flag(bool),
    Missing,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => f.write_str(&format_number(*x)),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Flag(b) => write!(f, "{b}"),
            Cell::Missing => Ok(()),
        }
    }
}

/// A result that can be written as a CSV row or a JSON value.
pub trait Record: Serialize {
    fn columns() -> &'static [&'static str];
    fn cells(&self) -> Vec<Cell>;
    /// Copy with every fraction-valued field multiplied by `factor`.
    fn scaled(&self, factor: f64) -> Self;
}

fn pct(factor: f64, x: f64) -> f64 {
    x * factor
}

impl Record for SweepRow {
    fn columns() -> &'static [&'static str] {
        &["e", "delta_r", "ratio", "iterations", "seed"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Num(self.e),
            Cell::Num(self.delta_r),
            Cell::Num(self.ratio),
            Cell::Int(self.iterations as u64),
            Cell::Int(self.seed),
        ]
    }

    fn scaled(&self, f: f64) -> Self {
        SweepRow {
            e: pct(f, self.e),
            delta_r: pct(f, self.delta_r),
            ..*self
        }
    }
}

impl Record for ValidityRow {
    fn columns() -> &'static [&'static str] {
        &["rel_error", "exact", "approx", "relative_gap"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Num(self.rel_error),
            Cell::Num(self.exact),
            Cell::Num(self.approx),
            Cell::Num(self.relative_gap),
        ]
    }

    fn scaled(&self, f: f64) -> Self {
        ValidityRow {
            rel_error: pct(f, self.rel_error),
            relative_gap: pct(f, self.relative_gap),
            ..*self
        }
    }
}

impl Record for ConvergenceRow {
    fn columns() -> &'static [&'static str] {
        &["n", "spread", "mean", "min", "max"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n as u64),
            Cell::Num(self.spread),
            Cell::Num(self.mean),
            Cell::Num(self.min),
            Cell::Num(self.max),
        ]
    }

    fn scaled(&self, f: f64) -> Self {
        ConvergenceRow {
            n: self.n,
            spread: pct(f, self.spread),
            mean: pct(f, self.mean),
            min: pct(f, self.min),
            max: pct(f, self.max),
        }
    }
}

fn scale_roi(f: f64, r: crate::roi::RoiValue) -> crate::roi::RoiValue {
    crate::roi::RoiValue::new(r.fraction() * f).expect("finite")
}

impl Record for ErrorReport {
    fn columns() -> &'static [&'static str] {
        &[
            "roi",
            "max_probable_error",
            "probable_error",
            "roi_lower",
            "roi_upper",
            "relative_max_error",
            "benefit_total",
            "benefit_abs_error",
            "cost_total",
            "cost_abs_error",
            "aggregation_mode",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Num(self.roi.fraction()),
            Cell::Num(self.max_probable_error),
            Cell::Num(self.probable_error),
            Cell::Num(self.roi_lower.fraction()),
            Cell::Num(self.roi_upper.fraction()),
            self.relative_max_error.map_or(Cell::Missing, Cell::Num),
            Cell::Num(self.benefit_total.value()),
            Cell::Num(self.benefit_total.abs_error()),
            Cell::Num(self.cost_total.value()),
            Cell::Num(self.cost_total.abs_error()),
            Cell::Text(self.aggregation_mode.to_string()),
        ]
    }

    fn scaled(&self, f: f64) -> Self {
        ErrorReport {
            roi: scale_roi(f, self.roi),
            max_probable_error: pct(f, self.max_probable_error),
            probable_error: pct(f, self.probable_error),
            roi_lower: scale_roi(f, self.roi_lower),
            roi_upper: scale_roi(f, self.roi_upper),
            relative_max_error: self.relative_max_error.map(|x| pct(f, x)),
            ..self.clone()
        }
    }
}

/// A simulation result together with its analytic counterpart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub result: SimulationResult,
    pub analytic: AnalyticComparison,
}

impl Record for SimulationReport {
    fn columns() -> &'static [&'static str] {
        &[
            "iterations",
            "seed",
            "case_source",
            "ratio",
            "e_benefit",
            "e_cost",
            "cost_act",
            "benefit_act",
            "actual_roi",
            "mean_abs_error",
            "roi_mean",
            "roi_std",
            "roi_min",
            "roi_max",
            "roi_p5",
            "roi_p50",
            "roi_p95",
            "max_probable_error",
            "probable_error",
            "roi_lower",
            "roi_upper",
            "draws_contained",
            "probable_within_max",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        let r = &self.result;
        let s = &r.draw_stats;
        let a = &self.analytic;
        let source = match r.config.case_source {
            CaseSource::Band(b) => b.to_string(),
            CaseSource::ActualCost(_) => "explicit".to_string(),
        };
        vec![
            Cell::Int(r.iterations as u64),
            Cell::Int(r.seed),
            Cell::Text(source),
            Cell::Num(r.config.benefit_cost_ratio),
            Cell::Num(r.config.e_benefit),
            Cell::Num(r.config.e_cost),
            Cell::Num(r.cost_act.amount()),
            Cell::Num(r.benefit_act.amount()),
            Cell::Num(r.actual_roi.fraction()),
            Cell::Num(r.mean_abs_error),
            Cell::Num(s.mean),
            Cell::Num(s.std),
            Cell::Num(s.min),
            Cell::Num(s.max),
            Cell::Num(s.p5),
            Cell::Num(s.p50),
            Cell::Num(s.p95),
            Cell::Num(a.max_probable_error),
            Cell::Num(a.probable_error),
            Cell::Num(a.roi_lower.fraction()),
            Cell::Num(a.roi_upper.fraction()),
            Cell::Flag(a.draws_contained),
            Cell::Flag(a.probable_within_max),
        ]
    }

    fn scaled(&self, f: f64) -> Self {
        let mut out = self.clone();
        let r = &mut out.result;
        r.config.e_benefit = pct(f, r.config.e_benefit);
        r.config.e_cost = pct(f, r.config.e_cost);
        r.actual_roi = scale_roi(f, r.actual_roi);
        r.mean_abs_error = pct(f, r.mean_abs_error);
        let s = &mut r.draw_stats;
        for x in [
            &mut s.mean,
            &mut s.std,
            &mut s.min,
            &mut s.max,
            &mut s.p5,
            &mut s.p50,
            &mut s.p95,
        ] {
            *x = pct(f, *x);
        }
        let a = &mut out.analytic;
        a.max_probable_error = pct(f, a.max_probable_error);
        a.probable_error = pct(f, a.probable_error);
        a.roi_lower = scale_roi(f, a.roi_lower);
        a.roi_upper = scale_roi(f, a.roi_upper);
        a.mc_mean_abs_error = pct(f, a.mc_mean_abs_error);
        out
    }
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig15(n.as_f64().expect("f64 number"));
            if let Some(num) = serde_json::Number::from_f64(x) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("result types serialize");
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("json value serializes");
    s.push('\n');
    s
}

fn to_csv<T: Record>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(T::columns()).expect("in-memory write");
    for row in rows {
        w.write_record(row.cells().iter().map(Cell::to_string))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// Serializes a table of records. With `percent`, fraction-valued fields are
/// multiplied by 100 first.
pub fn emit_table<T: Record>(rows: &[T], format: Format, percent: bool) -> String {
    let factor = if percent { 100.0 } else { 1.0 };
    let rows: Vec<T> = rows.iter().map(|r| r.scaled(factor)).collect();
    match format {
        Format::Csv => to_csv(&rows),
        Format::Json => to_json(&rows),
    }
}

/// Serializes a single record: one header plus one row in CSV, an object in
/// JSON.
pub fn emit_record<T: Record>(record: &T, format: Format, percent: bool) -> String {
    let scaled = record.scaled(if percent { 100.0 } else { 1.0 });
    match format {
        Format::Csv => to_csv(std::slice::from_ref(&scaled)),
        Format::Json => to_json(&scaled),
    }
}
