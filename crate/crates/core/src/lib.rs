//! Accuracy analysis for Return-on-Investment evaluations.
//!
//! Benefit and cost estimates carry absolute error bounds; this crate
//! propagates those errors through `ROI = (B - C) / C` analytically
//! ([`propagation`]) and by seeded Monte Carlo simulation ([`simulation`]).
//! Scenario documents and CSV/JSON output live in [`io`], the command-line
//! front end in [`cli`].

pub mod cli;
pub mod error;
pub mod io;
pub mod propagation;
pub mod rng;
pub mod roi;
pub mod simulation;

pub use error::{Result, RoiError};
pub use propagation::{AggregationMode, ErrorReport, ValidityRow};
pub use roi::{
    compute_roi, relative_error_of, total_value, Component, Estimate, Money, RoiValue, Scenario,
};
pub use simulation::{SimulationConfig, SimulationResult, SweepRow};
