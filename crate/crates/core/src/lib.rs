//! Intersection conflict detection and the evaluation pipeline around it.
//!
//! [`layout`] models the four-leg intersection, [`scenario`] validates,
//! generates and describes vehicle sets, [`oracle`] is the rule-based ground
//! truth, [`promptkit`] builds prompts and fine-tuning exports,
//! [`controller`] wraps anything that answers those prompts, and [`eval`]
//! scores the answers.

pub mod controller;
pub mod eval;
pub mod fsutil;
pub mod layout;
pub mod oracle;
pub mod promptkit;
pub mod scenario;

pub use layout::{default_layout, Direction, Egress, IntersectionLayout, LaneId, Movement};
pub use oracle::{analyze, render_report, ConflictAnalysis, OracleConfig};
pub use scenario::{LabeledScenario, Scenario, Vehicle};
