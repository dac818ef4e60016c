//! The exact mixed-integer model behind the heuristics: a checker for full
//! variable assignments, an LP-file exporter for external solvers, and an
//! exhaustive optimum for toy instances.
//!
//! Constraint ids follow the model's numbering: 1 is the objective
//! (active-link count), 2–3 flow conservation, 4 load aggregation,
//! 5 capacity, 6–10 shortest-path forwarding at IP routers, 11 weight range.

mod certificate;
mod lp;
mod oracle;
mod validate;

pub use certificate::{evaluate_objective, SolutionCertificate};
pub use lp::{export_lp, export_lp_with, LP_MAX_WEIGHT};
pub use oracle::{brute_force_optimal, brute_force_optimal_with, OracleError, OracleResult, ORACLE_MAX_LINKS};
pub use validate::{validate_certificate, Regime, ValidationError, Violation, ViolationReport};

/// Absolute tolerance for constraint residuals.
pub const TOLERANCE: f64 = 1e-6;
