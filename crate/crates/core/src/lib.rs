//! Sharp maximum variance of a finite bounded dataset with a known mean.
//!
//! * [`bounds`]: closed-form maximum, extremal witnesses and related bounds.
//! * [`oracle`]: independent maximizers used to cross-check the closed form.
//! * [`feasibility`]: audits of reported (possibly rounded) summary statistics.
//! * [`cli`]: the command-line front end.

pub mod bounds;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod feasibility;
pub mod oracle;
pub mod rational;

pub use bounds::{
    bhatia_davis, cv_squared_max, envelope, max_variance, max_variance_unit, sum_squares_bound,
    witness_dataset, BoundsSpec, Envelope, ExtremalStructure, ProblemSpec, Semantics,
};
pub use dataset::{Convention, Dataset};
pub use error::{Error, Result};
pub use feasibility::{check, cv_check, max_over_mean_window, FeasibilityVerdict, ReportedStats, RoundedValue, Status};
pub use oracle::{attained_vertex_max, grid_max, hill_climb_max, vertex_max, Method, OracleResult};
pub use rational::{frac_part, Interval, Rational};
