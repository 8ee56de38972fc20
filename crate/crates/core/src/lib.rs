//! Simulation and small-mutation analysis of selection-mutation population models
//! with a single competition level, in constant or switching environments.

pub mod criteria;
pub mod diagnostics;
pub mod error;
pub mod hjlimit;
pub mod model;
pub mod scenarios;
pub mod solver;

pub use error::{HjError, ModelError, ScenarioError, SolverError};
