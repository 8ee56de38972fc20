//! Trait grids, growth-rate families, consumption weights, initial data and
//! environment schedules.

mod grid;
mod growth;
mod initial;
mod polynomial;
mod schedule;

pub use grid::TraitGrid;
pub use growth::{ConcavityConstants, ConsumptionWeight, GrowthBounds, GrowthModel};
pub use initial::{InitialCondition, LimitSupport, Mass};
pub use polynomial::Polynomial;
pub use schedule::{EnvironmentSchedule, Segment};
