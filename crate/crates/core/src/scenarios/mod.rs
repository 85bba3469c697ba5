//! Named instances, the parking transformation and uncertainty sweeps.

mod grid;
mod named;
mod parking;
mod sweep;

use thiserror::Error;

pub use grid::{build_grid_city, GridCitySpec};
pub use named::{fig3, pigou};
pub use parking::{apply_parking_transform, parking_types, ParkingDemand, ParkingSpec, RoadEdge, ThroughDemand};
pub use sweep::{sweep_uncertainty, SweepResult, SweepRow, SWEEP_CSV_HEADER};

use crate::model::{EdgeIdx, GameInstance, ModelError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("epsilon must lie in [0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid {field}: {reason}")]
    SpecInvalid { field: String, reason: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A built instance together with the edges whose mass a sweep reports.
#[derive(Clone, Debug)]
pub struct ScenarioInstance<T> {
    pub instance: GameInstance<T>,
    /// Cheap congestible option (fake on-street edges for parking).
    pub onstreet_edges: Vec<EdgeIdx>,
    pub garage_edges: Vec<EdgeIdx>,
}
