//! Information-theoretic toolkit for timing channels built from identical
//! tokens: first-passage transit laws, channel-use simulation, ordering
//! entropy, capacity bounds, and comparisons with payload and number
//! channels.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod figures;
pub mod first_passage;
pub mod numeric;
pub mod ordering;
pub mod variants;

pub use bounds::{capacity_point, CapacityPoint};
pub use channel::{ArrivalRecord, Convergence, GuardDiagnostic, LaunchSchedule};
pub use error::{Error, Result};
pub use figures::{Command, ExperimentConfig, Report};
pub use first_passage::{DistSpec, FirstPassageDist, OptimalInputDensity, TableTail};
pub use ordering::{AdmissibleCount, Estimate, PoissonBinomial};
pub use variants::{EnergyModel, NumberChannelPoint};
