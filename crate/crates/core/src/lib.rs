//! Simulation of the one-dimensional two-type contact process with spatial
//! priorities, built on a shared Harris graphical construction.

pub mod classical;
pub mod dump;
pub mod error;
pub mod experiments;
pub mod farm;
pub mod harris;
pub mod renorm;
pub mod seed;
pub mod stats;
pub mod two_type;

pub use error::{Error, Result};
pub use harris::{ConstructionParams, HarrisConstruction, Mark, MarkKind, MarkStream, SiteInterval, SpaceTimePoint};
pub use stats::TimeSample;
