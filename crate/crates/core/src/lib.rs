pub mod besov;
pub mod cli;
pub mod error;
pub mod group;
pub mod measure;
pub mod mobius;
pub mod sample;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use group::{BoundaryPoint, CylinderSet, GromovProduct, Letter, Rank, Word};
pub use scalar::ExactScalar;
