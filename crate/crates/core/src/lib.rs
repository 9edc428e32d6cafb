//! Constructive smooth approximation of continuous maps into polyhedra.

pub mod analytic;
pub mod bump;
pub mod complex;
pub mod covering;
pub mod embedding;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod maps;
pub mod sample;
pub mod smoothing;
pub mod subdivision;
pub mod svg;
pub mod verify;

pub use complex::{Complex, Location, Subcomplex};
pub use error::{Error, Result};
pub use geometry::Point;
pub use subdivision::Subdivision;
