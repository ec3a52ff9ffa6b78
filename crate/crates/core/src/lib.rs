//! Adaptive boundary elements for the hypersingular equation of the 3D Laplacian on a plane
//! polygonal screen, discretized with a non-conforming Nitsche domain decomposition.

pub mod error;
pub mod geometry;
pub mod mesh;
pub mod quad;
pub mod assembly;
pub mod solve;
pub mod estimator;
pub mod adapt;
pub mod cli;

pub use error::{Error, Result};
pub use geometry::Point;
