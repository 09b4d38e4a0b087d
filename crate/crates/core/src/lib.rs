//! Equipartitions of planar measures by generalized Voronoi partitions,
//! polynomial necklace splitting, upper envelopes of polynomial families,
//! and a chain-level check of the Fuks cell boundary computation.

pub mod envelope;
pub mod error;
pub mod fuks;
pub mod geometry;
pub mod measures;
pub mod necklace;
pub mod poly;
pub mod residuals;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{
    build_partition, AffineFunction2, CellSet, ConvexPolygon, FunctionFamily, Point2,
};
