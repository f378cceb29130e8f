//! Random geometric graphs on standard metric probability spaces, together
//! with the measure-preserving bounded-distortion map families that give them
//! thresholds, and the spectral constants those families rely on.
//!
//! The crate is split by concern:
//!
//! - [`spaces`]: tori, spheres, cubes, the pillowcase and the two-interval
//!   space; sampling, metrics and the torus folding map.
//! - [`rgg`]: geometric graphs, monotone properties and Monte Carlo
//!   probability / threshold estimation.
//! - [`maps`]: unimodular matrices, certified free generator pairs, and the
//!   expansion families built from them.
//! - [`spectral`]: exact frequency-side operators, orbit trees, the tree
//!   random-walk norm and discrete-torus diagnostics.
//! - [`heights`]: height laws on spheres, zonal bases, maximal correlation,
//!   transversality and suspension contraction experiments.
//! - [`harness`]: experiment orchestration, statistics and persistence.

pub mod error;
pub mod harness;
pub mod heights;
pub mod maps;
pub mod rgg;
pub mod rng;
pub mod spaces;
pub mod spectral;

pub use error::{Error, Result};
