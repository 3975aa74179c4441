//! Equilibration of quantum hard rods on a one-dimensional periodic lattice.
//!
//! The toolkit has three legs that cross-validate each other:
//!
//! - [`combinatorics`]: closed-form statistics of the configuration network
//!   (column sizes, transition rates, loop/reflection/transmission averages,
//!   microcanonical steady state), valid for lattices of any size.
//! - [`confignet`]: explicit enumeration of the blockade-constrained state
//!   space and its single-flip adjacency graph, the empirical cross-check of
//!   the analytic counting and the basis for the quantum dynamics.
//! - [`master`] and [`quantum`]: the number-space rate equation and the
//!   numerically exact Schroedinger evolution, compared through windowed
//!   time averages and the overlap measure `D`.

pub mod combinatorics;
pub mod confignet;
pub mod dist;
pub mod error;
pub mod geometry;
pub mod master;
pub mod quantum;

pub use dist::{NumberDistribution, Observables};
pub use error::{Error, Result};
pub use geometry::RodGeometry;
