//! Critical planar percolation under noise and continuous-time dynamics.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] builds boxes and annuli on the triangular site lattice and on
//!   the square bond lattice (with its dual);
//! * [`rng`] and [`sampling`] own every random draw: critical configurations,
//!   heterogeneous resampling noise and the two-step coupling;
//! * [`connectivity`] evaluates crossing events, arm events and pivotality;
//! * [`oracle`] computes noised second moments exactly on enumerable instances;
//! * [`estimators`] runs the Monte Carlo estimates, [`dynamics`] the
//!   continuous-time process, and [`analysis`] turns tables into verdicts;
//! * [`experiment`] is the batch runner behind the `perc-lab` binary.
//!
//! Exact computations are generic over [`Scalar`]; [`Real`] and [`Exact`] are
//! the two instantiations used throughout.

pub mod analysis;
pub mod connectivity;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod lattice;
pub mod oracle;
pub mod rng;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Floating point scalar used by the Monte Carlo side and by default in the oracle.
pub type Real = f64;

/// Exact rational scalar; the oracle is bit-exact when instantiated with it.
pub type Exact = num_rational::BigRational;

/// Version string recorded in every result row.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
