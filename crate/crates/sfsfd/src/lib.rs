//! Space-filling experimental designs from a tuned sampling density.
//!
//! High-dimensional uniform sampling concentrates on a thin shell around
//! the cube center, which shows up as exploding centered L2 discrepancy.
//! This crate counteracts that by optimizing the Fourier coefficients of
//! a discretized one-dimensional marginal density: the coefficients live
//! on the complex unit sphere (so every optimizer iterate inverts to a
//! valid distribution), the sphere is parametrized by Euler angles, and a
//! derivative-free trust-region method minimizes a replicated stochastic
//! estimate of the expected discrepancy of designs drawn from the
//! density.
//!
//! Modules:
//!
//! * [`discrepancy`] — the centered L2 discrepancy kernel and
//!   concentration diagnostics; the objective everything else optimizes
//!   or is judged by.
//! * [`spectral`] — the mass function, sqrt transform, unitary DFT,
//!   angle parametrization, and design sampling.
//! * [`optimizer`] — the stochastic optimization loop with its growing
//!   replicate schedule.
//! * [`baseline`] — uniform random, Latin hypercube, and randomized
//!   Sobol comparison generators.
//! * [`mod@bench`] — the (method x d x n x seed) experiment grid with
//!   resumable persistence, aggregation, and report emission.
//! * [`stream`] — deterministic derivation of independent random
//!   streams, the backbone of reproducibility.

pub mod baseline;
pub mod bench;
pub mod design;
pub mod discrepancy;
pub mod error;
pub mod optimizer;
pub mod spectral;
pub mod stream;

pub use design::DesignMatrix;
pub use discrepancy::{
    centered_l2_discrepancy, centered_l2_discrepancy_with, mean_squared_distance_to_center,
    DiscrepancyValue, DiscrepancyVariant,
};
pub use error::{Error, Result};
pub use optimizer::{run_sfsfd, ObjectiveSpec, OptimizationTrace};
pub use spectral::{EulerAngleVector, ProbabilityMassFunction};
