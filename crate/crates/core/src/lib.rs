//! Downlink local delay and energy efficiency for K-tier heterogeneous
//! cellular networks with hybrid half-/full-duplex operation.
//!
//! Two independent engines compute the same quantities:
//!
//! * [`analysis`] evaluates the stochastic-geometry formulas (association
//!   probabilities, interference Laplace transform, local delay, energy
//!   efficiency) by numerical quadrature.
//! * [`montecarlo`] samples Poisson network realizations and estimates the
//!   same quantities empirically, serving as a cross-validation oracle.
//!
//! [`model`] holds the domain parameters and unit conversions, [`quadrature`]
//! the integration primitives shared by the analytical formulas.

pub mod analysis;
pub mod model;
pub mod montecarlo;
pub mod quadrature;

#[cfg(test)]
pub(crate) mod testutil;
