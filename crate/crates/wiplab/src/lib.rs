//! wiplab — a numerical laboratory for Wasserstein convergence rates in
//! invariance principles for deterministic dynamical systems.
//!
//! The crate simulates expanding interval maps and their path processes,
//! computes exact and entropic optimal-transport distances between empirical
//! measures (on the line and on path space), builds martingale–coboundary
//! decompositions through the transfer operator, embeds martingales into
//! Brownian motion via first exit times, runs suspension semiflows, and
//! integrates the fast–slow systems whose limits are Stratonovich SDEs.
//! The [`harness`] module turns these pieces into seeded, reproducible rate
//! experiments with Monte Carlo floor controls.
//!
//! Everything is deterministic given an experiment seed: sample `i` of an
//! ensemble draws from an independent counter-derived stream, so results do
//! not depend on worker count or scheduling.

pub mod dynsys;
pub mod harness;
pub mod homogenization;
pub mod martcob;
pub mod rng;
pub mod skorokhod;
pub mod suspension;
pub mod transport;

mod guide;

pub use dynsys::{MapFamily, MapSystem, Observable, OrbitBatch, PathSample};
pub use transport::{EmpiricalMeasure, PathGrid, TransportPlan};
