//! Reduced-rank adaptive beamforming under the constrained constant modulus
//! (CCM) criterion.
//!
//! A bank of full-rank filters (the columns of a transformation matrix `T`)
//! projects each array snapshot onto an `r`-dimensional subspace, where a short
//! reduced-rank filter `w̄` produces the beamformer output. Both are adapted
//! jointly by stochastic gradient steps that keep the array-response constraint
//! toward the signal of interest satisfied at every snapshot. An optional
//! Gram-Schmidt pass keeps the columns of `T` orthonormal.
//!
//! The crate also carries full-rank CMV/CCM baselines, an analytic output-SINR
//! metric, a seeded Monte Carlo harness and an operation-count model for the
//! usual family of reduced-rank beamformers.

pub mod array;
pub mod cli;
pub mod complexity;
pub mod error;
pub mod fullrank;
pub mod jio;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod scenario;
pub mod selftest;

pub use array::{ArrayConfig, SnapshotBlock, SteeringScale, SteeringVector};
pub use complexity::{ComplexityCount, ComplexityRow};
pub use error::{BeamformError, Result};
pub use fullrank::FullRankState;
pub use jio::{CmSample, JioState};
pub use linalg::{CMatrix, CVector, C64};
pub use metrics::{Algorithm, RunParams, SinrCurve};
pub use scenario::Scenario;
