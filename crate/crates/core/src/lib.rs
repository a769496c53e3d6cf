//! Feedback-based quantum optimization for MAX-CUT.
//!
//! The crate simulates the layer-by-layer feedback algorithm on exact
//! statevectors: a circuit of alternating problem and driver layers is grown one
//! layer at a time, and each new layer's control parameter is computed from
//! expectation values measured on the latest state. Two feedback laws are
//! provided: the first-order law `beta = -A` and the second-order law built
//! from the quadratic expansion of the per-layer energy change, together with a
//! hybrid that caps the second-order value by the first-order one.
//!
//! Module map:
//!
//! - [`problem`]: graphs, random cubic graph sampling, isomorphism
//!   fingerprints, the diagonal MAX-CUT Hamiltonian and its exact optimum.
//! - [`engine`]: matrix-free statevector kernels and the feedback scalars.
//! - [`feedback`]: the control laws.
//! - [`runner`]: the closed-loop iteration, open-loop replay, trace export.
//! - [`experiments`]: ensemble curves, critical time step search, scaling fits.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod feedback;
pub mod problem;
pub mod runner;

pub use error::{Error, Result};
