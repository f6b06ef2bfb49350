//! Domain-decomposed constrained least squares (CLS) state estimation with
//! Kalman filter solvers and DyDD dynamic load balancing.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] — dense SPD, weighted normal-equation and graph Laplacian solves.
//! * [`estimation`] — the CLS model, its normal-equation solution and the Kalman filter.
//! * [`dd`] — column decomposition with overlap and the alternating Schwarz iteration.
//! * [`balance`] — empty-subdomain splitting, Laplacian scheduling and boundary migration.
//! * [`harness`] — scenario generation, timed experiments and report emission.

pub mod balance;
pub mod dd;
pub mod error;
pub mod harness;
pub mod estimation;
pub mod linalg;

pub use error::{Error, Result};
