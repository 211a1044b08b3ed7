//! Austere submanifolds of the unit sphere of traceless Hermitian matrices
//! over the reals, complexes and quaternions.
//!
//! The zero level of the odd power-trace map on that sphere splits into a
//! regular part `B(n, F)` and a critical part `C(n, F)`. This crate builds
//! frames and shape operators on both, checks the Dupin structure in size 4,
//! and tests austere subspaces of symmetric matrices in exact arithmetic.

pub mod c4;
pub mod dupin;
pub mod error;
pub mod field;
pub mod geometry;
pub mod subspaces;
pub mod tol;
pub mod trace;

pub use error::{Error, Result};
pub use field::{FMatrix, Field, Quaternion};
