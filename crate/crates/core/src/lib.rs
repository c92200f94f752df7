//! Exact simulation of economical multi-phase-covariant `N -> M` qudit
//! cloning machines.
//!
//! The crate builds the shift isometry and its Choi operator, computes
//! single-qudit and global fidelities both by direct simulation and by
//! closed-form combinatorial sums, and re-derives the optimal block of the
//! Choi operator by exhaustive search.

pub mod cli;
pub mod cloner;
pub mod error;
pub mod fidelity;
pub mod optimizer;
pub mod states;
pub mod symspace;
pub mod verify;

pub use error::{Error, Result};
