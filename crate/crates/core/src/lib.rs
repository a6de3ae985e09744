//! Linear state-space analysis and control synthesis.
//!
//! The crate is layered bottom-up: [`numkit`] supplies the dense linear
//! algebra, [`model`] the system representations, and the remaining modules
//! build realizations, responses, stability and structural tests, feedback
//! design, LQR and Minimum-Principle solvers on top of them.

pub mod error;
pub mod lqr;
pub mod minprin;
pub mod model;
pub mod numkit;
pub mod realization;
pub mod response;
pub mod stability;
pub mod structural;
pub mod synthesis;

pub use error::{Error, Result};
