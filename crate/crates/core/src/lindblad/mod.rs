//! Lindblad master equation engine.
//!
//! Vectorization stacks columns, `vec(rho)[i + d j] = rho[i][j]`, so that
//! `vec(A rho B) = (B^T ⊗ A) vec(rho)`. Rates and frequencies are linear
//! (GHz) and the generator carries the `2 pi` to act on ns time.

pub mod density;
pub mod evolve;
pub mod liouvillian;
pub mod response;
pub mod steady;

pub use density::DensityMatrix;
pub use evolve::{evolve, evolve_with, Drive, EvolveOptions, Trajectory};
pub use liouvillian::{build_liouvillian, build_liouvillian_on, Collapse, Liouvillian};
pub use response::{linear_response, ResponseSolver};
pub use steady::{steady_state, steady_state_verified};
