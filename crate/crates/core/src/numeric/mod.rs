//! Deterministic numeric kernels shared by every other module.

mod fd;
mod rng;
mod sampling;
mod simplex;
mod special;

pub use fd::{finite_difference_grad, max_relative_error};
pub use rng::{hash_str, mix64, SeededStream};
pub use sampling::{sample_dirichlet, sample_gamma, sample_log_gamma};
pub use simplex::SimplexVector;
pub use special::{digamma, log_gamma, trigamma};
