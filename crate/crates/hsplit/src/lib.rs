//! Error-tolerant backward-backward splitting on Hadamard spaces.
//!
//! The crate couples two proper convex functions f and g through the
//! objective f(x) + g(y) + d(x,y)^2 / (2 gamma) and minimizes it by
//! alternating prox steps, on Euclidean spaces, Poincare balls, metric
//! trees, and products of those. Runs tolerate per-iteration prox errors,
//! record enough state to certify their own convergence afterwards, and
//! can be checked against derivative-free reference searches that never
//! trust a closed-form prox.

#![forbid(unsafe_code)]

pub mod error;
pub mod functions;
pub mod oracle;
pub mod spaces;
pub mod splitting;

pub use error::{Error, Result};
