//! perclab: a desk-scale laboratory for subcritical bond percolation
//! geometry.
//!
//! The crate samples origin clusters on finite pieces of (1/n)Z^d,
//! computes exact event probabilities by exhaustive enumeration on tiny
//! regions, estimates the correlation norm from multi-scale connection
//! probabilities, packages it as a convex gauge, solves Steiner trees
//! under that gauge, and runs the rate-estimation and conditioned-cluster
//! experiments that tie the pieces together.

pub mod error;
pub mod estimate;
pub mod event;
pub mod gauge;
pub mod geometry;
pub mod harness;
pub mod lattice;
pub mod norm_est;
pub mod oracle;
pub mod percolation;
pub mod rng;
pub mod selftest;
pub mod steiner;

pub use error::{Error, Result};
