//! Exact classical and spin Hurwitz numbers.
//!
//! - [`partitions`]: ramification profiles and their statistics.
//! - [`symgroup`]: characters of `S_d` and permutations.
//! - [`hurwitz`]: classical Hurwitz numbers, Frobenius sum and brute force.
//! - [`spin`]: spin Hurwitz numbers by handle removal from base tables.
//! - [`trflow`]: finite-dimensional spectral-flow laboratory (floating point).
//! - [`verify`]: property suites shared by the tests and `shw verify`.
//! - [`cli`]: the `shw` command line.

pub mod cli;
pub mod error;
pub mod hurwitz;
pub mod partitions;
pub mod rational;
pub mod spin;
pub mod symgroup;
pub mod trflow;
pub mod verify;

pub use error::{Error, Result};
pub use partitions::Partition;
pub use rational::Rational;
pub use spin::{Parity, SpinEngine, SpinQuery};
