//! Quantum and classical stress classifiers on skin-conductance-response
//! events, built on a dense statevector simulator.
//!
//! Modules, bottom-up:
//!
//! - [`simulator`]: statevectors, gates, circuits.
//! - [`encodings`]: angle, amplitude and ZZ feature maps.
//! - [`qkernel`]: linear, RBF and state-overlap kernels and Gram matrices.
//! - [`svm`]: SMO dual solver on precomputed kernels, one-vs-rest.
//! - [`qnn`]: tree-tensor-network variational classifier.
//! - [`classical_nn`]: the 4-12-6-1 MLP baseline.
//! - [`data`]: SCR schema, CSV I/O, preprocessing, splits, synthetic data.
//! - [`bench`]: metrics, cross-validation, five-model comparison, reports.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod classical_nn;
pub mod config;
pub mod data;
pub mod encodings;
pub mod error;
pub mod qkernel;
pub mod qnn;
pub mod simulator;
pub mod svm;

mod par;

pub use error::{Error, Result};
