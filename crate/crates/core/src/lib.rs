//! Simulator for a nanopore basecaller running on analog phase-change
//! memory tiles connected by a 2D mesh.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analog;
pub mod basecall;
pub mod cli;
pub mod config;
pub mod decoder;
pub mod device;
pub mod dnn;
pub mod error;
pub mod frames;
pub mod mapper;
pub mod pipeline;
pub mod sim;

pub use error::{Error, Result};
