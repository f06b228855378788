//! File formats, experiment running and the `gfk` command line on top of
//! `gfk-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod gauss;
pub mod helmholtz;
pub mod magd;
pub mod runner;
pub mod verify;

pub use error::{Error, Result};
