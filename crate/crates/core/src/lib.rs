#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diff;
pub mod field;
pub mod gan;
pub mod geom;
pub mod linalg;
pub mod synth;
pub mod temporal;
pub mod train;
