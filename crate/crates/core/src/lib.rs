#![no_std]
// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod coupled_map;
pub mod exec;
pub mod geometry;
pub mod kinetics;
pub mod observables;
pub mod phase;
pub mod potential;
pub mod quadrature;
pub mod rng;
