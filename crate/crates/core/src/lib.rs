//! Relativistic free time-of-arrival operator for positive-energy spin-0 particles.
//!
//! The crate is `no_std` (with `alloc`). It covers the position-space time
//! kernel, its Nyström coarse-graining and eigenanalysis, wavepacket
//! transforms and evolution, expected arrival times (exact and Borel
//! resummed), and arrival-time distributions.
//!
//! Units are whatever the caller picks for [`PhysicalParams`]; every routine
//! is written in terms of μ, c and ħ, so μ = c = ħ = 1 is only a default.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod expectation;
pub mod grid;
pub mod interp;
pub mod kernel;
pub mod nystrom;
mod params;
pub mod quad;
pub mod special;
pub mod toadist;
pub mod waves;

pub use error::{Error, Result};
pub use kernel::sgn;
pub use params::PhysicalParams;

pub use num_complex::Complex64;
