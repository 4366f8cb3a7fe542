//! Exact rational approximation on rational-preserving Cantor sets.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod arith;
pub mod digits;
pub mod error;
pub mod exponents;
pub mod extrinsic;
pub mod ifs;
pub mod intrinsic;

pub use error::{Error, Result};
