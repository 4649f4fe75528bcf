//! Ancilla-based ground- and thermal-state preparation for small Fermi-Hubbard
//! lattices, simulated exactly in fixed particle-number sectors.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cooling;
pub mod couplers;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod noise;
pub mod pauli;
pub mod quantum;
pub mod spectroscopy;
pub mod sweep;
pub mod thermal;

pub use error::{Error, Result};
