//! Near-field XL-MIMO links with polarized dipole arrays.
//!
//! The crate covers the exact and radiative dipole channel between a planar
//! transmit array and one or more three-dipole receive antennas, closed forms
//! for the normalized Gramian in the limit of a continuous aperture, and the
//! waterfilling capacity built on top of either.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod holographic;
pub mod quadrature;
pub mod sum;
pub mod sweep;

pub use error::{Error, Result};
