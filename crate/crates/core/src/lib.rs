//! Numerical core of an indoor laser optical-wireless network simulator.
//!
//! Multimode VCSEL beams are described as power-weighted sums of
//! Laguerre–Gaussian modes ([`beam`]), optionally reshaped by a thin micro
//! lens. The eye-safe transmit power follows from the beam geometry at the
//! most hazardous viewing position ([`safety`]). Line-of-sight channel gains
//! are obtained by integrating the beam intensity over each detector
//! aperture ([`channel`]), the channel is inverted with a zero-forcing
//! precoder ([`precoding`]) and the resulting per-user SINR, sum rate and
//! energy efficiency are evaluated in [`link`]. [`sweep`] ties these together
//! for beam-waist sweeps.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` is used on purpose so NaN lands in the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod beam;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod link;
pub mod precoding;
pub mod quadrature;
pub mod safety;
pub mod scene;
pub mod sweep;

pub use error::{Error, Result};
