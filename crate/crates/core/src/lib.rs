//! Relay selection and achievable-rate analysis for multi-hop
//! decode-and-forward (DF) relay networks under i.i.d. Rayleigh fading.
//!
//! The network has `L` hops and `M` relays per intermediate stage. Every
//! link SNR is exponential with mean `snr_scale`, and the end-to-end SNR of
//! a route is the minimum link SNR along it, so the achievable rate of a
//! route is `log2(1 + bottleneck)`.
//!
//! The crate is split into:
//!
//! * [`model`]: network configuration, random SNR trellis, paths and the
//!   rate objective.
//! * [`strategies`]: optimal (max-bottleneck DP), brute force, hop-by-hop,
//!   ad-hoc, block-by-block and sliding-window relay selection.
//! * [`expsum`]: exact algebra over exponential polynomials
//!   `Σ c·uᵖ·e^{−b·u}` used to build every CDF and survival function.
//! * [`special`] and [`quadrature`]: the scaled exponential integral and an
//!   adaptive Gauss–Kronrod integrator.
//! * [`analytic`]: closed-form and approximate achievable rates.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod combinatorics;
pub mod error;
pub mod expsum;
pub mod model;
pub mod quadrature;
pub mod special;
pub mod strategies;

pub use error::{Error, Result};
pub use model::{NetworkConfig, RelayPath, SnrTrellis};
pub use strategies::Strategy;
