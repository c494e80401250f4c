//! Scaling-symmetric Markov-switching ARCH model of asset returns.
//!
//! Observed returns are the product `x_t = a_{i_t} y_t` of an endogenous
//! ARCH-like component `y` (memory `M`, Student-t residuals or i.i.d.
//! normals) and a deterministic modulating factor `a_i` indexed by a hidden
//! restart chain `i_t`. The crate covers:
//!
//! - [`model`]: parameter types, the modulating sequence, the restart chain
//!   law and closed-form scalar moments;
//! - [`simulate`]: seeded exact samplers;
//! - [`theory`]: aggregated moment ratios, volatility autocorrelations,
//!   densities, tail constants and scaling fits;
//! - [`empirics`]: estimators over observed series;
//! - [`calibrate`]: method-of-moments estimation of `(D, nu, alpha)` and the
//!   scale;
//! - [`restarts`]: windowed restart posteriors, restart selection and
//!   reconstruction of the endogenous path.
//!
//! The crate is `no_std` (it needs `alloc`). The default `std` feature only
//! switches the floating point backend to the platform math library;
//! `parallel` evaluates calibration grids and restart posteriors with rayon.
#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(any(test, feature = "parallel"))]
extern crate std;

pub mod calibrate;
pub mod empirics;
mod error;
pub mod model;
pub mod restarts;
pub mod simulate;
pub mod special;
pub mod theory;

pub use error::{Error, Result};
pub use model::{ModelParams, Theta, VolatilityMixture};

/// Default absolute tolerance for truncated series over the restart chain.
pub const DEFAULT_EPS: f64 = 1e-12;
