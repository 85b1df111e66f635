//! Partial (fractional-order) cancellation of non-minimum-phase zeros.
//!
//! A plant zero at `s = z > 0` is weakened rather than cancelled by the
//! pre-compensator `C1(s) = 1 / Q_{z,nu}(s)`, which turns the factor
//! `(1 - s/z)` into `(1 - (s/z)^{1/nu})`. This crate provides:
//!
//! - [`fotf`]: exact-exponent fractional transfer functions, the canceller,
//!   PID / PI^λD^μ controllers, loop maps and the commensurate sector test;
//! - [`ilt`]: numerical inverse Laplace transforms (accelerated Fourier
//!   series and a Talbot-type contour) and step responses;
//! - [`analysis`]: frequency response, margins, step metrics, `nu` sweeps;
//! - [`realize`]: integer-order rational fits of the compensator;
//! - [`bench`]: the two flexible-link robot plants and stock scenarios.

pub mod analysis;
pub mod bench;
pub mod error;
pub mod fotf;
pub mod ilt;
pub mod poly;
pub mod realize;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use fotf::{
    canceller, composite_canceller, controller_tf, loop_maps, stability, CancellerSpec,
    ControllerSpec, Exponent, Fotf, FracPoly, LoopMaps, LoopModel, Stability, StabilityClass,
};
pub use poly::{real_unstable_zeros, Poly};

/// Toolkit version reported in run results.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
