//! Calculus on fractal curves and random walks on the von Koch curve.
//!
//! The crate is organised bottom-up:
//!
//! - [`koch_curve`]: the parametrised curve `u -> w(u)` and Euclidean distances.
//! - [`fractal_calculus`]: mass function, staircase `S(u)`, its inverse, the
//!   F^α integral and derivative, and the conjugacy between curve functions and
//!   functions of the mass coordinate.
//! - [`walker`]: fixed-mass-step random walks, exact path counts and densities.
//! - [`moments`]: absolute moments of the Euclidean distance and exponent fits.
//! - [`stable_laws`]: symmetric stable densities read in the mass coordinate.
//! - [`passage`]: first passage times and the reachability envelope.
//! - [`fractal_fourier`]: Fourier transforms on the curve.

// Comparisons are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fractal_calculus;
pub mod fractal_fourier;
pub mod koch_curve;
pub mod moments;
pub mod numeric;
pub mod passage;
pub mod stable_laws;
pub mod walker;

pub use error::{Error, Result};
pub use fractal_calculus::{CurvePoint, StaircaseTable};
pub use koch_curve::{CurveKind, FractalCurve, PlanePoint};
