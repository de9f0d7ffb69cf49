//! Ergodic capacity of diversity receivers over extended generalized-K
//! (EGK) composite fading, computed from a single moment-generating-
//! function integral.
//!
//! The crate is layered bottom-up:
//!
//! * [`special`] - scalar special functions (log-gamma on the complex
//!   plane, exponential/cosine integrals, 2F2, extended incomplete
//!   gamma).
//! * [`quad`] - Gauss-Legendre panels and an adaptive driver.
//! * [`foxh`] - a Mellin-Barnes engine for Fox H functions: validation,
//!   pole/strip analysis, vertical and bent contours, and a reusable
//!   prepared-kernel evaluator.
//! * [`egk`] - the EGK fading model: density, generalized MGF of
//!   gamma^p and its s-derivative as H-function instances, sampling,
//!   and named special cases.
//! * [`capacity`] - combiner descriptions, the auxiliary capacity
//!   kernel, and the semi-infinite capacity integrals for independent
//!   non-identical branches or a caller-supplied joint MGF.
//! * [`mc`] - a Monte-Carlo reference implementation with deterministic
//!   per-sample substreams.

pub mod capacity;
pub mod egk;
pub mod error;
pub mod foxh;
pub mod mc;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
