//! Numerics for the generalized Hilbert operator `H_μ` induced by a positive
//! measure `μ` on `[0, 1)`.
//!
//! The Hankel matrix `(μ_{n+k})` acts on Taylor coefficients; the same
//! operator has the integral form `∫ f(t) / (1 - tz) dμ(t)`. The crate
//! provides:
//!
//! * [`measure`]: measures, tail masses and moment sequences,
//! * [`carleson`]: Carleson-type functionals and boundedness predictions,
//! * [`hardy`]: integral means, Hardy/Besov norms, test functions and majorants,
//! * [`operator`]: coefficient-side and integral-side actions of `H_μ`,
//! * [`schatten`]: singular values and Schatten-class diagnostics,
//! * [`verify`]: the end-to-end check suite used by the CLI.

pub mod carleson;
pub mod error;
mod fit;
pub mod hardy;
pub mod measure;
pub mod operator;
pub mod quad;
pub mod schatten;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{conj_exponent, Measure, MeasureKind, MomentMethod, MomentSequence, RadialPoint};
pub use quad::QuadratureSpec;
