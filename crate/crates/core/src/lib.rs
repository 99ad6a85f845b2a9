//! Exact lattice and subspace algebra, Puiseux branches at infinity,
//! Weierstrass uniformization of products of elliptic curves, rational-point
//! counting on periodic analytic sets and Galois-orbit degree bounds.
//!
//! The exact layer is generic over an [`IntegerRing`] (big integers or
//! fixed-width `i64`/`i128`); the numeric layer is generic over a [`Real`]
//! (`f32`/`f64`). The aliases below fix the defaults used by the pipeline.

pub mod ball;
pub mod counting;
pub mod error;
pub mod hnf;
pub mod lattice;
pub mod linalg;
pub mod numeric;
pub mod pipeline;
pub mod puiseux;
pub mod quad;
pub mod scalar;
pub mod uniformization;

pub use ball::CBall;
pub use error::{Error, Result};
pub use quad::QuadNumber;
pub use scalar::{ExactField, IntegerRing, Real};

use num_bigint::BigInt;

/// Exact element `a + b sqrt(d)` with big-integer rationals.
pub type QuadScalar = QuadNumber<BigInt>;
/// Exact vector over the session's quadratic field.
pub type ScalarVector = Vec<QuadScalar>;
/// Rational numbers with big-integer numerator and denominator.
pub type Rational = num_rational::BigRational;
pub type Lattice = lattice::Lattice<BigInt>;
pub type ComplexStructure = lattice::ComplexStructure<BigInt>;
pub type Subspace = lattice::Subspace<BigInt>;
pub type TorusCoset = lattice::TorusCoset<BigInt>;
/// Complex ball in double precision.
pub type Ball64 = CBall<f64>;
/// Complex ball in single precision.
pub type Ball32 = CBall<f32>;
