//! Scalar abstractions shared by the exact and the floating-point layers.
//!
//! The exact layer (lattices, subspaces, division polynomials) is generic
//! over an integer ring `I` and works with `Ratio<I>` and quadratic numbers
//! built on top of it. The numeric layer (Weierstrass functions, Puiseux
//! coefficients, implicitization) is generic over a binary float `F`.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Integer rings usable as the base of exact arithmetic.
///
/// `BigInt` is the default; fixed-width types (`i64`, `i128`) work for small
/// inputs and overflow like any fixed-width integer.
pub trait IntegerRing:
    Integer
    + Signed
    + Clone
    + Debug
    + Display
    + Hash
    + FromPrimitive
    + ToPrimitive
    + std::str::FromStr
    + Send
    + Sync
    + 'static
{
    fn to_bigint(&self) -> BigInt;
    fn from_bigint(v: &BigInt) -> Option<Self>;
}

impl IntegerRing for BigInt {
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
}

macro_rules! impl_fixed_ring {
    ($($t:ty),*) => {$(
        impl IntegerRing for $t {
            fn to_bigint(&self) -> BigInt {
                BigInt::from(*self)
            }
            fn from_bigint(v: &BigInt) -> Option<Self> {
                <$t>::try_from(v.clone()).ok()
            }
        }
    )*};
}
impl_fixed_ring!(i64, i128);

/// A field with exact equality, the coefficient domain of echelon forms.
pub trait ExactField:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
}

impl<I: IntegerRing> ExactField for Ratio<I> {}

/// Binary floating-point scalars for the numeric layer (`f32`, `f64`).
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` constant, rounding to nearest.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }
    /// Unit roundoff padding used for outward rounding of enclosures.
    fn ulp_pad() -> Self {
        Self::epsilon() * Self::lit(4.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Nearest float to an exact rational.
pub fn ratio_to_float<I: IntegerRing, F: Real>(r: &Ratio<I>) -> F {
    let n = r.numer().to_bigint();
    let d = r.denom().to_bigint();
    // Scale down huge operands so that both fit into f64 before dividing.
    let bits = n.bits().max(d.bits());
    let shift = bits.saturating_sub(1000);
    let nf = (&n >> shift).to_f64().unwrap_or(f64::NAN);
    let df = (&d >> shift).to_f64().unwrap_or(f64::NAN);
    F::lit(nf / df)
}
