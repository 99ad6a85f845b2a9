//! Complex ball arithmetic: a midpoint and a radius enclosing the true value.
//!
//! Every operation widens the radius by the propagated error plus a rounding
//! pad of a few ulps of the operands, so enclosures stay valid under the
//! floating-point evaluation of the midpoint.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CBall<F> {
    pub mid: Complex<F>,
    pub rad: F,
}

fn pad<F: Real>(z: Complex<F>) -> F {
    F::ulp_pad() * z.norm()
}

impl<F: Real> CBall<F> {
    pub fn new(mid: Complex<F>, rad: F) -> Self {
        debug_assert!(rad >= F::zero() || rad.is_nan());
        CBall { mid, rad }
    }

    pub fn exact(mid: Complex<F>) -> Self {
        CBall { mid, rad: F::zero() }
    }

    pub fn real(x: F) -> Self {
        Self::exact(Complex::new(x, F::zero()))
    }

    /// Rounds an `f64` midpoint into `F` and covers the rounding.
    pub fn from_c64(z: Complex<f64>) -> Self {
        let mid = Complex::new(F::lit(z.re), F::lit(z.im));
        let err = Complex::new(z.re - mid.re.to_f64().unwrap_or(0.0), z.im - mid.im.to_f64().unwrap_or(0.0)).norm();
        CBall { mid, rad: F::lit(err) + pad(mid) }
    }

    pub fn zero() -> Self {
        Self::exact(Complex::zero())
    }

    pub fn one() -> Self {
        Self::real(F::one())
    }

    pub fn widen(self, r: F) -> Self {
        CBall { mid: self.mid, rad: self.rad + r }
    }

    pub fn abs_upper(&self) -> F {
        self.mid.norm() + self.rad
    }

    pub fn abs_lower(&self) -> F {
        (self.mid.norm() - self.rad).max(F::zero())
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.norm() <= self.rad
    }

    pub fn contains(&self, z: Complex<F>) -> bool {
        (self.mid - z).norm() <= self.rad
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        (self.mid - other.mid).norm() <= self.rad + other.rad
    }

    pub fn is_finite(&self) -> bool {
        self.mid.re.is_finite() && self.mid.im.is_finite() && self.rad.is_finite()
    }

    pub fn conj(self) -> Self {
        CBall { mid: self.mid.conj(), rad: self.rad }
    }

    pub fn scale(self, k: F) -> Self {
        let mid = self.mid * k;
        CBall { mid, rad: self.rad * k.abs() + pad(mid) }
    }

    /// Reciprocal; the result is unbounded when the ball contains zero.
    pub fn recip(self) -> Self {
        let m = self.mid.norm();
        if m <= self.rad {
            return CBall { mid: Complex::zero(), rad: F::infinity() };
        }
        let mid = self.mid.inv();
        CBall { mid, rad: self.rad / (m * (m - self.rad)) + pad(mid) }
    }

    pub fn exp(self) -> Self {
        let mid = self.mid.exp();
        CBall { mid, rad: mid.norm() * self.rad.exp_m1() + pad(mid) }
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> CBall<f64> {
        CBall {
            mid: Complex::new(self.mid.re.to_f64().unwrap_or(f64::NAN), self.mid.im.to_f64().unwrap_or(f64::NAN)),
            rad: self.rad.to_f64().unwrap_or(f64::INFINITY),
        }
    }
}

impl<F: Real> From<Complex<F>> for CBall<F> {
    fn from(z: Complex<F>) -> Self {
        Self::exact(z)
    }
}

impl<F: Real> Add for CBall<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mid = self.mid + o.mid;
        CBall { mid, rad: self.rad + o.rad + F::ulp_pad() * (self.mid.norm() + o.mid.norm()) }
    }
}

impl<F: Real> Sub for CBall<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mid = self.mid - o.mid;
        CBall { mid, rad: self.rad + o.rad + F::ulp_pad() * (self.mid.norm() + o.mid.norm()) }
    }
}

impl<F: Real> Neg for CBall<F> {
    type Output = Self;
    fn neg(self) -> Self {
        CBall { mid: -self.mid, rad: self.rad }
    }
}

impl<F: Real> Mul for CBall<F> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mid = self.mid * o.mid;
        let rad = self.mid.norm() * o.rad + o.mid.norm() * self.rad + self.rad * o.rad + pad(mid);
        CBall { mid, rad }
    }
}

impl<F: Real> Div for CBall<F> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<F: Real> fmt::Display for CBall<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {:+}i) ± {:e}", self.mid.re, self.mid.im, self.rad.to_f64().unwrap_or(f64::NAN))
    }
}
