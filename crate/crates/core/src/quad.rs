//! Exact arithmetic in a real quadratic field Q(sqrt d).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{ratio_to_float, ExactField, IntegerRing, Real};

/// `a + b*sqrt(d)` with rational `a`, `b` and squarefree `d >= 2`.
///
/// Rational elements (`b == 0`) carry `d == 0` unless they were produced by
/// arithmetic with an irrational element; they combine with any field.
#[derive(Clone, Debug, Hash)]
pub struct QuadNumber<I: IntegerRing> {
    a: Ratio<I>,
    b: Ratio<I>,
    d: I,
}

/// Returns true when `d >= 2` has no repeated prime factor.
pub fn is_squarefree<I: IntegerRing>(d: &I) -> bool {
    if *d < I::from_i64(2).unwrap() {
        return false;
    }
    let mut n = d.clone();
    let mut p = I::from_i64(2).unwrap();
    while p.clone() * p.clone() <= n {
        let sq = p.clone() * p.clone();
        if (n.clone() % sq).is_zero() {
            return false;
        }
        while (n.clone() % p.clone()).is_zero() {
            n = n / p.clone();
        }
        p = p + I::one();
    }
    true
}

impl<I: IntegerRing> QuadNumber<I> {
    pub fn new(a: Ratio<I>, b: Ratio<I>, d: I) -> Result<Self> {
        if b.is_zero() {
            return Ok(Self::rational(a));
        }
        if !is_squarefree(&d) {
            return Err(Error::Parse(format!("field parameter {d} is not a squarefree integer >= 2")));
        }
        Ok(QuadNumber { a, b, d })
    }

    pub fn rational(a: Ratio<I>) -> Self {
        QuadNumber { a, b: Ratio::zero(), d: I::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(Ratio::from_integer(I::from_i64(n).expect("small integer")))
    }

    /// `sqrt(d)` itself.
    pub fn sqrt_d(d: I) -> Result<Self> {
        Self::new(Ratio::zero(), Ratio::one(), d)
    }

    pub fn rational_part(&self) -> &Ratio<I> {
        &self.a
    }

    pub fn irrational_part(&self) -> &Ratio<I> {
        &self.b
    }

    /// The field parameter, `None` for rational elements.
    pub fn field(&self) -> Option<&I> {
        if self.b.is_zero() {
            None
        } else {
            Some(&self.d)
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Galois conjugate `a - b*sqrt(d)`.
    pub fn conjugate(&self) -> Self {
        QuadNumber { a: self.a.clone(), b: -self.b.clone(), d: self.d.clone() }
    }

    /// Field norm `a^2 - d b^2`.
    pub fn norm(&self) -> Ratio<I> {
        let d = Ratio::from_integer(self.d.clone());
        self.a.clone() * self.a.clone() - d * self.b.clone() * self.b.clone()
    }

    pub fn to_float<F: Real>(&self) -> F {
        let a: F = ratio_to_float(&self.a);
        if self.b.is_zero() {
            return a;
        }
        let b: F = ratio_to_float(&self.b);
        let d = F::lit(self.d.to_f64().unwrap_or(f64::NAN));
        a + b * d.sqrt()
    }

    fn join_field(&self, other: &Self) -> I {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, true) => I::zero(),
            (false, true) => self.d.clone(),
            (true, false) => other.d.clone(),
            (false, false) => {
                assert!(
                    self.d == other.d,
                    "quadratic field mismatch: sqrt({}) vs sqrt({})",
                    self.d,
                    other.d
                );
                self.d.clone()
            }
        }
    }

    /// Checks that `self` and `other` live in a common field.
    pub fn compatible(&self, other: &Self) -> bool {
        self.b.is_zero() || other.b.is_zero() || self.d == other.d
    }

    fn normalized(a: Ratio<I>, b: Ratio<I>, d: I) -> Self {
        if b.is_zero() {
            Self::rational(a)
        } else {
            QuadNumber { a, b, d }
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "division by zero in Q(sqrt d)");
        if self.b.is_zero() {
            return Self::rational(self.a.recip());
        }
        let n = self.norm();
        Self::normalized(self.a.clone() / n.clone(), -self.b.clone() / n, self.d.clone())
    }
}

/// Checks that every element shares one quadratic field and returns it.
pub fn common_field<'a, I: IntegerRing>(xs: impl IntoIterator<Item = &'a QuadNumber<I>>) -> Result<Option<I>> {
    let mut field: Option<I> = None;
    for x in xs {
        if let Some(d) = x.field() {
            match &field {
                None => field = Some(d.clone()),
                Some(f) if f != d => {
                    return Err(Error::FieldMismatch { left: f.to_string(), right: d.to_string() });
                }
                _ => {}
            }
        }
    }
    Ok(field)
}

impl<I: IntegerRing> PartialEq for QuadNumber<I> {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && (self.b.is_zero() || self.d == other.d)
    }
}
impl<I: IntegerRing> Eq for QuadNumber<I> {}

impl<I: IntegerRing> Zero for QuadNumber<I> {
    fn zero() -> Self {
        Self::rational(Ratio::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl<I: IntegerRing> One for QuadNumber<I> {
    fn one() -> Self {
        Self::rational(Ratio::one())
    }
}

impl<I: IntegerRing> Add for QuadNumber<I> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let d = self.join_field(&rhs);
        Self::normalized(self.a + rhs.a, self.b + rhs.b, d)
    }
}

impl<I: IntegerRing> Sub for QuadNumber<I> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let d = self.join_field(&rhs);
        Self::normalized(self.a - rhs.a, self.b - rhs.b, d)
    }
}

impl<I: IntegerRing> Mul for QuadNumber<I> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let d = self.join_field(&rhs);
        let dr = Ratio::from_integer(d.clone());
        let a = self.a.clone() * rhs.a.clone() + dr * self.b.clone() * rhs.b.clone();
        let b = self.a * rhs.b + self.b * rhs.a;
        Self::normalized(a, b, d)
    }
}

impl<I: IntegerRing> Div for QuadNumber<I> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<I: IntegerRing> Neg for QuadNumber<I> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::normalized(-self.a, -self.b, self.d)
    }
}

impl<I: IntegerRing> ExactField for QuadNumber<I> {}

fn fmt_ratio<I: IntegerRing>(r: &Ratio<I>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl<I: IntegerRing> fmt::Display for QuadNumber<I> {
    /// Serialized form: `a/b` or `a/b+c/e*sqrt(d)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_ratio(&self.a))?;
        if !self.b.is_zero() {
            if self.b.is_negative() {
                write!(f, "-{}*sqrt({})", fmt_ratio(&-self.b.clone()), self.d)?;
            } else {
                write!(f, "+{}*sqrt({})", fmt_ratio(&self.b), self.d)?;
            }
        }
        Ok(())
    }
}

/// Parses `p`, `p/q`, or a signed `p/q` literal.
pub fn parse_ratio<I: IntegerRing>(s: &str) -> Result<Ratio<I>> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal '{s}'"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = num.strip_prefix('+').unwrap_or(num);
    let n: I = num.parse().map_err(|_| bad())?;
    let d: I = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Ratio::new(n, d))
}

/// Splits an expression into signed additive terms at top-level `+`/`-`.
pub(crate) fn split_terms(s: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut negative = false;
    let mut prev: Option<char> = None;
    for ch in s.chars().filter(|c| !c.is_whitespace()) {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '-' if depth == 0 && !matches!(prev, None | Some('/') | Some('*')) => {
                if !cur.is_empty() {
                    out.push((negative, std::mem::take(&mut cur)));
                }
                negative = ch == '-';
            }
            '+' | '-' if depth == 0 && prev.is_none() => {
                negative = ch == '-';
            }
            _ => cur.push(ch),
        }
        prev = Some(ch);
    }
    if !cur.is_empty() {
        out.push((negative, cur));
    }
    out
}

/// A product term: rational coefficient, optional `sqrt(n)` factor, and an
/// imaginary-unit flag.
pub(crate) struct Term<I: IntegerRing> {
    pub coeff: Ratio<I>,
    pub sqrt: Option<I>,
    pub imaginary: bool,
}

pub(crate) fn parse_term<I: IntegerRing>(t: &str) -> Result<Term<I>> {
    let mut coeff = Ratio::<I>::one();
    let mut sqrt = None;
    let mut imaginary = false;
    for factor in t.split('*') {
        let f = factor.trim();
        if f.is_empty() {
            return Err(Error::Parse(format!("empty factor in '{t}'")));
        }
        // `2i`, `1/2i` and `sqrt(3)i` carry a trailing imaginary unit.
        let f = match f.strip_suffix('i') {
            Some(body) if !body.is_empty() => {
                if imaginary {
                    return Err(Error::Parse(format!("repeated 'i' in '{t}'")));
                }
                imaginary = true;
                body
            }
            _ => f,
        };
        if f == "i" {
            if imaginary {
                return Err(Error::Parse(format!("repeated 'i' in '{t}'")));
            }
            imaginary = true;
        } else if let Some(inner) = f.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            if sqrt.is_some() {
                return Err(Error::Parse(format!("repeated sqrt in '{t}'")));
            }
            let n: I = inner.trim().parse().map_err(|_| Error::Parse(format!("bad sqrt argument in '{t}'")))?;
            sqrt = Some(n);
        } else {
            coeff = coeff * parse_ratio::<I>(f)?;
        }
    }
    Ok(Term { coeff, sqrt, imaginary })
}

/// Folds a `sqrt(n)` factor into `(rational multiplier, squarefree part)`.
pub(crate) fn reduce_sqrt<I: IntegerRing>(n: &I) -> Result<(I, I)> {
    if n.is_negative() {
        return Err(Error::Parse(format!("sqrt of negative integer {n}")));
    }
    let mut outside = I::one();
    let mut inside = n.clone();
    let mut p = I::from_i64(2).unwrap();
    while p.clone() * p.clone() <= inside {
        let sq = p.clone() * p.clone();
        while (inside.clone() % sq.clone()).is_zero() {
            inside = inside / sq.clone();
            outside = outside * p.clone();
        }
        p = p + I::one();
    }
    Ok((outside, inside))
}

pub(crate) fn term_to_quad<I: IntegerRing>(term: &Term<I>) -> Result<QuadNumber<I>> {
    match &term.sqrt {
        None => Ok(QuadNumber::rational(term.coeff.clone())),
        Some(n) => {
            let (outside, inside) = reduce_sqrt(n)?;
            let c = term.coeff.clone() * Ratio::from_integer(outside);
            if inside.is_one() || inside.is_zero() {
                let v = if inside.is_zero() { Ratio::zero() } else { c };
                Ok(QuadNumber::rational(v))
            } else {
                QuadNumber::new(Ratio::zero(), c, inside)
            }
        }
    }
}

impl<I: IntegerRing> FromStr for QuadNumber<I> {
    type Err = Error;

    /// Accepts sums of terms like `1/2`, `-3/4*sqrt(2)`, `sqrt(3)`.
    fn from_str(s: &str) -> Result<Self> {
        let terms = split_terms(s);
        if terms.is_empty() {
            return Err(Error::Parse(format!("empty scalar literal '{s}'")));
        }
        let mut acc = QuadNumber::zero();
        for (neg, t) in terms {
            let term = parse_term::<I>(&t)?;
            if term.imaginary {
                return Err(Error::Parse(format!("unexpected imaginary unit in real scalar '{s}'")));
            }
            let q = term_to_quad(&term)?;
            if !acc.compatible(&q) {
                return Err(Error::FieldMismatch {
                    left: acc.field().map(|d| d.to_string()).unwrap_or_default(),
                    right: q.field().map(|d| d.to_string()).unwrap_or_default(),
                });
            }
            acc = if neg { acc - q } else { acc + q };
        }
        Ok(acc)
    }
}

impl<I: IntegerRing> Serialize for QuadNumber<I> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de, I: IntegerRing> Deserialize<'de> for QuadNumber<I> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Decomposes a vector over Q(sqrt d) as `first + sqrt(d) * second`.
pub fn rational_components<I: IntegerRing>(v: &[QuadNumber<I>]) -> Result<(Vec<Ratio<I>>, Vec<Ratio<I>>)> {
    common_field(v.iter())?;
    Ok(v.iter().map(|x| (x.a.clone(), x.b.clone())).unzip())
}

/// Converts an integer-ring rational to a `BigInt` rational.
pub fn ratio_to_big<I: IntegerRing>(r: &Ratio<I>) -> Ratio<BigInt> {
    Ratio::new(r.numer().to_bigint(), r.denom().to_bigint())
}
