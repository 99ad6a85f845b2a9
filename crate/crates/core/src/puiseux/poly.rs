//! Sparse bivariate polynomials with complex coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numeric::C64;
use crate::quad::{parse_ratio, split_terms};
use crate::uniformization::variety::CRational;
use crate::{Error, Rational, Result};

/// Coefficient types a [`BivariatePoly`] can carry.
pub trait PolyCoeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn is_zero_coeff(&self) -> bool;
    fn to_c64(&self) -> C64;
    fn to_parts(&self) -> (String, String);
    fn from_parts(re: &str, im: &str) -> Result<Self>;
}

impl PolyCoeff for CRational {
    fn is_zero_coeff(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn to_c64(&self) -> C64 {
        C64::new(crate::scalar::ratio_to_float(&self.re), crate::scalar::ratio_to_float(&self.im))
    }

    fn to_parts(&self) -> (String, String) {
        (self.re.to_string(), self.im.to_string())
    }

    fn from_parts(re: &str, im: &str) -> Result<Self> {
        Ok(CRational::new(parse_ratio::<BigInt>(re)?, parse_ratio::<BigInt>(im)?))
    }
}

impl PolyCoeff for C64 {
    fn is_zero_coeff(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn to_c64(&self) -> C64 {
        *self
    }

    fn to_parts(&self) -> (String, String) {
        (format!("{:e}", self.re), format!("{:e}", self.im))
    }

    fn from_parts(re: &str, im: &str) -> Result<Self> {
        let f = |s: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(x) => Ok(x),
                Err(_) => Ok(crate::scalar::ratio_to_float(&parse_ratio::<BigInt>(s)?)),
            }
        };
        Ok(C64::new(f(re)?, f(im)?))
    }
}

/// `Σ c_ij x^i y^j` with no stored zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePoly<C> {
    terms: BTreeMap<(u32, u32), C>,
}

/// Exact polynomial over `Q(i)`.
pub type ExactBivariate = BivariatePoly<CRational>;
/// Floating-point polynomial, as produced by implicitization.
pub type NumericBivariate = BivariatePoly<C64>;

impl<C: PolyCoeff> BivariatePoly<C> {
    pub fn new(terms: impl IntoIterator<Item = ((u32, u32), C)>) -> Self {
        BivariatePoly { terms: terms.into_iter().filter(|(_, c)| !c.is_zero_coeff()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree `δ = max(i + j)`; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn deg_x(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn deg_y(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Option<&C> {
        self.terms.get(&(i, j))
    }

    /// The same polynomial with the roles of `x` and `y` exchanged.
    pub fn swap_vars(&self) -> Self {
        BivariatePoly { terms: self.terms.iter().map(|(&(i, j), c)| ((j, i), c.clone())).collect() }
    }

    pub fn to_numeric(&self) -> NumericBivariate {
        BivariatePoly { terms: self.terms.iter().map(|(k, c)| (*k, c.to_c64())).collect() }
    }

    pub fn eval(&self, x: C64, y: C64) -> C64 {
        self.terms.iter().map(|(&(i, j), c)| c.to_c64() * x.powu(i) * y.powu(j)).sum()
    }

    /// Coefficients of `y^0, …, y^{deg_y}` at a fixed `x`.
    pub fn y_coeffs_at(&self, x: C64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.deg_y() as usize + 1];
        for (&(i, j), c) in &self.terms {
            out[j as usize] += c.to_c64() * x.powu(i);
        }
        out
    }

    /// `dG/dy` evaluated coefficientwise in floating point.
    pub fn dy_coeffs_at(&self, x: C64) -> Vec<C64> {
        let c = self.y_coeffs_at(x);
        c.iter().enumerate().skip(1).map(|(j, v)| v * j as f64).collect()
    }

    /// Sum of coefficient moduli, used as an evaluation scale.
    pub fn magnitude(&self, x: C64, y: C64) -> f64 {
        self.terms.iter().map(|(&(i, j), c)| c.to_c64().norm() * x.norm().powi(i as i32) * y.norm().powi(j as i32)).sum()
    }
}

impl ExactBivariate {
    /// Parses expressions such as `y^2 - x^2 - 1`, `x*y - 1` or `1/2i*x - y`.
    /// The variables are `x`/`y`; `z1`/`z2` are accepted as aliases.
    pub fn parse(s: &str) -> Result<Self> {
        let mut terms: BTreeMap<(u32, u32), CRational> = BTreeMap::new();
        let parts = split_terms(s);
        if parts.is_empty() {
            return Err(Error::Parse(format!("empty polynomial '{s}'")));
        }
        for (neg, t) in parts {
            let mut coeff = CRational::new(Rational::one(), Rational::zero());
            let (mut i, mut j) = (0u32, 0u32);
            for factor in t.split('*') {
                let f = factor.trim().trim_start_matches('(').trim_end_matches(')');
                let (sym, e) = match f.split_once('^') {
                    Some((sym, e)) => (sym, e.parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent in '{f}'")))?),
                    None => (f, 1),
                };
                match sym {
                    "x" | "z1" => i += e,
                    "y" | "z2" => j += e,
                    "i" => coeff *= CRational::new(Rational::zero(), Rational::one()),
                    "" => return Err(Error::Parse(format!("empty factor in '{s}'"))),
                    _ => coeff *= parse_complex_literal(sym)?,
                }
            }
            if neg {
                coeff = -coeff;
            }
            let slot = terms.entry((i, j)).or_insert_with(|| CRational::new(Rational::zero(), Rational::zero()));
            *slot = slot.clone() + coeff;
        }
        let poly = BivariatePoly::new(terms);
        if poly.is_zero() {
            return Err(Error::Validation(format!("polynomial '{s}' is identically zero")));
        }
        Ok(poly)
    }
}

impl fmt::Display for ExactBivariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(i, j), c)) in self.terms.iter().rev().enumerate() {
            let (re, im) = (&c.re, &c.im);
            let negative = im.is_zero() && re.is_negative() || re.is_zero() && im.is_negative();
            let sep = match (n, negative) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            write!(f, "{sep}")?;
            let mut factors: Vec<String> = Vec::new();
            if im.is_zero() {
                if !re.abs().is_one() || i + j == 0 {
                    factors.push(re.abs().to_string());
                }
            } else if re.is_zero() {
                factors.push(if im.abs().is_one() { "i".into() } else { format!("{}i", im.abs()) });
            } else {
                let sign = if im.is_negative() { '-' } else { '+' };
                factors.push(format!("({re}{sign}{}i)", im.abs()));
            }
            for (sym, e) in [("x", i), ("y", j)] {
                match e {
                    0 => {}
                    1 => factors.push(sym.into()),
                    _ => factors.push(format!("{sym}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MonomialJson {
    i: u32,
    j: u32,
    re: String,
    im: String,
}

impl<C: PolyCoeff> Serialize for BivariatePoly<C> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let list: Vec<MonomialJson> = self
            .terms
            .iter()
            .map(|(&(i, j), c)| {
                let (re, im) = c.to_parts();
                MonomialJson { i, j, re, im }
            })
            .collect();
        list.serialize(s)
    }
}

impl<'de, C: PolyCoeff> Deserialize<'de> for BivariatePoly<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let list = Vec::<MonomialJson>::deserialize(d)?;
        let mut terms = BTreeMap::new();
        for m in list {
            let c = C::from_parts(&m.re, &m.im).map_err(serde::de::Error::custom)?;
            if terms.insert((m.i, m.j), c).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate monomial ({}, {})", m.i, m.j)));
            }
        }
        Ok(BivariatePoly::new(terms))
    }
}

/// `p/q`, `p/qi`, or `a+bi` with rational `a`, `b`.
fn parse_complex_literal(s: &str) -> Result<CRational> {
    let Some(body) = s.strip_suffix('i') else {
        return Ok(CRational::new(parse_ratio::<BigInt>(s)?, Rational::zero()));
    };
    match body.rfind(['+', '-']).filter(|&k| k > 0) {
        Some(k) => {
            let im = if k + 1 == body.len() { format!("{}1", &body[k..]) } else { body[k..].to_string() };
            Ok(CRational::new(parse_ratio::<BigInt>(&body[..k])?, parse_ratio::<BigInt>(&im)?))
        }
        None => {
            let im = match body {
                "" | "+" => "1",
                "-" => "-1",
                b => b,
            };
            Ok(CRational::new(Rational::zero(), parse_ratio::<BigInt>(im)?))
        }
    }
}

/// Exact complex rational from a pair of integers, for tests and examples.
pub fn crat(re: i64, im: i64) -> CRational {
    Complex::new(Rational::from_integer(re.into()), Rational::from_integer(im.into()))
}
