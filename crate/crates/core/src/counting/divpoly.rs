//! Division polynomials of `y^2 = x^3 + a x + b` and their primitive parts.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::uniformization::CurveModel;
use crate::{Error, Rational, Result};

/// Dense polynomial over `Q`, coefficients in ascending degree; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly(Vec<Rational>);

impl QPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly(c)
    }

    pub fn constant(c: Rational) -> Self {
        QPoly::new(vec![c])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        QPoly::new(c.iter().map(|&v| Rational::from_integer(v.into())).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn leading(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = Rational::zero();
        QPoly::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        QPoly::new(self.0.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return QPoly(Vec::new());
        }
        let mut out = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(QPoly::constant(Rational::one()), |acc, _| acc.mul(self))
    }

    /// Euclidean division; `None` for a zero divisor.
    pub fn div_rem(&self, d: &Self) -> Option<(Self, Self)> {
        if d.is_zero() {
            return None;
        }
        let mut r = self.0.clone();
        let dl = d.leading();
        let dd = d.degree();
        if r.len() <= dd {
            return Some((QPoly(Vec::new()), self.clone()));
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] / &dl;
            if !c.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    r[i + j] -= &c * dj;
                }
            }
            q[i] = c;
        }
        Some((QPoly::new(q), QPoly::new(r)))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }
}

/// Integer polynomial, coefficients in ascending degree; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnivariateIntPoly {
    pub coeffs: Vec<BigInt>,
}

impl UnivariateIntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|x| x.is_zero()) {
            coeffs.pop();
        }
        UnivariateIntPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        UnivariateIntPoly::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    /// gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        let mut c = self.content();
        if c.is_zero() {
            return self.clone();
        }
        if self.leading().is_negative() {
            c = -c;
        }
        UnivariateIntPoly::new(self.coeffs.iter().map(|x| x / &c).collect())
    }

    /// Clears denominators with their lcm (the result has the same roots).
    pub fn from_rational(p: &QPoly) -> Self {
        let l = p.coeffs().iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        UnivariateIntPoly::new(p.coeffs().iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect())
    }

    pub fn to_rational(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect())
    }
}

impl fmt::Display for UnivariateIntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let sep = if first { "" } else { " " };
            let body = match (i, mag.is_one()) {
                (0, _) => mag.to_string(),
                (_, true) => String::new(),
                _ => format!("{mag}*"),
            };
            let var = match i {
                0 => String::new(),
                1 => "x".into(),
                _ => format!("x^{i}"),
            };
            if first {
                write!(f, "{sign}{body}{var}")?;
            } else {
                write!(f, "{sep}{sign} {body}{var}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `ψ_n` in x-only form: `ψ_n = P_n(x)` for odd `n`, `ψ_n = y P_n(x)` for even `n`.
struct DivisionCache {
    f: QPoly,
    memo: HashMap<u64, QPoly>,
}

impl DivisionCache {
    fn new(a: &Rational, b: &Rational) -> Self {
        let r = |v: i64| Rational::from_integer(v.into());
        let f = QPoly::new(vec![b.clone(), a.clone(), Rational::zero(), r(1)]);
        let mut memo = HashMap::new();
        memo.insert(0, QPoly::new(vec![]));
        memo.insert(1, QPoly::constant(r(1)));
        memo.insert(2, QPoly::constant(r(2)));
        let a2 = a * a;
        memo.insert(3, QPoly::new(vec![-a2.clone(), b * r(12), a * r(6), Rational::zero(), r(3)]));
        memo.insert(
            4,
            QPoly::new(vec![
                -(b * b * r(8)) - &a2 * a,
                -(a * b * r(4)),
                -(&a2 * r(5)),
                b * r(20),
                a * r(5),
                Rational::zero(),
                r(1),
            ])
            .scale(&r(4)),
        );
        DivisionCache { f, memo }
    }

    fn get(&mut self, n: u64) -> QPoly {
        if let Some(p) = self.memo.get(&n) {
            return p.clone();
        }
        let m = n / 2;
        let p = if n % 2 == 1 {
            let (pm2, pm, pm1, pp1) = (self.get(m + 2), self.get(m), self.get(m - 1), self.get(m + 1));
            let f2 = self.f.mul(&self.f);
            let first = pm2.mul(&pm.pow(3));
            let second = pm1.mul(&pp1.pow(3));
            if m % 2 == 0 {
                f2.mul(&first).sub(&second)
            } else {
                first.sub(&f2.mul(&second))
            }
        } else {
            let (pm, pm2, pm1, pmm2, pp1) = (self.get(m), self.get(m + 2), self.get(m - 1), self.get(m - 2), self.get(m + 1));
            let inner = pm2.mul(&pm1.pow(2)).sub(&pmm2.mul(&pp1.pow(2)));
            pm.mul(&inner).scale(&Rational::new(1.into(), 2.into()))
        };
        self.memo.insert(n, p.clone());
        p
    }
}

fn check_curve(curve: &CurveModel) -> Result<()> {
    if curve.discriminant_core().is_zero() {
        return Err(Error::SingularCurve);
    }
    Ok(())
}

/// Polynomial in `x` whose roots are the x-coordinates of the nonzero
/// `T`-torsion points, each simple: `ψ_T` for odd `T`, `y ψ_T` for even `T`.
fn torsion_x_poly(cache: &mut DivisionCache, t: u64) -> QPoly {
    let p = cache.get(t);
    if t % 2 == 0 {
        cache.f.mul(&p)
    } else {
        p
    }
}

/// The `T`-division polynomial in `x`: `ψ_T` for odd `T` (degree
/// `(T²-1)/2`) and `y ψ_T` rewritten with `y² = x³+ax+b` for even `T`
/// (degree `(T²+2)/2`). Rational curve coefficients are cleared by the lcm
/// of the denominators.
pub fn division_polynomial(curve: &CurveModel, t: u64) -> Result<UnivariateIntPoly> {
    check_curve(curve)?;
    if t == 0 {
        return Err(Error::Validation("division polynomial order must be at least 1".into()));
    }
    let mut cache = DivisionCache::new(&curve.a, &curve.b);
    Ok(UnivariateIntPoly::from_rational(&torsion_x_poly(&mut cache, t)))
}

/// Primitive integer polynomial whose roots are exactly the x-coordinates
/// of the points of exact order `T`; constant `1` for `T = 1`.
pub fn primitive_division_polynomial(curve: &CurveModel, t: u64) -> Result<UnivariateIntPoly> {
    check_curve(curve)?;
    if t == 0 {
        return Err(Error::Validation("division polynomial order must be at least 1".into()));
    }
    let mut cache = DivisionCache::new(&curve.a, &curve.b);
    let mut exact: HashMap<u64, QPoly> = HashMap::new();
    let divisors: Vec<u64> = (1..=t).filter(|d| t % d == 0).collect();
    for &d in &divisors {
        let mut p = if d == 1 { QPoly::constant(Rational::one()) } else { torsion_x_poly(&mut cache, d) };
        if d > 1 {
            for &e in divisors.iter().filter(|&&e| e > 1 && e < d && d % e == 0) {
                let (q, r) = p.div_rem(&exact[&e]).expect("exact-order factor is nonzero");
                debug_assert!(r.is_zero());
                p = q;
            }
        }
        exact.insert(d, p);
    }
    Ok(UnivariateIntPoly::from_rational(&exact[&t]).primitive_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uniformization::jordan_totient;

    fn curve(a: i64, b: i64) -> CurveModel {
        CurveModel::from_ints(a, b).unwrap()
    }

    #[test]
    fn psi3_by_hand() {
        for (a, b) in [(-1, 0), (1, 0), (0, 2), (-2, 3)] {
            let p = division_polynomial(&curve(a, b), 3).unwrap();
            assert_eq!(p, UnivariateIntPoly::from_ints(&[-a * a, 12 * b, 6 * a, 0, 3]));
        }
    }

    #[test]
    fn degrees() {
        for t in 1..=13u64 {
            let p = division_polynomial(&curve(-2, 3), t).unwrap();
            let expected = if t % 2 == 1 { (t * t - 1) / 2 } else { (t * t + 2) / 2 };
            assert_eq!(p.degree() as u64, expected, "T = {t}");
            let q = primitive_division_polynomial(&curve(-2, 3), t).unwrap();
            let exact = if t == 1 { 0 } else if t == 2 { 3 } else { jordan_totient(2, t) / 2 };
            assert_eq!(q.degree() as u64, exact, "T = {t}");
        }
    }

    #[test]
    fn two_torsion_is_the_cubic() {
        let q = primitive_division_polynomial(&curve(1, 0), 2).unwrap();
        assert_eq!(q, UnivariateIntPoly::from_ints(&[0, 1, 0, 1]));
    }

    #[test]
    fn psi4_oracle() {
        // ψ_4 / (2y) = 2x^6 + 10ax^4 + 40bx^3 - 10a^2x^2 - 8abx - 16b^2 - 2a^3.
        let (a, b) = (-2i64, 3i64);
        let p = division_polynomial(&curve(a, b), 4).unwrap().to_rational();
        let g = QPoly::from_ints(&[-16 * b * b - 2 * a * a * a, -8 * a * b, -10 * a * a, 40 * b, 10 * a, 0, 2]);
        let f = QPoly::from_ints(&[b, a, 0, 1]);
        assert_eq!(p, f.mul(&g).scale(&Rational::from_integer(2.into())));
    }

    #[test]
    fn three_torsion_of_b_curve() {
        // y^2 = x^3 + 2 has the rational 3-torsion x = 0, so x divides ψ_3.
        let p = primitive_division_polynomial(&curve(0, 2), 3).unwrap();
        assert!(p.coeffs[0].is_zero());
    }

    #[test]
    fn singular_curve_rejected() {
        let c = CurveModel { a: Rational::from_integer((-3).into()), b: Rational::from_integer(2.into()) };
        assert!(matches!(division_polynomial(&c, 3), Err(Error::SingularCurve)));
    }

    #[test]
    fn display() {
        assert_eq!(UnivariateIntPoly::from_ints(&[-1, 0, 6, 0, 3]).to_string(), "3*x^4 + 6*x^2 - 1");
    }
}
