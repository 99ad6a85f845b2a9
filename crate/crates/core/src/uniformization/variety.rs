//! Subvarieties of `E_1 × ... × E_g` given by polynomial relations in the
//! Weierstrass coordinates `(x_k, y_k) = (℘(z_k), ℘'(z_k))`, and the
//! membership oracle for their preimage `Z ⊂ C^g / Λ`.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{beta_map_with, FactorValue, ProductTorus, RationalTorusPoint};
use crate::ball::CBall;
use crate::error::{Error, Result};
use crate::quad::{parse_ratio, split_terms};
use crate::scalar::Real;
use crate::Rational;

/// Complex-rational coefficient.
pub type CRational = Complex<Rational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    In,
    Out,
    Uncertain,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::In => "IN",
            Verdict::Out => "OUT",
            Verdict::Uncertain => "UNCERTAIN",
        })
    }
}

/// How relations are evaluated when a factor sits at its identity `O`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdentityPolicy {
    /// Homogenize each relation per factor and evaluate at `O = [0:1:0]`:
    /// only monomials `y_k^{D_k}` (with `D_k` the relation's degree in the
    /// factor) survive.
    #[default]
    Projective,
    /// Affine relations only: relations involving an identity factor give
    /// `UNCERTAIN`; the others are evaluated normally.
    Affine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: CRational,
    /// Exponents of `x1, y1, x2, y2, ...`.
    pub exps: Vec<u32>,
}

/// A nonzero polynomial in the `2g` affine coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub monomials: Vec<Monomial>,
}

fn symbol_index(sym: &str, g: usize) -> Result<usize> {
    let (kind, idx) = sym.split_at(1);
    let k: usize = idx.parse().map_err(|_| Error::Parse(format!("unknown symbol '{sym}'")))?;
    if k == 0 || k > g {
        return Err(Error::Validation(format!("symbol '{sym}' outside the {g} factors")));
    }
    match kind {
        "x" => Ok(2 * (k - 1)),
        "y" => Ok(2 * (k - 1) + 1),
        _ => Err(Error::Parse(format!("unknown symbol '{sym}'"))),
    }
}

impl Relation {
    /// Parses sums of products like `y1*y2 - 7`, `x2 - x1`, `(1/2)i*x1^2`.
    pub fn parse(s: &str, g: usize) -> Result<Self> {
        let mut monos: Vec<Monomial> = Vec::new();
        let terms = split_terms(s);
        if terms.is_empty() {
            return Err(Error::Parse(format!("empty relation '{s}'")));
        }
        for (neg, t) in terms {
            let mut coeff = CRational::new(Rational::one(), Rational::zero());
            let mut exps = vec![0u32; 2 * g];
            for factor in t.split('*') {
                let f = factor.trim().trim_start_matches('(').trim_end_matches(')');
                if f.is_empty() {
                    return Err(Error::Parse(format!("empty factor in '{s}'")));
                }
                if f.starts_with('x') || f.starts_with('y') {
                    let (sym, e) = match f.split_once('^') {
                        Some((sym, e)) => (sym, e.parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent in '{f}'")))?),
                        None => (f, 1),
                    };
                    exps[symbol_index(sym, g)?] += e;
                } else if f == "i" {
                    coeff = coeff * CRational::new(Rational::zero(), Rational::one());
                } else if let Some(body) = f.strip_suffix('i') {
                    let body = body.trim_end_matches(')').trim_start_matches('(');
                    coeff = coeff * CRational::new(Rational::zero(), parse_ratio::<BigInt>(body)?);
                } else {
                    coeff = coeff * CRational::new(parse_ratio::<BigInt>(f)?, Rational::zero());
                }
            }
            if neg {
                coeff = -coeff;
            }
            match monos.iter_mut().find(|m| m.exps == exps) {
                Some(m) => m.coeff = m.coeff.clone() + coeff,
                None => monos.push(Monomial { coeff, exps }),
            }
        }
        monos.retain(|m| !m.coeff.is_zero());
        if monos.is_empty() {
            return Err(Error::Validation(format!("relation '{s}' is identically zero")));
        }
        Ok(Relation { monomials: monos })
    }

    pub fn num_vars(&self) -> usize {
        self.monomials.first().map_or(0, |m| m.exps.len())
    }

    pub fn total_degree(&self) -> u32 {
        self.monomials.iter().map(|m| m.exps.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// Degree in the coordinates `(x_k, y_k)` of factor `k`.
    pub fn factor_degree(&self, k: usize) -> u32 {
        self.monomials.iter().map(|m| m.exps[2 * k] + m.exps[2 * k + 1]).max().unwrap_or(0)
    }

    pub fn involves_factor(&self, k: usize) -> bool {
        self.factor_degree(k) > 0
    }

    /// Ball evaluation; `None` when the affine policy cannot evaluate.
    pub fn evaluate<F: Real>(&self, vals: &[FactorValue<F>], policy: IdentityPolicy) -> Option<CBall<F>> {
        let g = vals.len();
        for (k, v) in vals.iter().enumerate() {
            match v {
                FactorValue::NearPole if self.involves_factor(k) => return None,
                FactorValue::Identity if policy == IdentityPolicy::Affine && self.involves_factor(k) => return None,
                _ => {}
            }
        }
        let degrees: Vec<u32> = (0..g).map(|k| self.factor_degree(k)).collect();
        let mut acc = CBall::zero();
        'mono: for m in &self.monomials {
            let c = Complex::new(m.coeff.re.to_f64().unwrap_or(f64::NAN), m.coeff.im.to_f64().unwrap_or(f64::NAN));
            let mut term = CBall::<F>::from_c64(c);
            for (k, v) in vals.iter().enumerate() {
                let (ex, ey) = (m.exps[2 * k], m.exps[2 * k + 1]);
                match v {
                    FactorValue::Affine { x, y } => {
                        if ex > 0 {
                            term = term * x.powi(ex);
                        }
                        if ey > 0 {
                            term = term * y.powi(ey);
                        }
                    }
                    // [X:Y:Z] = [0:1:0]: the homogenized monomial
                    // X^ex Y^ey Z^(D-ex-ey) is 1 iff ex = 0 and ey = D.
                    FactorValue::Identity => {
                        if !(ex == 0 && ey == degrees[k]) {
                            continue 'mono;
                        }
                    }
                    FactorValue::NearPole => {}
                }
            }
            acc = acc + term;
        }
        Some(acc)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for m in &self.monomials {
            let mut vars = String::new();
            for (idx, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let sym = format!("{}{}", if idx % 2 == 0 { "x" } else { "y" }, idx / 2 + 1);
                vars.push('*');
                vars.push_str(&sym);
                if e > 1 {
                    vars.push_str(&format!("^{e}"));
                }
            }
            let parts = [(m.coeff.re.clone(), ""), (m.coeff.im.clone(), "*i")];
            for (c, unit) in parts {
                if c.is_zero() {
                    continue;
                }
                let neg = c < Rational::zero();
                let mag = if neg { -c } else { c };
                let sign = match (first, neg) {
                    (true, true) => "-",
                    (true, false) => "",
                    (false, true) => " - ",
                    (false, false) => " + ",
                };
                write!(f, "{sign}{mag}{unit}{vars}")?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Serialized descriptor: relation strings plus structural flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSpec {
    #[serde(default)]
    pub relations: Vec<String>,
    /// Factors (0-based) forced to sit at the identity element.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub at_identity: Vec<usize>,
    /// `X = A`: no constraints at all.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub whole: bool,
    #[serde(default)]
    pub identity_policy: IdentityPolicy,
}

/// `X ⊂ A` cut out by relations in the Weierstrass coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct VarietyDescriptor {
    pub g: usize,
    pub relations: Vec<Relation>,
    pub at_identity: Vec<usize>,
    pub whole: bool,
    pub policy: IdentityPolicy,
}

impl VarietyDescriptor {
    pub fn from_spec(spec: &DescriptorSpec, g: usize) -> Result<Self> {
        let relations = spec.relations.iter().map(|r| Relation::parse(r, g)).collect::<Result<Vec<_>>>()?;
        for &k in &spec.at_identity {
            if k >= g {
                return Err(Error::Validation(format!("identity factor index {k} outside the {g} factors")));
            }
        }
        if relations.is_empty() && spec.at_identity.is_empty() && !spec.whole {
            return Err(Error::Validation("variety needs relations, identity factors or the whole flag".into()));
        }
        Ok(VarietyDescriptor { g, relations, at_identity: spec.at_identity.clone(), whole: spec.whole, policy: spec.identity_policy })
    }

    pub fn parse(relations: &[&str], g: usize) -> Result<Self> {
        let spec = DescriptorSpec { relations: relations.iter().map(|s| s.to_string()).collect(), ..Default::default() };
        Self::from_spec(&spec, g)
    }

    pub fn whole(g: usize) -> Self {
        VarietyDescriptor { g, relations: Vec::new(), at_identity: Vec::new(), whole: true, policy: IdentityPolicy::Projective }
    }

    pub fn with_policy(mut self, policy: IdentityPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn to_spec(&self) -> DescriptorSpec {
        DescriptorSpec {
            relations: self.relations.iter().map(|r| r.to_string()).collect(),
            at_identity: self.at_identity.clone(),
            whole: self.whole,
            identity_policy: self.policy,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.relations.iter().map(|r| r.total_degree()).max().unwrap_or(0)
    }

    /// Verdict from precomputed factor values.
    pub fn classify<F: Real>(&self, vals: &[FactorValue<F>], tol: f64) -> (Verdict, f64) {
        if self.whole {
            return (Verdict::In, 0.0);
        }
        for &k in &self.at_identity {
            if !vals[k].is_identity() {
                return (Verdict::Out, f64::INFINITY);
            }
        }
        let tol_f = F::lit(tol);
        let mut verdict = Verdict::In;
        let mut residual = 0.0f64;
        for rel in &self.relations {
            let Some(v) = rel.evaluate(vals, self.policy) else {
                verdict = Verdict::Uncertain;
                residual = f64::INFINITY;
                continue;
            };
            residual = residual.max(v.abs_upper().to_f64().unwrap_or(f64::INFINITY));
            if !v.is_finite() {
                verdict = Verdict::Uncertain;
            } else if v.abs_lower() > tol_f {
                return (Verdict::Out, residual);
            } else if v.abs_upper() > tol_f {
                verdict = Verdict::Uncertain;
            }
        }
        (verdict, residual)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipResult {
    pub verdict: Verdict,
    /// Largest upper bound of `|relation|` in the deciding precision.
    pub residual: f64,
    /// Whether the single-precision pass was inconclusive.
    pub escalated: bool,
}

/// Decides with single-precision values first and escalates to double
/// precision once if the first pass is `UNCERTAIN`.
pub fn decide_with<A, B>(x: &VarietyDescriptor, tol: f64, low: A, high: B) -> Result<MembershipResult>
where
    A: FnOnce() -> Result<Vec<FactorValue<f32>>>,
    B: FnOnce() -> Result<Vec<FactorValue<f64>>>,
{
    if x.whole {
        return Ok(MembershipResult { verdict: Verdict::In, residual: 0.0, escalated: false });
    }
    let (v, r) = x.classify(&low()?, tol);
    if v != Verdict::Uncertain {
        return Ok(MembershipResult { verdict: v, residual: r, escalated: false });
    }
    let (v, r) = x.classify(&high()?, tol);
    Ok(MembershipResult { verdict: v, residual: r, escalated: true })
}

pub fn membership_detail(x: &VarietyDescriptor, r: &RationalTorusPoint, torus: &ProductTorus, tol: f64) -> Result<MembershipResult> {
    if tol <= 0.0 {
        return Err(Error::Validation("membership tolerance must be positive".into()));
    }
    if x.g != torus.genus() {
        return Err(Error::DimensionMismatch { expected: torus.genus(), found: x.g });
    }
    decide_with(x, tol, || beta_map_with::<f32>(r, torus), || beta_map_with::<f64>(r, torus))
}

/// `IN`, `OUT` or `UNCERTAIN` for `β(r) ∈ X`.
pub fn membership_test(x: &VarietyDescriptor, r: &RationalTorusPoint, torus: &ProductTorus, tol: f64) -> Result<Verdict> {
    membership_detail(x, r, torus, tol).map(|m| m.verdict)
}

#[cfg(test)]
mod tests {
    use super::super::tests::torus;
    use super::*;

    #[test]
    fn relation_parse_display_roundtrip() {
        for s in ["y1*y2 - 7", "x2 - x1", "1/2*i*x1^2 + 3*y2 - 2i", "-x1*x2^3"] {
            let r = Relation::parse(s, 2).unwrap();
            let again = Relation::parse(&r.to_string(), 2).unwrap();
            assert_eq!(r, again, "{s} -> {r}");
        }
        assert!(Relation::parse("x3 - 1", 2).is_err());
        assert!(Relation::parse("x1 - x1", 2).is_err());
        assert_eq!(Relation::parse("x1^2*y1 + y2", 2).unwrap().total_degree(), 3);
    }

    #[test]
    fn diagonal_membership() {
        let t = torus(&[("1", "i"), ("1", "i")]);
        let diag = VarietyDescriptor::parse(&["x2 - x1", "y2 - y1"], 2).unwrap();
        let on = RationalTorusPoint::from_grid(&[2, 3, 2, 3], 7);
        assert_eq!(membership_test(&diag, &on, &t, 1e-8).unwrap(), Verdict::In);
        let off = RationalTorusPoint::from_grid(&[2, 3, 5, 1], 7);
        assert_eq!(membership_test(&diag, &off, &t, 1e-8).unwrap(), Verdict::Out);
        // x alone also holds on the antidiagonal.
        let xonly = VarietyDescriptor::parse(&["x2 - x1"], 2).unwrap();
        let anti = RationalTorusPoint::from_grid(&[2, 3, 5, 4], 7);
        assert_eq!(membership_test(&xonly, &anti, &t, 1e-8).unwrap(), Verdict::In);
        assert_eq!(membership_test(&diag, &anti, &t, 1e-8).unwrap(), Verdict::Out);
    }

    #[test]
    fn identity_policies() {
        let t = torus(&[("1", "i"), ("1", "i")]);
        let diag = VarietyDescriptor::parse(&["x2 - x1", "y2 - y1"], 2).unwrap();
        let origin = RationalTorusPoint::zero(4);
        assert_eq!(membership_test(&diag, &origin, &t, 1e-8).unwrap(), Verdict::In);
        let half = RationalTorusPoint::from_grid(&[0, 0, 1, 0], 2);
        assert_eq!(membership_test(&diag, &half, &t, 1e-8).unwrap(), Verdict::Out);
        let affine = diag.clone().with_policy(IdentityPolicy::Affine);
        assert_eq!(membership_test(&affine, &origin, &t, 1e-8).unwrap(), Verdict::Uncertain);
        let other = VarietyDescriptor::parse(&["x2 - x2 + y2"], 2).unwrap().with_policy(IdentityPolicy::Affine);
        assert_eq!(membership_test(&other, &half, &t, 1e-8).unwrap(), Verdict::In);
    }

    #[test]
    fn periodicity_of_membership() {
        let t = torus(&[("1", "i"), ("1", "2i")]);
        let x = VarietyDescriptor::parse(&["y1*y2 - 7"], 2).unwrap();
        let r = RationalTorusPoint::from_grid(&[1, 2, 3, 4], 5);
        let base = membership_test(&x, &r, &t, 1e-8).unwrap();
        for k in 0..4 {
            let mut shift = vec![Rational::zero(); 4];
            shift[k] = Rational::one();
            let moved = RationalTorusPoint::new(r.coords().iter().zip(&shift).map(|(a, b)| a + b).collect());
            assert_eq!(membership_test(&x, &moved, &t, 1e-8).unwrap(), base);
        }
    }

    #[test]
    fn identity_factor_descriptor() {
        let t = torus(&[("1", "i"), ("1", "2i")]);
        let spec = DescriptorSpec { at_identity: vec![0], ..Default::default() };
        let x = VarietyDescriptor::from_spec(&spec, 2).unwrap();
        assert_eq!(membership_test(&x, &RationalTorusPoint::from_grid(&[0, 0, 1, 2], 3), &t, 1e-8).unwrap(), Verdict::In);
        assert_eq!(membership_test(&x, &RationalTorusPoint::from_grid(&[1, 0, 1, 2], 3), &t, 1e-8).unwrap(), Verdict::Out);
    }
}
