//! Polynomial arithmetic over `F_p` and distinct-degree factorization.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::divpoly::UnivariateIntPoly;

/// Dense polynomial over `F_p`, ascending degree; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    pub p: u64,
    pub c: Vec<u64>,
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn inv(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

impl FpPoly {
    pub fn new(p: u64, mut c: Vec<u64>) -> Self {
        for x in c.iter_mut() {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, c }
    }

    pub fn reduce(f: &UnivariateIntPoly, p: u64) -> Self {
        let pb = BigInt::from(p);
        let c = f.coeffs.iter().map(|x| (((x % &pb) + &pb) % &pb).to_u64().expect("residue fits")).collect();
        FpPoly::new(p, c)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    fn x(p: u64) -> Self {
        FpPoly::new(p, vec![0, 1])
    }

    pub fn monic(&self) -> Self {
        match self.c.last() {
            None => self.clone(),
            Some(&l) => {
                let li = inv(l, self.p);
                FpPoly::new(self.p, self.c.iter().map(|&x| mulmod(x, li, self.p)).collect())
            }
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let p = self.p;
        FpPoly::new(p, (0..n).map(|i| (self.c.get(i).unwrap_or(&0) + p - o.c.get(i).unwrap_or(&0)) % p).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return FpPoly::new(self.p, vec![]);
        }
        let p = self.p;
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = (out[i + j] + mulmod(a, b, p)) % p;
            }
        }
        FpPoly::new(p, out)
    }

    /// `(q, r)` with `self = q d + r`; `d` must be nonzero.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let p = self.p;
        let dd = d.degree();
        let li = inv(*d.c.last().expect("nonzero divisor"), p);
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (FpPoly::new(p, vec![]), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = mulmod(r[i + dd], li, p);
            if c != 0 {
                for (j, &dj) in d.c.iter().enumerate() {
                    r[i + j] = (r[i + j] + p - mulmod(c, dj, p)) % p;
                }
            }
            q[i] = c;
        }
        (FpPoly::new(p, q), FpPoly::new(p, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        let p = self.p;
        FpPoly::new(p, self.c.iter().enumerate().skip(1).map(|(i, &x)| mulmod(x, i as u64 % p, p)).collect())
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, mut e: u64, m: &Self) -> Self {
        let mut base = self.rem(m);
        let mut r = FpPoly::new(self.p, vec![1]).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        r
    }

    pub fn is_squarefree(&self) -> bool {
        let d = self.derivative();
        !d.is_zero() && self.gcd(&d).degree() == 0
    }
}

/// Degrees of the irreducible factors of a squarefree polynomial of
/// positive degree, with multiplicity, in increasing order.
pub fn distinct_degree_pattern(f: &FpPoly) -> Vec<usize> {
    let p = f.p;
    let mut rest = f.monic();
    let mut pattern = Vec::new();
    let mut h = FpPoly::x(p);
    let mut i = 1usize;
    while rest.degree() >= 2 * i {
        h = h.pow_mod(p, &rest);
        let g = rest.gcd(&h.sub(&FpPoly::x(p)));
        if g.degree() > 0 {
            pattern.extend(std::iter::repeat(i).take(g.degree() / i));
            rest = rest.div_rem(&g).0;
            h = h.rem(&rest);
        }
        i += 1;
    }
    if rest.degree() > 0 {
        pattern.push(rest.degree());
    }
    pattern.sort_unstable();
    pattern
}

/// Subset sums `1..=n` reachable from the factor degrees; index `d` is set
/// when some subset sums to `d`.
pub fn subset_sums(pattern: &[usize]) -> Vec<bool> {
    let n: usize = pattern.iter().sum();
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for &d in pattern {
        for s in (d..=n).rev() {
            if reach[s - d] {
                reach[s] = true;
            }
        }
    }
    reach
}
