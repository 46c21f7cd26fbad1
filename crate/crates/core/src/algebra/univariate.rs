//! Dense univariate polynomials over `F_p` with factorization
//! (square-free decomposition, distinct-degree and equal-degree splitting).
//!
//! Only used to split univariate eliminants into irreducible pieces and to
//! pick irreducible moduli for extension fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{Field, PrimeField, Ring};
use super::monomial::Monomial;
use super::poly::MultiPoly;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniPoly {
    field: PrimeField,
    /// Low-to-high; no trailing zeros.
    coeffs: Vec<u64>,
}

impl UniPoly {
    pub fn new(field: PrimeField, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= field.p();
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        UniPoly { field, coeffs }
    }

    pub fn zero(field: PrimeField) -> Self {
        UniPoly { field, coeffs: vec![] }
    }

    pub fn one(field: PrimeField) -> Self {
        Self::new(field, vec![1])
    }

    pub fn x(field: PrimeField) -> Self {
        Self::new(field, vec![0, 1])
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has no degree.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> u64 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.field.inv(&self.lead()).unwrap();
        Self::new(self.field, self.coeffs.iter().map(|c| self.field.mul(c, &inv)).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let f = &self.field;
        Self::new(
            self.field,
            (0..n)
                .map(|i| f.add(self.coeffs.get(i).unwrap_or(&0), o.coeffs.get(i).unwrap_or(&0)))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let f = &self.field;
        Self::new(
            self.field,
            (0..n)
                .map(|i| f.sub(self.coeffs.get(i).unwrap_or(&0), o.coeffs.get(i).unwrap_or(&0)))
                .collect(),
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.field);
        }
        let f = &self.field;
        let mut out = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = f.add(&out[i + j], &f.mul(a, b));
            }
        }
        Self::new(self.field, out)
    }

    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let f = &self.field;
        let dd = d.degree().unwrap();
        let inv = f.inv(&d.lead()).unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(self.field), self.clone());
        }
        let mut q = vec![0u64; rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            let c = f.mul(&rem[top], &inv);
            if c == 0 {
                continue;
            }
            q[top - dd] = c;
            for (j, dc) in d.coeffs.iter().enumerate() {
                let idx = top - dd + j;
                rem[idx] = f.sub(&rem[idx], &f.mul(&c, dc));
            }
        }
        (Self::new(self.field, q), Self::new(self.field, rem))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    /// Monic gcd.
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
        let f = &self.field;
        Self::new(
            self.field,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| f.mul(c, &f.from_u64(i as u64)))
                .collect(),
        )
    }

    pub fn powmod(&self, mut e: u64, m: &Self) -> Self {
        let mut base = self.rem(m);
        let mut acc = Self::one(self.field).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).rem(m);
            }
        }
        acc
    }

    pub fn eval(&self, x: u64) -> u64 {
        let f = &self.field;
        self.coeffs.iter().rev().fold(0, |acc, c| f.add(&f.mul(&acc, &x), c))
    }

    /// `g` with `g^p = self`, assuming only exponents divisible by `p` occur.
    fn pth_root(&self) -> Self {
        let p = self.field.p() as usize;
        Self::new(self.field, self.coeffs.iter().step_by(p).cloned().collect())
    }

    /// Square-free decomposition of a monic polynomial: pairs
    /// `(square-free factor, multiplicity)`.
    pub fn squarefree_decomposition(&self) -> Vec<(UniPoly, u32)> {
        let f = self.monic();
        if f.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let p = self.field.p() as u32;
        let df = f.derivative();
        if df.is_zero() {
            return f
                .pth_root()
                .squarefree_decomposition()
                .into_iter()
                .map(|(g, m)| (g, m * p))
                .collect();
        }
        let mut out = Vec::new();
        let mut c = f.gcd(&df);
        let mut w = f.divrem(&c).0;
        let mut i = 1;
        while w.degree().unwrap_or(0) > 0 {
            let y = w.gcd(&c);
            let fac = w.divrem(&y).0;
            if fac.degree().unwrap_or(0) > 0 {
                out.push((fac.monic(), i));
            }
            w = y.clone();
            c = c.divrem(&y).0;
            i += 1;
        }
        if c.degree().unwrap_or(0) > 0 {
            for (g, m) in c.monic().pth_root().squarefree_decomposition() {
                out.push((g, m * p));
            }
        }
        out
    }

    /// Distinct-degree factorization of a square-free monic polynomial.
    fn distinct_degree(&self) -> Vec<(UniPoly, usize)> {
        let p = self.field.p();
        let x = Self::x(self.field);
        let mut g = self.clone();
        let mut h = x.clone();
        let mut out = Vec::new();
        let mut i = 1;
        while g.degree().unwrap_or(0) >= 2 * i {
            h = h.powmod(p, &g);
            let d = g.gcd(&h.sub(&x));
            if d.degree().unwrap_or(0) > 0 {
                g = g.divrem(&d).0;
                h = h.rem(&g);
                out.push((d, i));
            }
            i += 1;
        }
        if g.degree().unwrap_or(0) > 0 {
            let d = g.degree().unwrap();
            out.push((g.monic(), d));
        }
        out
    }

    /// Splits a product of distinct irreducibles of common degree `d`.
    fn equal_degree(&self, d: usize, rng: &mut ChaCha8Rng) -> Vec<UniPoly> {
        let n = self.degree().unwrap();
        if n == d {
            return vec![self.monic()];
        }
        let p = self.field.p();
        loop {
            let a = Self::new(self.field, (0..n).map(|_| rng.gen_range(0..p)).collect());
            if a.degree().unwrap_or(0) == 0 {
                continue;
            }
            let candidate = if p == 2 {
                // absolute trace a + a^2 + ... + a^(2^(d-1))
                let mut t = a.clone();
                let mut acc = a.clone();
                for _ in 1..d {
                    t = t.mul(&t).rem(self);
                    acc = acc.add(&t);
                }
                acc
            } else {
                // a^((p^d - 1)/2) = (a^(1 + p + ... + p^(d-1)))^((p-1)/2)
                let mut t = a.rem(self);
                let mut norm = Self::one(self.field);
                for _ in 0..d {
                    norm = norm.mul(&t).rem(self);
                    t = t.powmod(p, self);
                }
                norm.powmod((p - 1) / 2, self).sub(&Self::one(self.field))
            };
            let g = self.gcd(&candidate);
            let dg = g.degree().unwrap_or(0);
            if dg > 0 && dg < n {
                let mut left = g.equal_degree(d, rng);
                left.extend(self.divrem(&g).0.monic().equal_degree(d, rng));
                return left;
            }
        }
    }

    /// Complete factorization into monic irreducibles with multiplicities,
    /// sorted by (degree, coefficients).
    pub fn factor(&self) -> Vec<(UniPoly, u32)> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut out = Vec::new();
        for (sf, m) in self.squarefree_decomposition() {
            for (block, d) in sf.distinct_degree() {
                for irr in block.equal_degree(d, &mut rng) {
                    out.push((irr, m));
                }
            }
        }
        out.sort_by(|a, b| {
            a.0.coeffs
                .len()
                .cmp(&b.0.coeffs.len())
                .then_with(|| a.0.coeffs.iter().rev().cmp(b.0.coeffs.iter().rev()))
        });
        out
    }

    pub fn is_irreducible(&self) -> bool {
        let n = match self.degree() {
            Some(n) if n >= 1 => n,
            _ => return false,
        };
        let f = self.factor();
        f.len() == 1 && f[0].1 == 1 && f[0].0.degree() == Some(n)
    }

    /// Product of the distinct irreducible factors.
    pub fn squarefree_part(&self) -> UniPoly {
        self.factor()
            .into_iter()
            .fold(Self::one(self.field), |acc, (g, _)| acc.mul(&g))
    }

    /// The polynomial as an element of `F_p[v_0..v_{n-1}]` in variable `var`.
    pub fn to_multi(&self, nvars: usize, var: usize) -> MultiPoly<PrimeField> {
        MultiPoly::from_terms(
            self.field,
            nvars,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (Monomial::var(nvars, var, i as u16), *c)),
        )
    }

    /// Reads a polynomial that only involves variable `var`.
    pub fn from_multi(p: &MultiPoly<PrimeField>, var: usize) -> Option<UniPoly> {
        let mut coeffs = Vec::new();
        for (m, c) in p.terms() {
            if m.exps().iter().enumerate().any(|(i, &e)| i != var && e != 0) {
                return None;
            }
            let e = m.exps()[var] as usize;
            if coeffs.len() <= e {
                coeffs.resize(e + 1, 0);
            }
            coeffs[e] = *c;
        }
        Some(UniPoly::new(*p.ring(), coeffs))
    }
}
