//! The n-th Weyl algebra in normal-ordered form.
//!
//! An element is stored as a commutative polynomial in `2n` variables
//! `x1..xn, d1..dn`, where the monomial `x^a d^b` stands for the
//! normal-ordered word `x^a ∂^b`. Products are normal-ordered eagerly.

use std::fmt;

use num_rational::BigRational;

use crate::algebra::parse::{fold_constant_division, parse_expr, ExprAlgebra};
use crate::algebra::{Field, Monomial, MultiPoly, PrimeField};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct WeylElement<F: Field> {
    n: usize,
    poly: MultiPoly<F>,
}

pub fn weyl_names(n: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("d{i}")))
        .collect()
}

impl<F: Field> WeylElement<F> {
    /// Wraps a polynomial in `x1..xn, d1..dn` read as normal-ordered words.
    pub fn from_normal(n: usize, poly: MultiPoly<F>) -> Self {
        assert_eq!(poly.nvars(), 2 * n);
        WeylElement { n, poly }
    }

    pub fn zero(ring: F, n: usize) -> Self {
        Self::from_normal(n, MultiPoly::zero(ring, 2 * n))
    }

    pub fn one(ring: F, n: usize) -> Self {
        Self::from_normal(n, MultiPoly::one(ring, 2 * n))
    }

    pub fn constant(ring: F, n: usize, c: F::Elem) -> Self {
        Self::from_normal(n, MultiPoly::constant(ring, 2 * n, c))
    }

    pub fn x(ring: F, n: usize, i: usize) -> Self {
        Self::from_normal(n, MultiPoly::var(ring, 2 * n, i))
    }

    pub fn d(ring: F, n: usize, i: usize) -> Self {
        Self::from_normal(n, MultiPoly::var(ring, 2 * n, n + i))
    }

    /// Multiplication operator by a function of `x1..xn`.
    pub fn function(f: &MultiPoly<F>) -> Self {
        let n = f.nvars();
        Self::from_normal(n, f.extend_vars(2 * n))
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn ring(&self) -> &F {
        self.poly.ring()
    }

    /// The underlying normal-ordered symbol.
    pub fn as_poly(&self) -> &MultiPoly<F> {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.n != o.n || self.ring() != o.ring() {
            return Err(Error::DomainMismatch("Weyl algebras differ".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self::from_normal(self.n, self.poly.try_add(&o.poly)?))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self::from_normal(self.n, self.poly.try_sub(&o.poly)?))
    }

    pub fn neg(&self) -> Self {
        Self::from_normal(self.n, -&self.poly)
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        Self::from_normal(self.n, self.poly.scale(c))
    }

    /// Normal-ordered product, using
    /// `∂^b x^c = sum_k C(b,k) c(c-1)..(c-k+1) x^(c-k) ∂^(b-k)`
    /// in each variable separately.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let ring = self.ring().clone();
        let n = self.n;
        let char = ring.characteristic();
        let mut out = MultiPoly::zero(ring.clone(), 2 * n);
        let mut inv_fact = vec![ring.one()];
        for (ma, ca) in self.poly.terms() {
            for (mb, cb) in o.poly.terms() {
                let ea = ma.exps();
                let eb = mb.exps();
                // per variable: list of (k, coefficient)
                let mut per_var: Vec<Vec<(u16, F::Elem)>> = Vec::with_capacity(n);
                for i in 0..n {
                    let b = ea[n + i];
                    let c = eb[i];
                    let mut kmax = b.min(c) as u64;
                    if char > 0 {
                        kmax = kmax.min(char - 1);
                    }
                    while inv_fact.len() <= kmax as usize {
                        let k = inv_fact.len() as u64;
                        let prev: F::Elem = inv_fact[inv_fact.len() - 1].clone();
                        let inv_k = ring.inv(&ring.from_u64(k)).expect("k below characteristic");
                        inv_fact.push(ring.mul(&prev, &inv_k));
                    }
                    let mut list = Vec::with_capacity(kmax as usize + 1);
                    let mut falling = ring.one();
                    for k in 0..=kmax {
                        if k > 0 {
                            let t = ring.mul(
                                &ring.from_u64(b as u64 - (k - 1)),
                                &ring.from_u64(c as u64 - (k - 1)),
                            );
                            falling = ring.mul(&falling, &t);
                        }
                        let coef = ring.mul(&falling, &inv_fact[k as usize]);
                        if !ring.is_zero(&coef) {
                            list.push((k as u16, coef));
                        }
                    }
                    per_var.push(list);
                }
                let base = ring.mul(ca, cb);
                let mut idx = vec![0usize; n];
                'combos: loop {
                    let mut coef = base.clone();
                    let mut exps = vec![0u16; 2 * n];
                    for i in 0..n {
                        let (k, c) = &per_var[i][idx[i]];
                        coef = ring.mul(&coef, c);
                        exps[i] = ea[i]
                            .checked_add(eb[i] - k)
                            .ok_or(Error::ExponentOverflow)?;
                        exps[n + i] = (ea[n + i] - k)
                            .checked_add(eb[n + i])
                            .ok_or(Error::ExponentOverflow)?;
                    }
                    out.add_term(Monomial::from_exps(&exps), coef);
                    let mut j = 0;
                    loop {
                        if j == n {
                            break 'combos;
                        }
                        idx[j] += 1;
                        if idx[j] < per_var[j].len() {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                }
            }
        }
        Ok(Self::from_normal(n, out))
    }

    /// Square-and-multiply power.
    pub fn pow(&self, mut e: u64) -> Result<Self> {
        let mut acc = Self::one(self.ring().clone(), self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn commutator(&self, o: &Self) -> Result<Self> {
        self.mul(o)?.sub(&o.mul(self)?)
    }

    /// True iff the element commutes with every `x_i` and `∂_i`.
    ///
    /// On normal-ordered symbols `[∂_i, a]` is the `x_i`-derivative and
    /// `[a, x_i]` the `∂_i`-derivative, so centrality is the vanishing of
    /// all formal partials.
    pub fn is_central(&self) -> bool {
        (0..2 * self.n).all(|i| self.poly.diff(i).map(|d| d.is_zero()).unwrap_or(false))
    }

    /// Action on functions: each `x^a ∂^b` differentiates then multiplies.
    pub fn apply(&self, f: &MultiPoly<F>) -> Result<MultiPoly<F>> {
        if f.nvars() != self.n || f.ring() != self.ring() {
            return Err(Error::DomainMismatch("function ambient".into()));
        }
        let mut out = MultiPoly::zero(self.ring().clone(), self.n);
        for (m, c) in self.poly.terms() {
            let e = m.exps();
            let mut g = f.clone();
            for i in 0..self.n {
                for _ in 0..e[self.n + i] {
                    g = g.diff(i)?;
                    if g.is_zero() {
                        break;
                    }
                }
            }
            if g.is_zero() {
                continue;
            }
            let xm = Monomial::from_exps(&e[..self.n]);
            out = out.try_add(&g.mul_term(&xm, c)?)?;
        }
        Ok(out)
    }

    /// Algebra homomorphism sending `x_i` to `images_x[i]` and `∂_i` to
    /// `images_d[i]`. The images must satisfy the Weyl relations for the
    /// result to be meaningful; this is not checked here.
    pub fn substitute(&self, images_x: &[Self], images_d: &[Self]) -> Result<Self> {
        assert_eq!(images_x.len(), self.n);
        assert_eq!(images_d.len(), self.n);
        let target = images_x
            .first()
            .map(|e| e.n)
            .ok_or_else(|| Error::Invalid("substitution in zero variables".into()))?;
        let ring = self.ring().clone();
        let mut cache: Vec<Vec<Self>> = images_x
            .iter()
            .chain(images_d)
            .map(|im| vec![Self::one(ring.clone(), target), im.clone()])
            .collect();
        let mut out = Self::zero(ring.clone(), target);
        for (m, c) in self.poly.terms() {
            let mut t = Self::constant(ring.clone(), target, c.clone());
            for (slot, &e) in m.exps().iter().enumerate() {
                let e = e as usize;
                while cache[slot].len() <= e {
                    let next = cache[slot].last().unwrap().mul(&cache[slot][1])?;
                    cache[slot].push(next);
                }
                if e > 0 {
                    t = t.mul(&cache[slot][e])?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Fourier transform on the first Weyl algebra: `x ↦ ∂`, `∂ ↦ -x`.
    pub fn fourier(&self) -> Result<Self> {
        if self.n != 1 {
            return Err(Error::Invalid("Fourier transform is defined for n = 1".into()));
        }
        let r = self.ring().clone();
        self.substitute(&[Self::d(r.clone(), 1, 0)], &[Self::x(r, 1, 0).neg()])
    }

    /// Inverse Fourier transform: `x ↦ -∂`, `∂ ↦ x`.
    pub fn fourier_inverse(&self) -> Result<Self> {
        if self.n != 1 {
            return Err(Error::Invalid("Fourier transform is defined for n = 1".into()));
        }
        let r = self.ring().clone();
        self.substitute(&[Self::d(r.clone(), 1, 0).neg()], &[Self::x(r, 1, 0)])
    }

    /// For `n = 1`: coefficients `c_k(x)` with `self = sum_k c_k(x) ∂^k`.
    pub fn d_coefficients(&self) -> Vec<MultiPoly<F>> {
        assert_eq!(self.n, 1);
        let ring = self.ring().clone();
        let ord = self.poly.degree_in(1).unwrap_or(0) as usize;
        let mut out = vec![MultiPoly::zero(ring.clone(), 1); ord + 1];
        for (m, c) in self.poly.terms() {
            let e = m.exps();
            out[e[1] as usize].add_term(Monomial::from_exps(&[e[0]]), c.clone());
        }
        out
    }

    /// Order in `∂` (all variables together); `None` for zero.
    pub fn d_order(&self) -> Option<u32> {
        self.poly
            .terms()
            .map(|(m, _)| m.exps()[self.n..].iter().map(|&e| e as u32).sum())
            .max()
    }

    pub fn to_string_named(&self) -> String {
        self.poly.to_string_with(&weyl_names(self.n))
    }
}

impl WeylElement<PrimeField> {
    /// Coordinates of a central element on `X_i = x_i^p`, `s_i = ∂_i^p`.
    pub fn center_coordinates(&self) -> Result<MultiPoly<PrimeField>> {
        let p = self.ring().p();
        let mut out = MultiPoly::zero(*self.ring(), 2 * self.n);
        for (m, c) in self.poly.terms() {
            let mut e = Vec::with_capacity(2 * self.n);
            for &k in m.exps() {
                if k as u64 % p != 0 {
                    return Err(Error::NotCentral(format!(
                        "term {} has an exponent not divisible by {p}",
                        MultiPoly::term(*self.ring(), m.clone(), *c).to_string_with(&weyl_names(self.n))
                    )));
                }
                e.push((k as u64 / p) as u16);
            }
            out.add_term(Monomial::from_exps(&e), *c);
        }
        Ok(out)
    }

    /// Embedding of the center: `X_i ↦ x_i^p`, `s_i ↦ ∂_i^p`.
    pub fn from_center(n: usize, c: &MultiPoly<PrimeField>) -> Result<Self> {
        let p = c.ring().p();
        let mut out = MultiPoly::zero(*c.ring(), 2 * n);
        for (m, v) in c.terms() {
            let mut e = Vec::with_capacity(2 * n);
            for &k in m.exps() {
                let v = k as u64 * p;
                if v > u16::MAX as u64 {
                    return Err(Error::ExponentOverflow);
                }
                e.push(v as u16);
            }
            out.add_term(Monomial::from_exps(&e), *v);
        }
        Ok(Self::from_normal(n, out))
    }
}

impl<F: Field> fmt::Display for WeylElement<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_named())
    }
}

struct WeylAlgebra<'a, F: Field> {
    ring: F,
    n: usize,
    coeff: &'a dyn Fn(&BigRational) -> Result<F::Elem>,
}

impl<F: Field> ExprAlgebra for WeylAlgebra<'_, F> {
    type Value = WeylElement<F>;

    fn num(&self, q: &BigRational) -> Result<Self::Value> {
        Ok(WeylElement::constant(self.ring.clone(), self.n, (self.coeff)(q)?))
    }
    fn var(&self, name: &str) -> Result<Self::Value> {
        match weyl_names(self.n).iter().position(|v| v == name) {
            Some(i) => Ok(WeylElement::from_normal(self.n, MultiPoly::var(self.ring.clone(), 2 * self.n, i))),
            None => Err(Error::Parse {
                column: 0,
                message: format!("unknown Weyl generator '{name}'"),
            }),
        }
    }
    fn add(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value> {
        a.add(&b)
    }
    fn sub(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value> {
        a.sub(&b)
    }
    fn mul(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value> {
        a.mul(&b)
    }
    fn neg(&self, a: Self::Value) -> Result<Self::Value> {
        Ok(a.neg())
    }
    fn div(&self, _a: Self::Value, _b: Self::Value) -> Result<Self::Value> {
        unreachable!("division is folded before evaluation")
    }
    fn pow(&self, a: Self::Value, e: u32) -> Result<Self::Value> {
        a.pow(e as u64)
    }
}

/// Parses a Weyl algebra expression; `d_i` denotes `∂_i` and products are
/// taken in the written (noncommutative) order.
pub fn parse_weyl<F: Field>(
    text: &str,
    ring: F,
    n: usize,
    coeff: &dyn Fn(&BigRational) -> Result<F::Elem>,
) -> Result<WeylElement<F>> {
    let e = fold_constant_division(&parse_expr(text)?)?;
    e.eval(&WeylAlgebra { ring, n, coeff })
}

pub fn parse_weyl_mod_p(text: &str, field: PrimeField, n: usize) -> Result<WeylElement<PrimeField>> {
    parse_weyl(text, field, n, &|q| field.from_rational(q))
}
