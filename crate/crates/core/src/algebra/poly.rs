//! Sparse multivariate polynomials over a runtime coefficient ring.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;

use super::field::{Field, PrimeField, Rationals, Ring};
use super::monomial::{Monomial, MonomialOrder};
use crate::error::{Error, Result};

/// A polynomial in `nvars` variables. Zero coefficients are never stored,
/// so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly<R: Ring> {
    ring: R,
    nvars: usize,
    terms: BTreeMap<Monomial, R::Elem>,
}

impl<R: Ring> Hash for MultiPoly<R> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.nvars.hash(state);
        for (m, c) in &self.terms {
            m.hash(state);
            c.hash(state);
        }
    }
}

impl<R: Ring> MultiPoly<R> {
    pub fn zero(ring: R, nvars: usize) -> Self {
        MultiPoly {
            ring,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: R, nvars: usize, c: R::Elem) -> Self {
        let mut p = Self::zero(ring, nvars);
        if !p.ring.is_zero(&c) {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(ring: R, nvars: usize) -> Self {
        let c = ring.one();
        Self::constant(ring, nvars, c)
    }

    pub fn from_int(ring: R, nvars: usize, v: i64) -> Self {
        let c = ring.from_i64(v);
        Self::constant(ring, nvars, c)
    }

    pub fn var(ring: R, nvars: usize, i: usize) -> Self {
        let c = ring.one();
        Self::term(ring, Monomial::var(nvars, i, 1), c)
    }

    pub fn term(ring: R, mono: Monomial, c: R::Elem) -> Self {
        let mut p = Self::zero(ring, mono.nvars());
        if !p.ring.is_zero(&c) {
            p.terms.insert(mono, c);
        }
        p
    }

    pub fn from_terms(ring: R, nvars: usize, terms: impl IntoIterator<Item = (Monomial, R::Elem)>) -> Self {
        let mut p = Self::zero(ring, nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "exponent vector length");
            p.add_term(m, c);
        }
        p
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &R::Elem)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn coeff(&self, m: &Monomial) -> R::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn constant_term(&self) -> R::Elem {
        self.coeff(&Monomial::one(self.nvars))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn degree_in(&self, i: usize) -> Option<u16> {
        self.terms.keys().map(|m| m.exps()[i]).max()
    }

    /// True if no term involves variable `i`.
    pub fn free_of(&self, i: usize) -> bool {
        self.terms.keys().all(|m| m.exps()[i] == 0)
    }

    pub fn add_term(&mut self, m: Monomial, c: R::Elem) {
        if self.ring.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let s = self.ring.add(old, &c);
                if self.ring.is_zero(&s) {
                    self.terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars || self.ring != other.ring {
            return Err(Error::DomainMismatch(format!(
                "{} vs {} variables over {:?} / {:?}",
                self.nvars, other.nvars, self.ring, other.ring
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), self.ring.neg(c));
        }
        Ok(out)
    }

    /// Exact product; fails on ring/arity mismatch or exponent overflow.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut acc: BTreeMap<Monomial, R::Elem> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb)?;
                let c = self.ring.mul(ca, cb);
                match acc.get_mut(&m) {
                    Some(old) => *old = self.ring.add(old, &c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        acc.retain(|_, c| !self.ring.is_zero(c));
        Ok(MultiPoly {
            ring: self.ring.clone(),
            nvars: self.nvars,
            terms: acc,
        })
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let mut out = Self::zero(self.ring.clone(), self.nvars);
        if self.ring.is_zero(c) {
            return out;
        }
        for (m, a) in &self.terms {
            let v = self.ring.mul(a, c);
            if !self.ring.is_zero(&v) {
                out.terms.insert(m.clone(), v);
            }
        }
        out
    }

    pub fn mul_term(&self, mono: &Monomial, c: &R::Elem) -> Result<Self> {
        let mut out = Self::zero(self.ring.clone(), self.nvars);
        for (m, a) in &self.terms {
            let v = self.ring.mul(a, c);
            if !self.ring.is_zero(&v) {
                out.terms.insert(m.mul(mono)?, v);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, mut e: u32) -> Result<Self> {
        let mut base = self.clone();
        let mut acc = Self::one(self.ring.clone(), self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.try_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to variable `i`.
    pub fn diff(&self, i: usize) -> Result<Self> {
        if i >= self.nvars {
            return Err(Error::IndexOutOfRange {
                index: i,
                nvars: self.nvars,
            });
        }
        let mut out = Self::zero(self.ring.clone(), self.nvars);
        for (m, c) in &self.terms {
            let e = m.exps()[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.set(i, e - 1);
            out.add_term(dm, self.ring.mul(c, &self.ring.from_u64(e as u64)));
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[R::Elem]) -> R::Elem {
        assert_eq!(point.len(), self.nvars);
        let mut acc = self.ring.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exps()) {
                if e > 0 {
                    t = self.ring.mul(&t, &self.ring.pow(x, e as u64));
                }
            }
            acc = self.ring.add(&acc, &t);
        }
        acc
    }

    /// Substitutes `images[i]` for variable `i`; all images share one
    /// ambient ring, which becomes the ambient of the result.
    pub fn substitute(&self, images: &[MultiPoly<R>]) -> Result<MultiPoly<R>> {
        assert_eq!(images.len(), self.nvars);
        let target_n = images
            .first()
            .map(|p| p.nvars)
            .ok_or_else(|| Error::Invalid("substitution into a polynomial in zero variables".into()))?;
        let mut powers: Vec<Vec<MultiPoly<R>>> = images
            .iter()
            .map(|p| vec![MultiPoly::one(self.ring.clone(), target_n), p.clone()])
            .collect();
        let mut out = MultiPoly::zero(self.ring.clone(), target_n);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(self.ring.clone(), target_n, c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                let e = e as usize;
                while powers[i].len() <= e {
                    let next = powers[i].last().unwrap().try_mul(&images[i])?;
                    powers[i].push(next);
                }
                if e > 0 {
                    t = t.try_mul(&powers[i][e])?;
                }
            }
            out = out.try_add(&t)?;
        }
        Ok(out)
    }

    /// Re-embeds into `new_nvars` variables with variable `i` sent to
    /// `positions[i]`.
    pub fn remap_vars(&self, new_nvars: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.nvars);
        let mut out = Self::zero(self.ring.clone(), new_nvars);
        for (m, c) in &self.terms {
            let mut nm = Monomial::one(new_nvars);
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    nm.set(positions[i], nm.exps()[positions[i]] + e);
                }
            }
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Embedding into more variables, appended after the existing ones.
    pub fn extend_vars(&self, new_nvars: usize) -> Self {
        let pos: Vec<usize> = (0..self.nvars).collect();
        self.remap_vars(new_nvars, &pos)
    }

    pub fn map_coeffs<S: Ring>(&self, ring: S, f: impl Fn(&R::Elem) -> S::Elem) -> MultiPoly<S> {
        let mut out = MultiPoly::zero(ring, self.nvars);
        for (m, c) in &self.terms {
            let v = f(c);
            out.add_term(m.clone(), v);
        }
        out
    }

    pub fn try_map_coeffs<S: Ring>(
        &self,
        ring: S,
        f: impl Fn(&R::Elem) -> Result<S::Elem>,
    ) -> Result<MultiPoly<S>> {
        let mut out = MultiPoly::zero(ring, self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Leading term with respect to `order`.
    pub fn leading_term(&self, order: MonomialOrder) -> Option<(&Monomial, &R::Elem)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    /// Terms sorted in decreasing order.
    pub fn sorted_terms(&self, order: MonomialOrder) -> Vec<(Monomial, R::Elem)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        v.sort_by(|a, b| order.cmp(&b.0, &a.0));
        v
    }

    /// Polynomial with the given exponent divided out from every term;
    /// `None` if some term is not divisible.
    pub fn div_monomial(&self, mono: &Monomial) -> Option<Self> {
        let mut out = Self::zero(self.ring.clone(), self.nvars);
        for (m, c) in &self.terms {
            if !mono.divides(m) {
                return None;
            }
            out.terms.insert(mono.quotient_of(m), c.clone());
        }
        Some(out)
    }

    /// Text form using the given variable names, terms in decreasing
    /// graded reverse lexicographic order.
    pub fn to_string_with(&self, names: &[String]) -> String {
        assert!(names.len() >= self.nvars);
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.sorted_terms(MonomialOrder::GrevLex).iter().enumerate() {
            let mut cs = self.ring.render(c);
            let negative = cs.starts_with('-');
            if negative {
                cs.remove(0);
            }
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            if cs != "1" || m.is_one() {
                factors.push(cs);
            }
            for (i, &e) in m.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    _ => factors.push(format!("{}^{}", names[i], e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl<R: Field> MultiPoly<R> {
    /// Scales so the leading coefficient (under `order`) is one.
    pub fn monic(&self, order: MonomialOrder) -> Self {
        match self.leading_term(order) {
            None => self.clone(),
            Some((_, c)) => {
                let inv = self.ring.inv(c).expect("nonzero leading coefficient");
                self.scale(&inv)
            }
        }
    }

    /// Exact quotient by `d` when `d` divides `self`, using division by a
    /// single polynomial.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let order = MonomialOrder::GrevLex;
        let (dm, dc) = d.leading_term(order)?;
        let dm = dm.clone();
        let dinv = self.ring.inv(dc)?;
        let mut rem = self.clone();
        let mut q = Self::zero(self.ring.clone(), self.nvars);
        while let Some((m, c)) = rem.leading_term(order) {
            if !dm.divides(m) {
                return None;
            }
            let qm = dm.quotient_of(m);
            let qc = self.ring.mul(c, &dinv);
            let t = d.mul_term(&qm, &qc).ok()?;
            rem = rem.try_sub(&t).ok()?;
            q.add_term(qm, qc);
        }
        Some(q)
    }
}

/// Coefficientwise image of a rational polynomial in `F_p`.
pub fn reduce_mod_p(a: &MultiPoly<Rationals>, field: PrimeField) -> Result<MultiPoly<PrimeField>> {
    a.try_map_coeffs(field, |c: &BigRational| field.from_rational(c))
}

/// Standard variable names `prefix1..prefixn`.
pub fn var_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Names for the coordinates `X1..Xn, s1..sn` of the twisted cotangent
/// bundle.
pub fn center_names(n: usize) -> Vec<String> {
    let mut v = var_names("X", n);
    v.extend(var_names("s", n));
    v
}

impl<R: Ring> fmt::Display for MultiPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&var_names("x", self.nvars)))
    }
}

impl<R: Ring> PartialOrd for MultiPoly<R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<R: Ring> Ord for MultiPoly<R> {
    /// Arbitrary but canonical total order, used for deterministic sorting
    /// of generator lists.
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.sorted_terms(MonomialOrder::GrevLex);
        let b = other.sorted_terms(MonomialOrder::GrevLex);
        for (x, y) in a.iter().zip(b.iter()) {
            match MonomialOrder::GrevLex.cmp(&x.0, &y.0) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        a.len().cmp(&b.len()).then_with(|| self.to_string().cmp(&other.to_string()))
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<'a, R: Ring> $trait<&'a MultiPoly<R>> for &'a MultiPoly<R> {
            type Output = MultiPoly<R>;
            fn $method(self, rhs: &'a MultiPoly<R>) -> MultiPoly<R> {
                self.$checked(rhs).expect(concat!("MultiPoly ", stringify!($method)))
            }
        }
        impl<R: Ring> $trait<MultiPoly<R>> for MultiPoly<R> {
            type Output = MultiPoly<R>;
            fn $method(self, rhs: MultiPoly<R>) -> MultiPoly<R> {
                self.$checked(&rhs).expect(concat!("MultiPoly ", stringify!($method)))
            }
        }
    };
}

impl_binop!(Add, add, try_add);
impl_binop!(Sub, sub, try_sub);
impl_binop!(Mul, mul, try_mul);

impl<R: Ring> Neg for &MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn neg(self) -> MultiPoly<R> {
        let c = self.ring.neg(&self.ring.one());
        self.scale(&c)
    }
}

impl<R: Ring> Neg for MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn neg(self) -> MultiPoly<R> {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_poly;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn pp(s: &str, p: u64, n: usize) -> MultiPoly<PrimeField> {
        reduce_mod_p(&parse_poly(s, &var_names("x", n)).unwrap(), fp(p)).unwrap()
    }

    #[test]
    fn poly_mul_examples() {
        assert_eq!(pp("(x1+1)*(x1-1)", 5, 1), pp("x1^2+4", 5, 1));
        assert_eq!(pp("(x1+1)^2", 2, 1), pp("x1^2+1", 2, 1));
        let x = MultiPoly::var(fp(7), 1, 0);
        assert_eq!(&x * &x, pp("x1^2", 7, 1));
    }

    #[test]
    fn poly_mul_mismatch() {
        let a = MultiPoly::var(fp(5), 1, 0);
        let b = MultiPoly::var(fp(5), 2, 0);
        let c = MultiPoly::var(fp(7), 1, 0);
        assert!(matches!(a.try_mul(&b), Err(Error::DomainMismatch(_))));
        assert!(matches!(a.try_mul(&c), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn poly_diff_examples() {
        assert!(pp("x1^5", 5, 1).diff(0).unwrap().is_zero());
        let q = parse_poly("x1^3", &var_names("x", 1)).unwrap();
        assert_eq!(q.diff(0).unwrap(), parse_poly("3*x1^2", &var_names("x", 1)).unwrap());
        assert_eq!(pp("x1^2*x2+x2^2", 7, 2).diff(1).unwrap(), pp("x1^2+2*x2", 7, 2));
        assert!(matches!(
            pp("x1", 5, 1).diff(1),
            Err(Error::IndexOutOfRange { index: 1, nvars: 1 })
        ));
    }

    #[test]
    fn reduce_mod_p_examples() {
        let q = parse_poly("x1^3/3", &var_names("x", 1)).unwrap();
        assert_eq!(reduce_mod_p(&q, fp(5)).unwrap(), pp("2*x1^3", 5, 1));
        assert!(matches!(reduce_mod_p(&q, fp(3)), Err(Error::BadPrime(_))));
        let q2 = parse_poly("x1^2", &var_names("x", 1)).unwrap();
        assert_eq!(reduce_mod_p(&q2, fp(7)).unwrap().to_string(), "x1^2");
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(pp("3 + x2*x1 - x1^2", 5, 2).to_string(), "4*x1^2 + x1*x2 + 3");
        let q = parse_poly("1/2*x1 - 3", &var_names("x", 1)).unwrap();
        assert_eq!(q.to_string(), "1/2*x1 - 3");
        let q = parse_poly("-x1", &var_names("x", 1)).unwrap();
        assert_eq!(q.to_string(), "-x1");
    }

    #[test]
    fn exact_division() {
        let a = pp("x1^3 - x1*x2^2", 7, 2);
        let d = pp("x1 + x2", 7, 2);
        assert_eq!(a.exact_div(&d).unwrap(), pp("x1^2 - x1*x2", 7, 2));
        assert!(pp("x1^2 + 1", 7, 2).exact_div(&d).is_none());
    }

    #[test]
    fn substitution_composes() {
        let f = pp("x1^2 + x2", 5, 2);
        let img = vec![pp("x1 + 1", 5, 1), pp("x1^3", 5, 1)];
        assert_eq!(f.substitute(&img).unwrap(), pp("x1^3 + x1^2 + 2*x1 + 1", 5, 1));
    }
}
