use std::fmt;

use super::field::Field;
use super::monomial::MonomialOrder;
use super::poly::MultiPoly;
use crate::error::{Error, Result};

/// An element `numerator / denominator^power` of `O[1/d]` for one fixed
/// denominator `d` per ambient ring.
///
/// Reduced form: when `power > 0` the numerator is not divisible by `d`.
/// The denominator is stored monic, so the representation is unique.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LocalizedPoly<F: Field> {
    num: MultiPoly<F>,
    den: MultiPoly<F>,
    power: u32,
}

/// Normalizes a denominator to be monic; constants collapse to one.
pub fn normalize_denominator<F: Field>(d: &MultiPoly<F>) -> Result<MultiPoly<F>> {
    if d.is_zero() {
        return Err(Error::Invalid("zero denominator".into()));
    }
    if d.is_constant() {
        return Ok(MultiPoly::one(d.ring().clone(), d.nvars()));
    }
    Ok(d.monic(MonomialOrder::GrevLex))
}

impl<F: Field> LocalizedPoly<F> {
    /// `num / den^power`; `den` must already be normalized.
    pub fn new(num: MultiPoly<F>, den: MultiPoly<F>, power: u32) -> Self {
        let mut out = LocalizedPoly { num, den, power };
        out.reduce();
        out
    }

    pub fn from_poly(num: MultiPoly<F>, den: &MultiPoly<F>) -> Self {
        Self::new(num, den.clone(), 0)
    }

    pub fn zero_like(den: &MultiPoly<F>) -> Self {
        Self::new(MultiPoly::zero(den.ring().clone(), den.nvars()), den.clone(), 0)
    }

    fn reduce(&mut self) {
        if self.num.is_zero() || self.den.is_constant() {
            self.power = 0;
            return;
        }
        while self.power > 0 {
            match self.num.exact_div(&self.den) {
                Some(q) => {
                    self.num = q;
                    self.power -= 1;
                }
                None => break,
            }
        }
    }

    pub fn numerator(&self) -> &MultiPoly<F> {
        &self.num
    }

    pub fn denominator(&self) -> &MultiPoly<F> {
        &self.den
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The polynomial itself when no denominator remains.
    pub fn as_poly(&self) -> Option<&MultiPoly<F>> {
        (self.power == 0).then_some(&self.num)
    }

    /// Numerator rewritten over `den^k` for `k >= power`.
    pub fn numerator_at(&self, k: u32) -> MultiPoly<F> {
        assert!(k >= self.power);
        &self.num * &self.den.pow(k - self.power).expect("denominator power")
    }

    pub fn add(&self, o: &Self) -> Self {
        let k = self.power.max(o.power);
        Self::new(&self.numerator_at(k) + &o.numerator_at(k), self.den.clone(), k)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let k = self.power.max(o.power);
        Self::new(&self.numerator_at(k) - &o.numerator_at(k), self.den.clone(), k)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.num * &o.num, self.den.clone(), self.power + o.power)
    }

    pub fn neg(&self) -> Self {
        LocalizedPoly {
            num: -&self.num,
            den: self.den.clone(),
            power: self.power,
        }
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        Self::new(self.num.scale(c), self.den.clone(), self.power)
    }

    pub fn mul_poly(&self, p: &MultiPoly<F>) -> Self {
        Self::new(&self.num * p, self.den.clone(), self.power)
    }

    /// Quotient rule: `(a/d^k)' = (a' d - k a d') / d^(k+1)`.
    pub fn diff(&self, i: usize) -> Result<Self> {
        if self.power == 0 {
            return Ok(Self::new(self.num.diff(i)?, self.den.clone(), 0));
        }
        let ring = self.num.ring().clone();
        let k = MultiPoly::constant(ring.clone(), self.num.nvars(), ring.from_u64(self.power as u64));
        let top = &(&self.num.diff(i)? * &self.den) - &(&k * &(&self.num * &self.den.diff(i)?));
        Ok(Self::new(top, self.den.clone(), self.power + 1))
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        let n = self.num.to_string_with(names);
        match self.power {
            0 => n,
            1 => format!("({n})/({})", self.den.to_string_with(names)),
            k => format!("({n})/({})^{k}", self.den.to_string_with(names)),
        }
    }
}

impl<F: Field> fmt::Display for LocalizedPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = super::poly::var_names("x", self.num.nvars());
        f.write_str(&self.to_string_with(&names))
    }
}
