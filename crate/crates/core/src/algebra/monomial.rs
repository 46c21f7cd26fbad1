use std::cmp::Ordering;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Exponent vector. Exponents are capped at `u16::MAX`; products that
/// would exceed the cap fail with `ExponentOverflow`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(SmallVec<[u16; 6]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, i: usize, e: u16) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = e;
        m
    }

    pub fn from_exps(exps: &[u16]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn exps(&self) -> &[u16] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Result<Monomial> {
        let mut out = self.0.clone();
        for (a, b) in out.iter_mut().zip(other.0.iter()) {
            *a = a.checked_add(*b).ok_or(Error::ExponentOverflow)?;
        }
        Ok(Monomial(out))
    }

    pub fn pow(&self, e: u32) -> Result<Monomial> {
        let mut out = self.0.clone();
        for a in out.iter_mut() {
            let v = (*a as u32).checked_mul(e).ok_or(Error::ExponentOverflow)?;
            *a = u16::try_from(v).map_err(|_| Error::ExponentOverflow)?;
        }
        Ok(Monomial(out))
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`; caller guarantees divisibility.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(self.0.iter()).map(|(b, a)| b - a).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0
            .iter()
            .zip(other.0.iter())
            .all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn set(&mut self, i: usize, e: u16) {
        self.0[i] = e;
    }
}

/// Monomial orders. Variable 0 is the largest variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum MonomialOrder {
    Lex,
    GrevLex,
    /// Variables `0..split` form the first block and are compared first
    /// (grevlex within each block). Used for elimination.
    Block { split: usize },
}

fn grevlex(a: &[u16], b: &[u16]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().zip(b.iter()).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match *self {
            MonomialOrder::Lex => a.0.cmp(&b.0),
            MonomialOrder::GrevLex => grevlex(&a.0, &b.0),
            MonomialOrder::Block { split } => {
                grevlex(&a.0[..split], &b.0[..split]).then_with(|| grevlex(&a.0[split..], &b.0[split..]))
            }
        }
    }
}
