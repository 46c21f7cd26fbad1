//! Coefficient rings: prime fields, the rationals, `Z/p^2`, and small
//! extension fields `F_{p^k}`.
//!
//! Rings are runtime values (a prime field knows its `p`), so every
//! polynomial carries the ring it lives over and element arithmetic goes
//! through the ring.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A commutative ring whose elements are plain values.
pub trait Ring: Clone + PartialEq + Eq + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn from_u64(&self, v: u64) -> Self::Elem {
        // split to stay within i64
        let hi = (v >> 32) as i64;
        let lo = (v & 0xffff_ffff) as i64;
        let shift = self.from_i64(1i64 << 32);
        self.add(&self.mul(&self.from_i64(hi), &shift), &self.from_i64(lo))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Characteristic of the ring (0 for `Q`).
    fn characteristic(&self) -> u64;

    /// Renders an element for the polynomial text format.
    fn render(&self, a: &Self::Elem) -> String;
}

/// A ring in which every nonzero element is invertible.
pub trait Field: Ring {
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }
}

/// Deterministic Miller-Rabin, exact for all `n < 3.3 * 10^24`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % small == 0 {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The prime field `F_p` with `2 <= p < 2^31`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(Error::BadPrime(format!("{p} is not a prime below 2^31")));
        }
        Ok(PrimeField { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn elem(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    /// Image of a rational number, or `BadPrime` when `p` divides the
    /// denominator.
    pub fn from_rational(&self, q: &BigRational) -> Result<u64> {
        let p = BigInt::from(self.p);
        let num = q.numer().mod_floor(&p).to_u64().unwrap();
        let den = q.denom().mod_floor(&p).to_u64().unwrap();
        if den == 0 {
            return Err(Error::BadPrime(format!(
                "denominator of {q} is divisible by {}",
                self.p
            )));
        }
        Ok(self.mul(&num, &self.inv(&den).unwrap()))
    }
}

impl Ring for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_i64(&self, v: i64) -> u64 {
        self.elem(v)
    }
    fn from_u64(&self, v: u64) -> u64 {
        v % self.p
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn characteristic(&self) -> u64 {
        self.p
    }
    fn render(&self, a: &u64) -> String {
        a.to_string()
    }
}

impl Field for PrimeField {
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }
}

/// The rational numbers with arbitrary precision.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Rationals;

impl Ring for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_u64(&self, v: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn render(&self, a: &BigRational) -> String {
        if a.is_integer() {
            a.numer().to_string()
        } else if a.is_negative() {
            format!("-{}/{}", a.numer().abs(), a.denom())
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
}

impl Field for Rationals {
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
}

/// `Z/p^2 = W_2(F_p)`, the square-zero thickening of `F_p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ZModP2 {
    p: u64,
    modulus: u64,
}

impl ZModP2 {
    pub fn new(p: u64) -> Result<Self> {
        let f = PrimeField::new(p)?;
        Ok(ZModP2 {
            p: f.p(),
            modulus: f.p() * f.p(),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Reduction `Z/p^2 -> F_p`.
    pub fn reduce(&self, a: &u64) -> u64 {
        a % self.p
    }

    /// Division of a multiple of `p` by `p`, landing in `F_p`.
    pub fn div_p(&self, a: &u64) -> Option<u64> {
        if a % self.p == 0 {
            Some(a / self.p)
        } else {
            None
        }
    }

    /// The Teichmuller-free lift `[0, p)` of a residue.
    pub fn lift(&self, a: u64) -> u64 {
        a % self.p
    }
}

impl Ring for ZModP2 {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.modulus as i64) as u64
    }
    fn from_u64(&self, v: u64) -> u64 {
        v % self.modulus
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.modulus
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.modulus - b) % self.modulus
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.modulus
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.modulus - a) % self.modulus
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn characteristic(&self) -> u64 {
        self.modulus
    }
    fn render(&self, a: &u64) -> String {
        a.to_string()
    }
}

/// `F_{p^k}` presented as `F_p[t]/(m(t))` for a monic irreducible `m`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExtField {
    base: PrimeField,
    /// Monic modulus, low-to-high coefficients, length `k + 1`.
    modulus: Vec<u64>,
}

impl ExtField {
    /// Builds `F_{p^k}` from the first monic irreducible of degree `k` in
    /// lexicographic order of coefficients.
    pub fn new(base: PrimeField, k: usize) -> Self {
        assert!(k >= 1);
        if k == 1 {
            return ExtField {
                base,
                modulus: vec![0, 1],
            };
        }
        let p = base.p();
        let total = p.checked_pow(k as u32).expect("extension too large");
        for idx in 0..total {
            let mut m = Vec::with_capacity(k + 1);
            let mut rest = idx;
            for _ in 0..k {
                m.push(rest % p);
                rest /= p;
            }
            m.push(1);
            let poly = crate::algebra::univariate::UniPoly::new(base, m.clone());
            if poly.is_irreducible() {
                return ExtField { base, modulus: m };
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn base(&self) -> PrimeField {
        self.base
    }

    pub fn size(&self) -> u64 {
        self.base.p().pow(self.degree() as u32)
    }

    /// Element with index `i` in `0..size()` (base-`p` digits as coordinates).
    pub fn element(&self, mut i: u64) -> Vec<u64> {
        let p = self.base.p();
        (0..self.degree())
            .map(|_| {
                let d = i % p;
                i /= p;
                d
            })
            .collect()
    }

    pub fn embed(&self, a: u64) -> Vec<u64> {
        let mut v = vec![0; self.degree()];
        v[0] = a % self.base.p();
        v
    }
}

impl Ring for ExtField {
    type Elem = Vec<u64>;

    fn zero(&self) -> Vec<u64> {
        vec![0; self.degree()]
    }
    fn one(&self) -> Vec<u64> {
        self.embed(1)
    }
    fn from_i64(&self, v: i64) -> Vec<u64> {
        self.embed(self.base.elem(v))
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| self.base.add(x, y)).collect()
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| self.base.sub(x, y)).collect()
    }
    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter().map(|x| self.base.neg(x)).collect()
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let k = self.degree();
        let f = &self.base;
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = f.add(&prod[i + j], &f.mul(x, y));
            }
        }
        for top in (k..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (j, m) in self.modulus[..k].iter().enumerate() {
                let idx = top - k + j;
                prod[idx] = f.sub(&prod[idx], &f.mul(&c, m));
            }
        }
        prod.truncate(k);
        prod
    }
    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.iter().all(|x| *x == 0)
    }
    fn characteristic(&self) -> u64 {
        self.base.p()
    }
    fn render(&self, a: &Vec<u64>) -> String {
        format!("{a:?}")
    }
}

impl Field for ExtField {
    fn inv(&self, a: &Vec<u64>) -> Option<Vec<u64>> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.size() - 2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..40).filter(|n| is_prime(*n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(2_147_483_649));
        assert!(PrimeField::new(4).is_err());
        assert!(PrimeField::new(1 << 31).is_err());
    }

    #[test]
    fn rational_reduction() {
        let f = PrimeField::new(5).unwrap();
        let third = BigRational::new(1.into(), 3.into());
        assert_eq!(f.from_rational(&third).unwrap(), 2);
        let f3 = PrimeField::new(3).unwrap();
        assert!(matches!(f3.from_rational(&third), Err(Error::BadPrime(_))));
    }

    #[test]
    fn extension_field_is_a_field() {
        let f = ExtField::new(PrimeField::new(3).unwrap(), 2);
        assert_eq!(f.size(), 9);
        for i in 1..9 {
            let a = f.element(i);
            let ai = f.inv(&a).unwrap();
            assert_eq!(f.mul(&a, &ai), f.one());
        }
        // Frobenius generates the Galois group: a^9 = a
        for i in 0..9 {
            let a = f.element(i);
            assert_eq!(f.pow(&a, 9), a);
        }
    }

    #[test]
    fn zmodp2_division_by_p() {
        let r = ZModP2::new(5).unwrap();
        assert_eq!(r.div_p(&r.from_i64(-5)), Some(4));
        assert_eq!(r.div_p(&3), None);
    }
}
