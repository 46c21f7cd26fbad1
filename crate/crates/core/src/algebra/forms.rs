use std::collections::BTreeMap;

use super::field::Ring;
use super::poly::MultiPoly;
use crate::error::{Error, Result};

/// A polynomial differential form of degree `q <= 2`, stored by sorted
/// index sets so antisymmetry is structural.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PForm<R: Ring> {
    degree: usize,
    ring: R,
    nvars: usize,
    coeffs: BTreeMap<Vec<usize>, MultiPoly<R>>,
}

fn subsets(n: usize, q: usize) -> Vec<Vec<usize>> {
    match q {
        0 => vec![vec![]],
        1 => (0..n).map(|i| vec![i]).collect(),
        2 => (0..n).flat_map(|i| (i + 1..n).map(move |j| vec![i, j])).collect(),
        _ => unreachable!(),
    }
}

/// Sign and sorted form of an index list; `None` when an index repeats.
fn sort_indices(idx: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut v = idx.to_vec();
    let mut neg = false;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                neg = !neg;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((neg, v))
}

impl<R: Ring> PForm<R> {
    pub fn zero(ring: R, nvars: usize, degree: usize) -> Self {
        assert!(degree <= 2);
        PForm {
            degree,
            ring,
            nvars,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn function(f: MultiPoly<R>) -> Self {
        let mut out = Self::zero(f.ring().clone(), f.nvars(), 0);
        out.add_component(&[], f);
        out
    }

    /// `f dx_i`.
    pub fn one_form(f: MultiPoly<R>, i: usize) -> Self {
        let mut out = Self::zero(f.ring().clone(), f.nvars(), 1);
        out.add_component(&[i], f);
        out
    }

    /// `f dx_i ^ dx_j`.
    pub fn two_form(f: MultiPoly<R>, i: usize, j: usize) -> Self {
        let mut out = Self::zero(f.ring().clone(), f.nvars(), 2);
        out.add_component(&[i, j], f);
        out
    }

    /// Standard symplectic form `sum_i dx_i ^ dx_{m+i}` on `2m` coordinates.
    pub fn symplectic(ring: R, m: usize) -> Self {
        let mut out = Self::zero(ring.clone(), 2 * m, 2);
        for i in 0..m {
            out.add_component(&[i, m + i], MultiPoly::one(ring.clone(), 2 * m));
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `f dx_{idx}` (indices in any order).
    pub fn add_component(&mut self, idx: &[usize], f: MultiPoly<R>) {
        assert_eq!(idx.len(), self.degree);
        let Some((neg, key)) = sort_indices(idx) else {
            return;
        };
        let f = if neg { -f } else { f };
        let entry = self
            .coeffs
            .entry(key.clone())
            .or_insert_with(|| MultiPoly::zero(self.ring.clone(), self.nvars));
        *entry = &*entry + &f;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    /// Coefficient of `dx_{idx}` for a sorted index set.
    pub fn coeff(&self, idx: &[usize]) -> MultiPoly<R> {
        match sort_indices(idx) {
            None => MultiPoly::zero(self.ring.clone(), self.nvars),
            Some((neg, key)) => {
                let c = self
                    .coeffs
                    .get(&key)
                    .cloned()
                    .unwrap_or_else(|| MultiPoly::zero(self.ring.clone(), self.nvars));
                if neg {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &MultiPoly<R>)> {
        self.coeffs.iter()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.degree != o.degree || self.nvars != o.nvars {
            return Err(Error::DomainMismatch("form degree or arity".into()));
        }
        let mut out = self.clone();
        for (k, v) in &o.coeffs {
            out.add_component(k, v.clone());
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self) -> Result<Self> {
        if self.degree == 2 {
            return Err(Error::Invalid("d of a 2-form is not represented".into()));
        }
        let mut out = Self::zero(self.ring.clone(), self.nvars, self.degree + 1);
        for (idx, f) in &self.coeffs {
            for i in 0..self.nvars {
                let df = f.diff(i)?;
                if df.is_zero() {
                    continue;
                }
                let mut key = vec![i];
                key.extend(idx.iter().cloned());
                out.add_component(&key, df);
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        if self.degree + o.degree > 2 {
            return Err(Error::Invalid("wedge product of degree > 2".into()));
        }
        let mut out = Self::zero(self.ring.clone(), self.nvars, self.degree + o.degree);
        for (a, f) in &self.coeffs {
            for (b, g) in &o.coeffs {
                let mut key = a.clone();
                key.extend(b.iter().cloned());
                out.add_component(&key, f * g);
            }
        }
        Ok(out)
    }

    /// Value of a 2-form at `point` on the tangent vectors `u, v`.
    pub fn eval_pair(&self, point: &[R::Elem], u: &[R::Elem], v: &[R::Elem]) -> R::Elem {
        assert_eq!(self.degree, 2);
        let r = &self.ring;
        let mut acc = r.zero();
        for (idx, f) in &self.coeffs {
            let (i, j) = (idx[0], idx[1]);
            let c = f.eval(point);
            let minor = r.sub(&r.mul(&u[i], &v[j]), &r.mul(&u[j], &v[i]));
            acc = r.add(&acc, &r.mul(&c, &minor));
        }
        acc
    }

    pub fn basis_sets(n: usize, q: usize) -> Vec<Vec<usize>> {
        subsets(n, q)
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.coeffs
            .iter()
            .map(|(idx, f)| {
                let dx: Vec<String> = idx.iter().map(|&i| format!("d{}", names[i])).collect();
                if idx.is_empty() {
                    f.to_string_with(names)
                } else {
                    format!("({})*{}", f.to_string_with(names), dx.join("^"))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::PrimeField;
    use crate::algebra::parse::parse_poly_in;
    use crate::algebra::poly::var_names;

    #[test]
    fn d_squared_is_zero() {
        let f = PrimeField::new(7).unwrap();
        let names = var_names("x", 3);
        let g = parse_poly_in("x1^3*x2 + x2*x3^2 + x1", &names, f, &|q| f.from_rational(q)).unwrap();
        let dd = PForm::function(g).d().unwrap().d().unwrap();
        assert!(dd.is_zero());
    }

    #[test]
    fn antisymmetry_is_structural() {
        let f = PrimeField::new(5).unwrap();
        let one = MultiPoly::one(f, 2);
        let a = PForm::two_form(one.clone(), 1, 0);
        assert_eq!(a.coeff(&[0, 1]), -one.clone());
        let dxdx = PForm::one_form(one.clone(), 0).wedge(&PForm::one_form(one, 0)).unwrap();
        assert!(dxdx.is_zero());
    }
}
