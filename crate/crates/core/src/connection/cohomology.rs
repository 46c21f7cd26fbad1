//! Degree-truncated de Rham and Higgs cohomology on `A^1` and `A^2`, and
//! the Cartier operator on `A^1`.
//!
//! `C^q` is truncated at total degree `d + q·δ`, where `δ` is the largest
//! amount the differential can raise degrees by: `max(-1, deg Θ)` for a
//! connection and `max(0, deg Θ)` for a Higgs field. With this choice the
//! differential maps each truncated piece into the next one.

use super::{Connection, HiggsBundle, PMat};
use crate::algebra::{var_names, Field, Monomial, MultiPoly, PForm, PrimeField, Ring};
use crate::error::{Error, Result};

/// Largest number of coordinates in one truncated cochain space.
pub const MAX_COCHAIN_DIM: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyGroup {
    pub degree: usize,
    /// Total-degree bound of the cochains in this slot.
    pub truncation: i64,
    pub dimension: usize,
    /// Representatives, one form per component of the module.
    pub basis: Vec<Vec<PForm<PrimeField>>>,
    /// Number of generators over `F_p[x_1^p, .., x_n^p]` seen in the truncation.
    pub generators: usize,
}

impl CohomologyGroup {
    pub fn basis_strings(&self) -> Vec<String> {
        self.basis
            .iter()
            .map(|comps| {
                let names = var_names("x", comps[0].nvars());
                let parts: Vec<String> = comps.iter().map(|f| f.to_string_with(&names)).collect();
                if parts.len() == 1 {
                    parts[0].clone()
                } else {
                    format!("[{}]", parts.join(", "))
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cohomology {
    pub bound: u32,
    pub groups: Vec<CohomologyGroup>,
    /// Generator counts agree between the bounds `d` and `2d`.
    pub stable: bool,
    pub generators_at_double: Vec<usize>,
}

/// Coordinates of a truncated cochain space: component, index set, monomial.
struct Cochains {
    coords: Vec<(usize, Vec<usize>, Monomial)>,
    index: std::collections::HashMap<(usize, Vec<usize>, Monomial), usize>,
}

fn monomials_up_to(n: usize, deg: i64) -> Vec<Monomial> {
    let mut out = Vec::new();
    if deg < 0 {
        return out;
    }
    for total in 0..=deg as u16 {
        let mut stack = vec![(Vec::<u16>::new(), total)];
        while let Some((prefix, left)) = stack.pop() {
            if prefix.len() == n - 1 {
                let mut e = prefix.clone();
                e.push(left);
                out.push(Monomial::from_exps(&e));
                continue;
            }
            for k in (0..=left).rev() {
                let mut e = prefix.clone();
                e.push(k);
                stack.push((e, left - k));
            }
        }
    }
    out
}

impl Cochains {
    fn new(n: usize, rank: usize, q: usize, deg: i64) -> Result<Self> {
        let mut coords = Vec::new();
        let monos = monomials_up_to(n, deg);
        for set in PForm::<PrimeField>::basis_sets(n, q) {
            for k in 0..rank {
                for m in &monos {
                    coords.push((k, set.clone(), m.clone()));
                }
            }
        }
        if coords.len() > MAX_COCHAIN_DIM {
            return Err(Error::BudgetExceeded(format!(
                "truncated cochain space of dimension {} exceeds {MAX_COCHAIN_DIM}",
                coords.len()
            )));
        }
        let index = coords.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        Ok(Cochains { coords, index })
    }

    fn len(&self) -> usize {
        self.coords.len()
    }
}

/// Sign and sorted index set of `dx_i ∧ dx_I`; `None` when `i ∈ I`.
fn wedge_front(i: usize, set: &[usize]) -> Option<(bool, Vec<usize>)> {
    if set.contains(&i) {
        return None;
    }
    let pos = set.iter().filter(|&&j| j < i).count();
    let mut v = set.to_vec();
    v.insert(pos, i);
    Some((pos % 2 == 1, v))
}

/// Matrix of `ω ↦ Σ_i dx_i ∧ (λ∂_i + Θ_i)ω` from `src` to `dst`.
fn differential(
    field: PrimeField,
    theta: &[PMat<PrimeField>],
    lambda: bool,
    src: &Cochains,
    dst: &Cochains,
) -> Result<Vec<Vec<u64>>> {
    let n = theta.len();
    let mut m = vec![vec![0u64; src.len()]; dst.len()];
    for (col, (k, set, mono)) in src.coords.iter().enumerate() {
        let f = MultiPoly::term(field, mono.clone(), 1);
        for i in 0..n {
            let Some((neg, target)) = wedge_front(i, set) else {
                continue;
            };
            // components of (λ∂_i + Θ_i)(f e_k)
            let mut comps: Vec<(usize, MultiPoly<PrimeField>)> = Vec::new();
            if lambda {
                comps.push((*k, f.diff(i)?));
            }
            for (a, row) in theta[i].iter().enumerate() {
                let t = &row[*k];
                if !t.is_zero() {
                    comps.push((a, t * &f));
                }
            }
            for (a, g) in comps {
                for (gm, c) in g.terms() {
                    let key = (a, target.clone(), gm.clone());
                    let row = *dst.index.get(&key).ok_or_else(|| {
                        Error::Invalid("differential leaves the truncated cochain space".into())
                    })?;
                    let c = if neg { field.neg(c) } else { *c };
                    m[row][col] = field.add(&m[row][col], &c);
                }
            }
        }
    }
    Ok(m)
}

/// Incremental row echelon basis of a subspace of `F_p^len`.
struct Echelon {
    field: PrimeField,
    rows: Vec<(usize, Vec<u64>)>,
}

impl Echelon {
    fn new(field: PrimeField) -> Self {
        Echelon { field, rows: Vec::new() }
    }

    /// Inserts `v`; returns whether the span grew.
    fn insert(&mut self, mut v: Vec<u64>) -> bool {
        let f = self.field;
        for (piv, row) in &self.rows {
            let c = v[*piv];
            if c != 0 {
                for (x, y) in v.iter_mut().zip(row) {
                    if *y != 0 {
                        *x = f.sub(x, &f.mul(&c, y));
                    }
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            None => false,
            Some(piv) => {
                let inv = f.inv(&v[piv]).unwrap();
                for x in v.iter_mut() {
                    *x = f.mul(x, &inv);
                }
                for (_, row) in self.rows.iter_mut() {
                    let c = row[piv];
                    if c != 0 {
                        for (x, y) in row.iter_mut().zip(&v) {
                            if *y != 0 {
                                *x = f.sub(x, &f.mul(&c, y));
                            }
                        }
                    }
                }
                self.rows.push((piv, v));
                true
            }
        }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }
}

fn columns(m: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
    (0..cols).map(|c| m.iter().map(|r| r[c]).collect()).collect()
}

struct Slice {
    /// Per degree `q`: cocycle basis, coboundary spanning set, cochains.
    cocycles: Vec<Vec<Vec<u64>>>,
    coboundaries: Vec<Vec<Vec<u64>>>,
    spaces: Vec<Cochains>,
    bounds: Vec<i64>,
}

fn slice(field: PrimeField, theta: &[PMat<PrimeField>], rank: usize, lambda: bool, d: i64, delta: i64) -> Result<Slice> {
    let n = theta.len();
    let bounds: Vec<i64> = (0..=n).map(|q| d + q as i64 * delta).collect();
    let spaces = (0..=n)
        .map(|q| Cochains::new(n, rank, q, bounds[q]))
        .collect::<Result<Vec<_>>>()?;
    let mut diffs = Vec::with_capacity(n);
    for q in 0..n {
        diffs.push(differential(field, theta, lambda, &spaces[q], &spaces[q + 1])?);
    }
    let mut cocycles = Vec::with_capacity(n + 1);
    let mut coboundaries = Vec::with_capacity(n + 1);
    for q in 0..=n {
        let z = if q < n {
            crate::algebra::linalg::kernel(&field, &diffs[q], spaces[q].len())
        } else {
            (0..spaces[q].len())
                .map(|i| {
                    let mut v = vec![0u64; spaces[q].len()];
                    v[i] = 1;
                    v
                })
                .collect()
        };
        let b = if q == 0 { Vec::new() } else { columns(&diffs[q - 1], spaces[q - 1].len()) };
        cocycles.push(z);
        coboundaries.push(b);
    }
    Ok(Slice {
        cocycles,
        coboundaries,
        spaces,
        bounds,
    })
}

/// Embeds a vector over `small` into `big` after multiplying by `x_i^p`.
fn shift(v: &[u64], small: &Cochains, big: &Cochains, i: usize, p: u64) -> Vec<u64> {
    let mut out = vec![0u64; big.len()];
    for (idx, c) in v.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let (k, set, m) = &small.coords[idx];
        let xp = Monomial::var(m.nvars(), i, p as u16);
        let nm = m.mul(&xp).expect("small exponents");
        out[big.index[&(*k, set.clone(), nm)]] = *c;
    }
    out
}

fn to_forms(field: PrimeField, v: &[u64], space: &Cochains, n: usize, rank: usize, q: usize) -> Vec<PForm<PrimeField>> {
    let mut forms = vec![PForm::zero(field, n, q); rank];
    for (idx, c) in v.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let (k, set, m) = &space.coords[idx];
        forms[*k].add_component(set, MultiPoly::term(field, m.clone(), *c));
    }
    forms
}

fn compute(field: PrimeField, theta: &[PMat<PrimeField>], rank: usize, lambda: bool, bound: u32) -> Result<Cohomology> {
    let n = theta.len();
    if n == 0 || n > 2 {
        return Err(Error::Invalid("cohomology is implemented for n = 1, 2".into()));
    }
    let p = field.p() as i64;
    let deg_theta: i64 = theta
        .iter()
        .flat_map(|m| m.iter().flat_map(|r| r.iter()))
        .filter_map(|e| e.total_degree())
        .map(|d| d as i64)
        .max()
        .unwrap_or(-1);
    let delta = if lambda { deg_theta.max(-1) } else { deg_theta.max(0) };

    let run = |d: i64| -> Result<(Vec<CohomologyGroup>, Vec<usize>)> {
        let big = slice(field, theta, rank, lambda, d, delta)?;
        let small = if d - p >= 0 { Some(slice(field, theta, rank, lambda, d - p, delta)?) } else { None };
        let mut groups = Vec::new();
        let mut gens = Vec::new();
        for q in 0..=n {
            let mut ech = Echelon::new(field);
            for b in &big.coboundaries[q] {
                ech.insert(b.clone());
            }
            let b_dim = ech.dim();
            let mut basis = Vec::new();
            for z in &big.cocycles[q] {
                if ech.insert(z.clone()) {
                    basis.push(to_forms(field, z, &big.spaces[q], n, rank, q));
                }
            }
            let dim = ech.dim() - b_dim;
            let mut ech2 = Echelon::new(field);
            for b in &big.coboundaries[q] {
                ech2.insert(b.clone());
            }
            if let Some(s) = &small {
                for z in &s.cocycles[q] {
                    for i in 0..n {
                        ech2.insert(shift(z, &s.spaces[q], &big.spaces[q], i, p as u64));
                    }
                }
            }
            let generators = dim - (ech2.dim() - b_dim);
            gens.push(generators);
            groups.push(CohomologyGroup {
                degree: q,
                truncation: big.bounds[q],
                dimension: dim,
                basis,
                generators,
            });
        }
        Ok((groups, gens))
    };
    let (groups, gens) = run(bound as i64)?;
    let (_, gens2) = run(2 * bound as i64)?;
    Ok(Cohomology {
        bound,
        stable: gens == gens2,
        groups,
        generators_at_double: gens2,
    })
}

/// Truncated de Rham cohomology of a polynomial connection on `A^1` or `A^2`.
pub fn derham_cohomology(c: &Connection<PrimeField>, bound: u32) -> Result<Cohomology> {
    let theta = c
        .polynomial_theta()
        .ok_or_else(|| Error::Invalid("de Rham cohomology needs polynomial matrices".into()))?;
    compute(*c.ring(), &theta, c.rank(), true, bound)
}

/// Truncated cohomology of the Koszul complex of a Higgs field.
pub fn higgs_cohomology(h: &HiggsBundle<PrimeField>, bound: u32) -> Result<Cohomology> {
    let field = *h.theta()[0][0][0].ring();
    compute(field, h.theta(), h.rank(), false, bound)
}

/// Cartier operator on 1-forms on `A^1`: `x^k dx ↦ x^((k+1)/p - 1) dx`
/// when `p | k+1`, and `0` otherwise. The result is a form on the twist.
pub fn cartier(omega: &PForm<PrimeField>) -> Result<PForm<PrimeField>> {
    if omega.nvars() != 1 || omega.degree() != 1 {
        return Err(Error::Invalid("Cartier operator is implemented for 1-forms on A^1".into()));
    }
    let f = omega.coeff(&[0]);
    let field = *f.ring();
    let p = field.p();
    let mut out = MultiPoly::zero(field, 1);
    for (m, c) in f.terms() {
        let k = m.exps()[0] as u64;
        if (k + 1) % p == 0 {
            out.add_term(Monomial::from_exps(&[((k + 1) / p - 1) as u16]), *c);
        }
    }
    Ok(PForm::one_form(out, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_poly_in;
    use crate::connection::exponential_module;
    use proptest::prelude::*;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn poly(s: &str, f: PrimeField, n: usize) -> MultiPoly<PrimeField> {
        parse_poly_in(s, &var_names("x", n), f, &|q| f.from_rational(q)).unwrap()
    }

    #[test]
    fn trivial_line() {
        let c = Connection::trivial(fp(3), 1, 1);
        let h = derham_cohomology(&c, 9).unwrap();
        assert_eq!(h.groups[0].basis_strings(), vec!["1", "x1^3", "x1^6", "x1^9"]);
        assert_eq!(h.groups[1].basis_strings(), vec!["(x1^2)*dx1", "(x1^5)*dx1", "(x1^8)*dx1"]);
        assert_eq!(h.groups[0].generators, 1);
        assert_eq!(h.groups[1].generators, 1);
        assert!(h.stable);
    }

    #[test]
    fn exponential_of_x_vanishes() {
        let c = exponential_module(&poly("x1", fp(5), 1)).unwrap();
        for d in [10, 20, 40] {
            let h = derham_cohomology(&c, d).unwrap();
            assert!(h.groups.iter().all(|g| g.dimension == 0));
            assert!(h.stable);
        }
    }

    #[test]
    fn end_of_exponential_is_trivial() {
        let f = fp(5);
        let e = exponential_module(&poly("x1^2 + 3*x1", f, 1)).unwrap().endo().unwrap();
        let a = derham_cohomology(&e, 12).unwrap();
        let b = derham_cohomology(&Connection::trivial(f, 1, 1), 12).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn higgs_examples() {
        let f = fp(5);
        let h = HiggsBundle::new(1, vec![vec![vec![poly("x1", f, 1)]]]).unwrap();
        let c = higgs_cohomology(&h, 8).unwrap();
        assert_eq!(c.groups[0].dimension, 0);
        assert_eq!(c.groups[1].basis_strings(), vec!["(1)*dx1"]);
        let h = HiggsBundle::new(1, vec![vec![vec![poly("0", f, 1)]]]).unwrap();
        let c = higgs_cohomology(&h, 8).unwrap();
        assert_eq!(c.groups[0].dimension, 9);
        assert_eq!(c.groups[1].dimension, 9);
        let h = HiggsBundle::new(1, vec![vec![vec![poly("1", f, 1)]]]).unwrap();
        let c = higgs_cohomology(&h, 8).unwrap();
        assert!(c.groups.iter().all(|g| g.dimension == 0));
    }

    #[test]
    fn plane_trivial_matches_cartier() {
        // H^q of the trivial connection on A^2 is Ω^q on the twist
        let h = derham_cohomology(&Connection::trivial(fp(3), 2, 1), 7).unwrap();
        // H^0 = F_3[x^3, y^3] up to degree 7: 1, x^3, y^3, x^6, x^3y^3, y^6
        assert_eq!(h.groups[0].dimension, 6);
        assert_eq!(h.groups[0].generators, 1);
        assert_eq!(h.groups[2].generators, 1);
        assert_eq!(h.groups[1].generators, 2);
    }

    #[test]
    fn cartier_examples() {
        let f = fp(5);
        let c = |s: &str| cartier(&PForm::one_form(poly(s, f, 1), 0)).unwrap().coeff(&[0]);
        assert_eq!(c("x1^4"), poly("1", f, 1));
        assert!(c("1").is_zero());
        assert_eq!(c("x1^9"), poly("x1", f, 1));
        // exact forms are in the kernel
        let g = poly("x1^7 + 3*x1^4 + x1", f, 1);
        assert!(c(&g.diff(0).unwrap().to_string_with(&var_names("x", 1))).is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn trivial_h0_matches_cartier_count(d in 0u32..30, p in prop::sample::select(vec![2u64, 3, 5, 7])) {
            let h = derham_cohomology(&Connection::trivial(fp(p), 1, 1), d).unwrap();
            prop_assert_eq!(h.groups[0].dimension as u32, d / p as u32 + 1);
        }
    }
}
