//! Annihilators in the center `F_p[X, s]` (with `X_i = x_i^p`,
//! `s_i = ∂_i^p`), p-supports and p-cycles.

mod cycle;
mod lagrangian;

use std::collections::HashMap;

use crate::algebra::{center_names, linalg, Field, LocalizedPoly, Monomial, MonomialOrder, MultiPoly, PrimeField, Ring};
use crate::connection::{lmat_is_zero, lmat_mul, p_curvature, Connection, LMat, PCurvature};
use crate::error::{Error, Result};
use crate::groebner::{buchberger, saturate, Budget, GroebnerBasis, Ideal};
use crate::weyl::WeylElement;

pub use cycle::{p_cycle, p_cycle_of_connection, transform_cycle, Component, CycleEntry, PCycle, SampleInfo};
pub(crate) use cycle::{point_count, sample_points};
pub use lagrangian::{is_lagrangian_candidate, IsotropySample, LagrangianReport};

/// Largest total degree tried for annihilator relations.
pub const MAX_BOUND: u32 = 64;

/// The center acting on a connection: `X_i` by `x_i^p·Id`, `s_i` by `Ψ_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenterEvaluation {
    n: usize,
    rank: usize,
    den: MultiPoly<PrimeField>,
    psi: Vec<LMat<PrimeField>>,
}

impl CenterEvaluation {
    pub fn new(pc: &PCurvature) -> Self {
        CenterEvaluation {
            n: pc.nvars(),
            rank: pc.rank(),
            den: pc.denominator().clone(),
            psi: pc.psi().to_vec(),
        }
    }

    pub fn of_connection(c: &Connection<PrimeField>) -> Result<Self> {
        Ok(Self::new(&p_curvature(c)?))
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn field(&self) -> PrimeField {
        *self.den.ring()
    }

    pub fn denominator(&self) -> &MultiPoly<PrimeField> {
        &self.den
    }

    pub fn psi(&self) -> &[LMat<PrimeField>] {
        &self.psi
    }

    /// The denominator read on the twist: `d(X)`, with `d(x)^p = d(X)|_{X = x^p}`.
    pub fn twisted_denominator(&self) -> MultiPoly<PrimeField> {
        let pos: Vec<usize> = (0..self.n).collect();
        self.den.remap_vars(2 * self.n, &pos)
    }

    fn identity(&self) -> LMat<PrimeField> {
        let one = LocalizedPoly::from_poly(MultiPoly::one(self.field(), self.n), &self.den);
        let mut m = crate::connection::lmat_zero(&self.den, self.rank);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = one.clone();
        }
        m
    }

    fn x_power(&self, alpha: &[u16]) -> MultiPoly<PrimeField> {
        let p = self.field().p() as u16;
        let e: Vec<u16> = alpha.iter().map(|a| a * p).collect();
        MultiPoly::term(self.field(), Monomial::from_exps(&e), 1)
    }

    /// `P(x^p·Id, Ψ)` for `P` in `X_1..X_n, s_1..s_n`.
    pub fn evaluate(&self, poly: &MultiPoly<PrimeField>) -> Result<LMat<PrimeField>> {
        let mut cache = PowerCache::new(self);
        let mut acc = crate::connection::lmat_zero(&self.den, self.rank);
        for (m, c) in poly.terms() {
            let t = cache.monomial(m)?;
            for (a, row) in acc.iter_mut().enumerate() {
                for (b, e) in row.iter_mut().enumerate() {
                    *e = e.add(&t[a][b].scale(c));
                }
            }
        }
        Ok(acc)
    }

    pub fn annihilates(&self, poly: &MultiPoly<PrimeField>) -> Result<bool> {
        Ok(lmat_is_zero(&self.evaluate(poly)?))
    }
}

/// Products `Ψ^β` cached by exponent vector.
struct PowerCache<'a> {
    ev: &'a CenterEvaluation,
    psi_powers: HashMap<Vec<u16>, LMat<PrimeField>>,
}

impl<'a> PowerCache<'a> {
    fn new(ev: &'a CenterEvaluation) -> Self {
        let mut psi_powers = HashMap::new();
        psi_powers.insert(vec![0u16; ev.n], ev.identity());
        PowerCache { ev, psi_powers }
    }

    fn psi_power(&mut self, beta: &[u16]) -> LMat<PrimeField> {
        if let Some(m) = self.psi_powers.get(beta) {
            return m.clone();
        }
        let i = beta.iter().position(|&b| b > 0).unwrap();
        let mut prev = beta.to_vec();
        prev[i] -= 1;
        let m = lmat_mul(&self.psi_power(&prev), &self.ev.psi[i]);
        self.psi_powers.insert(beta.to_vec(), m.clone());
        m
    }

    fn monomial(&mut self, m: &Monomial) -> Result<LMat<PrimeField>> {
        let n = self.ev.n;
        let e = m.exps();
        let psi = self.psi_power(&e[n..]);
        let xp = self.ev.x_power(&e[..n]);
        Ok(psi.iter().map(|r| r.iter().map(|v| v.mul_poly(&xp)).collect()).collect())
    }
}

fn center_monomials(nv: usize, bound: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one(nv)];
    let mut frontier = vec![Monomial::one(nv)];
    for _ in 0..bound {
        let mut next = Vec::new();
        for m in &frontier {
            let last = m.exps().iter().rposition(|&e| e > 0).unwrap_or(0);
            for i in last..nv {
                let mut e = m.exps().to_vec();
                e[i] += 1;
                next.push(Monomial::from_exps(&e));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Annihilator ideal with the degree bound at which it stabilized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annihilator {
    pub basis: GroebnerBasis<PrimeField>,
    /// The bound `b` with `GB(b) = GB(2b)`.
    pub bound: u32,
    pub bounds_tried: Vec<u32>,
}

impl Annihilator {
    pub fn ideal(&self) -> Ideal<PrimeField> {
        self.basis.to_ideal()
    }

    pub fn to_strings(&self) -> Vec<String> {
        let names = center_names(self.basis.nvars() / 2);
        self.basis.basis().iter().map(|g| g.to_string_with(&names)).collect()
    }
}

/// All relations of total degree `<= bound`, as a saturated reduced basis.
fn relations_up_to(ev: &CenterEvaluation, bound: u32, budget: &Budget) -> Result<GroebnerBasis<PrimeField>> {
    let field = ev.field();
    let nv = 2 * ev.n;
    let monos = center_monomials(nv, bound);
    let mut cache = PowerCache::new(ev);
    let mats = monos
        .iter()
        .map(|m| cache.monomial(m))
        .collect::<Result<Vec<_>>>()?;
    let k = mats
        .iter()
        .flat_map(|m| m.iter().flat_map(|r| r.iter().map(|e| e.power())))
        .max()
        .unwrap_or(0);
    let mut row_of: HashMap<(usize, Monomial), usize> = HashMap::new();
    let mut cols: Vec<Vec<(usize, u64)>> = Vec::with_capacity(monos.len());
    for m in &mats {
        let mut col = Vec::new();
        for (a, row) in m.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                let num = e.numerator_at(k);
                for (pm, c) in num.terms() {
                    let key = (a * ev.rank + b, pm.clone());
                    let next = row_of.len();
                    let r = *row_of.entry(key).or_insert(next);
                    col.push((r, *c));
                }
            }
        }
        cols.push(col);
    }
    let mut mat = linalg::zeros(&field, row_of.len(), monos.len());
    for (j, col) in cols.iter().enumerate() {
        for (r, c) in col {
            mat[*r][j] = field.add(&mat[*r][j], c);
        }
    }
    let ker = linalg::kernel(&field, &mat, monos.len());
    let gens: Vec<MultiPoly<PrimeField>> = ker
        .iter()
        .map(|v| {
            MultiPoly::from_terms(
                field,
                nv,
                v.iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0)
                    .map(|(j, c)| (monos[j].clone(), *c)),
            )
        })
        .collect();
    let ideal = Ideal::new(field, nv, gens)?;
    let ideal = if ev.den.is_constant() || ideal.is_zero() {
        ideal
    } else {
        saturate(&ideal, &ev.twisted_denominator(), budget)?
    };
    buchberger(&ideal, MonomialOrder::GrevLex, budget)
}

/// Default starting bound `max(2, r·(deg Θ + 1))`.
pub fn default_start_bound(c: &Connection<PrimeField>) -> u32 {
    let deg = c
        .theta()
        .iter()
        .flat_map(|m| m.iter().flat_map(|r| r.iter()))
        .filter(|e| !e.is_zero())
        .map(|e| e.numerator().total_degree().unwrap_or(0) + e.power() * c.denominator().total_degree().unwrap_or(0))
        .max()
        .unwrap_or(0);
    (c.rank() as u32 * (deg + 1)).max(2)
}

/// Annihilator of the module in the center, by bound doubling until the
/// reduced Gröbner basis is nonzero and agrees at `b` and `2b`.
pub fn annihilator_in_center(ev: &CenterEvaluation, start_bound: u32, budget: &Budget) -> Result<Annihilator> {
    let mut b = start_bound.max(1);
    let mut tried = vec![b];
    let mut current = relations_up_to(ev, b, budget)?;
    loop {
        let next_b = 2 * b;
        if next_b > MAX_BOUND {
            return Err(Error::NonStable(format!(
                "annihilator basis still changing at degree bound {b} (limit {MAX_BOUND})"
            )));
        }
        tried.push(next_b);
        let next = relations_up_to(ev, next_b, budget)?;
        if !current.basis().is_empty() && next == current {
            for g in current.basis() {
                if !ev.annihilates(g)? {
                    return Err(Error::RelationViolated("annihilator generator does not annihilate".into()));
                }
            }
            return Ok(Annihilator {
                basis: current,
                bound: b,
                bounds_tried: tried,
            });
        }
        current = next;
        b = next_b;
    }
}

/// Companion connection of `D/DL` on the basis `1, ∂, .., ∂^(d-1)`, for
/// `L` of order `d` in one variable whose leading coefficient is a
/// nonzero constant.
pub fn cyclic_connection(l: &WeylElement<PrimeField>) -> Result<Connection<PrimeField>> {
    if l.nvars() != 1 {
        return Err(Error::Invalid("cyclic modules are implemented for n = 1".into()));
    }
    let coeffs = l.d_coefficients();
    let d = coeffs.len() - 1;
    let lead = &coeffs[d];
    if d == 0 || !lead.is_constant() || lead.is_zero() {
        return Err(Error::NotMonic(format!(
            "{} has leading coefficient {} in d1",
            l,
            lead.to_string_with(&crate::algebra::var_names("x", 1))
        )));
    }
    let field = *l.ring();
    let inv = field.inv(&lead.constant_term()).unwrap();
    let zero = MultiPoly::zero(field, 1);
    let mut theta = vec![vec![zero.clone(); d]; d];
    for j in 0..d - 1 {
        theta[j + 1][j] = MultiPoly::one(field, 1);
    }
    for (k, c) in coeffs.iter().take(d).enumerate() {
        theta[k][d - 1] = -&c.scale(&inv);
    }
    Connection::polynomial(1, vec![theta])
}

pub fn cyclic_annihilator(l: &WeylElement<PrimeField>, budget: &Budget) -> Result<Annihilator> {
    let c = cyclic_connection(l)?;
    let ev = CenterEvaluation::of_connection(&c)?;
    annihilator_in_center(&ev, default_start_bound(&c), budget)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::algebra::parse::parse_poly_in;
    use crate::connection::exponential_module;
    use crate::groebner::{ideal_equal, intersect};
    use crate::weyl::parse_weyl_mod_p;

    pub(crate) fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    pub(crate) fn center_ideal(p: u64, n: usize, gens: &[&str]) -> Ideal<PrimeField> {
        let f = fp(p);
        let names = center_names(n);
        Ideal::new(
            f,
            2 * n,
            gens.iter()
                .map(|g| parse_poly_in(g, &names, f, &|q| f.from_rational(q)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn poly(s: &str, f: PrimeField, n: usize) -> MultiPoly<PrimeField> {
        parse_poly_in(s, &crate::algebra::var_names("x", n), f, &|q| f.from_rational(q)).unwrap()
    }

    fn ann(c: &Connection<PrimeField>) -> Annihilator {
        let ev = CenterEvaluation::of_connection(c).unwrap();
        annihilator_in_center(&ev, default_start_bound(c), &Budget::default()).unwrap()
    }

    fn same(a: &Annihilator, b: &Ideal<PrimeField>) -> bool {
        ideal_equal(&a.ideal(), b, &Budget::default()).unwrap()
    }

    #[test]
    fn annihilator_examples() {
        let c = exponential_module(&poly("2*x1^3", fp(5), 1)).unwrap();
        assert!(same(&ann(&c), &center_ideal(5, 1, &["s1 - X1^2"])));
        let t = Connection::trivial(fp(5), 2, 1);
        assert!(same(&ann(&t), &center_ideal(5, 2, &["s1", "s2"])));
        let airy = cyclic_connection(&parse_weyl_mod_p("d1^2 - x1", fp(5), 1).unwrap()).unwrap();
        let a = ann(&airy);
        assert!(same(&a, &center_ideal(5, 1, &["s1^2 - X1"])));
        assert_eq!(a.to_strings(), vec!["s1^2 + 4*X1"]);
    }

    #[test]
    fn cyclic_examples() {
        let b = Budget::default();
        let l = |s: &str, p: u64| parse_weyl_mod_p(s, fp(p), 1).unwrap();
        assert!(same(&cyclic_annihilator(&l("d1^2 - x1", 5), &b).unwrap(), &center_ideal(5, 1, &["s1^2 - X1"])));
        assert!(same(&cyclic_annihilator(&l("d1 - x1^2", 5), &b).unwrap(), &center_ideal(5, 1, &["s1 - X1^2"])));
        assert!(same(&cyclic_annihilator(&l("d1", 7), &b).unwrap(), &center_ideal(7, 1, &["s1"])));
        assert!(matches!(cyclic_annihilator(&l("x1*d1 - 1", 7), &b), Err(Error::NotMonic(_))));
        assert!(matches!(cyclic_annihilator(&l("x1", 7), &b), Err(Error::NotMonic(_))));
    }

    #[test]
    fn airy_at_three_is_anomalous() {
        let b = Budget::default();
        let a = cyclic_annihilator(&parse_weyl_mod_p("d1^2 - x1", fp(3), 1).unwrap(), &b).unwrap();
        assert!(same(&a, &center_ideal(3, 1, &["s1^2 - X1 - 1"])));
    }

    #[test]
    fn localized_annihilator_is_saturated() {
        // Θ = 1/(2x) on rank 1: Ψ = ((1/2)^5 - 1/2)/x^5 = 0 mod 5? (1/2)^5 = 1/2, so Ψ = 0
        let f = fp(5);
        let x = poly("x1", f, 1);
        let e = LocalizedPoly::new(poly("3", f, 1), x.clone(), 1);
        let c = Connection::new(1, 1, &x, vec![vec![vec![e]]]).unwrap();
        assert!(same(&ann(&c), &center_ideal(5, 1, &["s1"])));
        // Θ = 1/x^2: Ψ = g^p + g^(p-1) with g = x^-2
        let e = LocalizedPoly::new(poly("1", f, 1), x.clone(), 2);
        let c = Connection::new(1, 1, &x, vec![vec![vec![e]]]).unwrap();
        let a = ann(&c);
        let ev = CenterEvaluation::of_connection(&c).unwrap();
        for g in a.basis.basis() {
            assert!(ev.annihilates(g).unwrap());
        }
        assert_eq!(crate::groebner::dimension_of_basis(&a.basis), 1);
    }

    #[test]
    fn direct_sum_is_intersection() {
        let f = fp(5);
        let a = exponential_module(&poly("x1^2", f, 1)).unwrap();
        let b = exponential_module(&poly("x1^3 + x1", f, 1)).unwrap();
        let s = a.direct_sum(&b).unwrap();
        let inter = intersect(&ann(&a).ideal(), &ann(&b).ideal(), &Budget::default()).unwrap();
        assert!(same(&ann(&s), &inter));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]

        #[test]
        fn exponential_cycles_are_lagrangian(coeffs in proptest::collection::vec(0u64..5, 1..4)) {
            let f = fp(5);
            let terms = coeffs.iter().enumerate().map(|(i, c)| (Monomial::from_exps(&[i as u16 + 1]), *c));
            let g = MultiPoly::from_terms(f, 1, terms);
            let c = exponential_module(&g).unwrap();
            let cyc = crate::psupport::p_cycle_of_connection(&c, &Budget::default()).unwrap();
            proptest::prop_assert_eq!(cyc.mass(), num_rational::Rational64::from_integer(1));
            proptest::prop_assert_eq!(cyc.components.len(), 1);
            let ev = CenterEvaluation::of_connection(&c).unwrap();
            for g in &cyc.annihilator {
                proptest::prop_assert!(ev.annihilates(g).unwrap());
            }
            let rep = is_lagrangian_candidate(&cyc.components[0].basis.to_ideal(), &Budget::default()).unwrap();
            proptest::prop_assert!(rep.is_candidate());
        }
    }
}
