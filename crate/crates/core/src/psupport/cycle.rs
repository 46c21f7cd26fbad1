//! Components of the p-support and their multiplicities.

use num_rational::Rational64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{annihilator_in_center, cyclic_connection, default_start_bound, Annihilator, CenterEvaluation};
use crate::algebra::univariate::UniPoly;
use crate::algebra::{center_names, linalg, Field, MonomialOrder, MultiPoly, PrimeField, Ring};
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::groebner::{buchberger, eliminate, Budget, GroebnerBasis, Ideal};
use crate::weyl::WeylElement;

/// Seed for sample points when the point set is too large to scan.
pub const SAMPLE_SEED: u64 = 0x5a3b_1e00;
/// Number of fiber points tried.
pub const MAX_SAMPLES: usize = 64;

/// One irreducible piece of the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub basis: GroebnerBasis<PrimeField>,
    pub multiplicity: Rational64,
    /// Number of geometric points over a generic `X`.
    pub degree: u64,
}

impl Component {
    pub fn to_strings(&self) -> Vec<String> {
        let names = center_names(self.basis.nvars() / 2);
        self.basis.basis().iter().map(|g| g.to_string_with(&names)).collect()
    }
}

/// The fiber used to read off multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleInfo {
    pub point: Vec<u64>,
    pub points_tried: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleEntry {
    pub ideal: Vec<String>,
    pub multiplicity: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PCycle {
    pub n: usize,
    pub rank: usize,
    pub components: Vec<Component>,
    /// Generators of the annihilator (after any Fourier transport).
    pub annihilator: Vec<MultiPoly<PrimeField>>,
    pub bound: u32,
    /// Univariate eliminants met while splitting: variable index and the
    /// irreducible factors.
    pub eliminants: Vec<(usize, Vec<String>)>,
    pub sample: SampleInfo,
    pub via_fourier: bool,
}

impl PCycle {
    pub fn entries(&self) -> Vec<CycleEntry> {
        self.components
            .iter()
            .map(|c| CycleEntry {
                ideal: c.to_strings(),
                multiplicity: c.multiplicity.to_string(),
            })
            .collect()
    }

    pub fn annihilator_strings(&self) -> Vec<String> {
        let names = center_names(self.n);
        self.annihilator.iter().map(|g| g.to_string_with(&names)).collect()
    }

    /// `sum_C m_C deg C`.
    pub fn mass(&self) -> Rational64 {
        self.components
            .iter()
            .map(|c| c.multiplicity * Rational64::from_integer(c.degree as i64))
            .sum()
    }
}

fn split(
    ideal: &Ideal<PrimeField>,
    budget: &Budget,
    report: &mut Vec<(usize, Vec<String>)>,
) -> Result<Vec<GroebnerBasis<PrimeField>>> {
    let gb = buchberger(ideal, MonomialOrder::GrevLex, budget)?;
    if gb.is_unit() {
        return Ok(vec![]);
    }
    let nv = ideal.nvars();
    let names = center_names(nv / 2);
    for v in 0..nv {
        let el = eliminate(&gb.to_ideal(), &[v], budget)?;
        let Some(g) = el.generators().iter().find(|g| !g.is_zero()) else {
            continue;
        };
        let u = UniPoly::from_multi(g, v).expect("eliminant is univariate");
        let factors = u.factor();
        if factors.len() == 1 && factors[0].1 == 1 {
            continue;
        }
        report.push((
            v,
            factors.iter().map(|(f, _)| f.to_multi(nv, v).to_string_with(&names)).collect(),
        ));
        let mut out = Vec::new();
        for (f, _) in factors {
            for c in split(&gb.to_ideal().with_generator(f.to_multi(nv, v))?, budget, report)? {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        return Ok(out);
    }
    Ok(vec![gb])
}

/// Fiber of a center ideal over `X = a`, as an ideal in `X, s`.
pub(crate) fn fiber(basis: &GroebnerBasis<PrimeField>, a: &[u64]) -> Result<Ideal<PrimeField>> {
    let f = *basis.ring();
    let nv = basis.nvars();
    let mut gens = basis.basis().to_vec();
    for (i, ai) in a.iter().enumerate() {
        gens.push(&MultiPoly::var(f, nv, i) - &MultiPoly::constant(f, nv, *ai));
    }
    Ideal::new(f, nv, gens)
}

/// Number of geometric points of a zero-dimensional ideal.
pub(crate) fn point_count(ideal: &Ideal<PrimeField>, budget: &Budget) -> Result<u64> {
    let nv = ideal.nvars();
    let mut rad = ideal.clone();
    for v in 0..nv {
        let el = eliminate(ideal, &[v], budget)?;
        if let Some(g) = el.generators().iter().find(|g| !g.is_zero()) {
            let u = UniPoly::from_multi(g, v).expect("eliminant is univariate");
            rad = rad.with_generator(u.squarefree_part().to_multi(nv, v))?;
        }
    }
    let gb = buchberger(&rad, MonomialOrder::GrevLex, budget)?;
    gb.quotient_dimension()
        .ok_or_else(|| Error::SampleDegenerate("fiber is not finite".into()))
}

/// `Ψ_i` at the point `x = a`.
fn psi_at(ev: &CenterEvaluation, a: &[u64]) -> Option<Vec<Vec<Vec<u64>>>> {
    let f = ev.field();
    let dinv = f.inv(&ev.denominator().eval(a))?;
    Some(
        ev.psi()
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| f.mul(&e.numerator().eval(a), &f.pow(&dinv, e.power() as u64)))
                            .collect()
                    })
                    .collect()
            })
            .collect(),
    )
}

/// `g(a, Ψ(a))` for `g` in the center ring.
fn eval_center(f: &PrimeField, g: &MultiPoly<PrimeField>, a: &[u64], psi: &[Vec<Vec<u64>>]) -> Vec<Vec<u64>> {
    let n = a.len();
    let r = psi[0].len();
    let mut acc = linalg::zeros(f, r, r);
    for (m, c) in g.terms() {
        let e = m.exps();
        let mut coeff = *c;
        for i in 0..n {
            coeff = f.mul(&coeff, &f.pow(&a[i], e[i] as u64));
        }
        let mut t = linalg::identity(f, r);
        for i in 0..n {
            t = linalg::mat_mul(f, &t, &linalg::mat_pow(f, &psi[i], e[n + i] as u64));
        }
        acc = linalg::mat_add(f, &acc, &linalg::mat_scale(f, &t, &coeff));
    }
    acc
}

pub(crate) fn sample_points(p: u64, n: usize) -> Vec<Vec<u64>> {
    let total = p.checked_pow(n as u32).unwrap_or(u64::MAX);
    if total <= MAX_SAMPLES as u64 {
        (0..total)
            .map(|mut k| {
                (0..n)
                    .map(|_| {
                        let d = k % p;
                        k /= p;
                        d
                    })
                    .collect()
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        (0..MAX_SAMPLES).map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect()).collect()
    }
}

fn cycle_from_annihilator(ev: &CenterEvaluation, ann: &Annihilator, budget: &Budget) -> Result<PCycle> {
    let f = ev.field();
    let n = ev.nvars();
    let mut eliminants = Vec::new();
    let mut comps = split(&ann.ideal(), budget, &mut eliminants)?;
    comps.sort_by_key(|c| {
        let names = center_names(n);
        c.basis().iter().map(|g| g.to_string_with(&names)).collect::<Vec<_>>()
    });

    // fiber point counts at every admissible sample
    let mut rows = Vec::new();
    let points = sample_points(f.p(), n);
    for a in &points {
        let Some(psi) = psi_at(ev, a) else { continue };
        let mut counts = Vec::with_capacity(comps.len());
        let mut fibers = Vec::with_capacity(comps.len());
        for c in &comps {
            let fib = fiber(c, a)?;
            counts.push(point_count(&fib, budget)?);
            fibers.push(fib);
        }
        rows.push((a.clone(), psi, counts, fibers));
    }
    let maxima: Vec<u64> = (0..comps.len())
        .map(|j| rows.iter().map(|r| r.2[j]).max().unwrap_or(0))
        .collect();
    let mut chosen = None;
    'rows: for row in &rows {
        if row.2 != maxima {
            continue;
        }
        for i in 0..comps.len() {
            for j in i + 1..comps.len() {
                let both = row.3[i].sum(&row.3[j])?;
                if !buchberger(&both, MonomialOrder::GrevLex, budget)?.is_unit() {
                    continue 'rows;
                }
            }
        }
        chosen = Some(row);
        break;
    }
    let Some((a, psi, counts, _)) = chosen else {
        return Err(Error::SampleDegenerate(format!(
            "no sample point among {} separates the fibers of the components",
            rows.len()
        )));
    };

    let r = ev.rank();
    let mut components = Vec::with_capacity(comps.len());
    for (c, &count) in comps.into_iter().zip(counts.iter()) {
        let mut stacked = Vec::new();
        for g in c.basis() {
            let m = eval_center(&f, g, a, psi);
            stacked.extend(linalg::mat_pow(&f, &m, r as u64));
        }
        let dim = if stacked.is_empty() { r } else { linalg::kernel(&f, &stacked, r).len() };
        if count == 0 {
            return Err(Error::SampleDegenerate("component has an empty fiber".into()));
        }
        components.push(Component {
            basis: c,
            multiplicity: Rational64::new(dim as i64, count as i64),
            degree: count,
        });
    }
    let cycle = PCycle {
        n,
        rank: r,
        components,
        annihilator: ann.basis.basis().to_vec(),
        bound: ann.bound,
        eliminants,
        sample: SampleInfo {
            point: a.clone(),
            points_tried: points.len(),
        },
        via_fourier: false,
    };
    if cycle.mass() != Rational64::from_integer(r as i64) {
        return Err(Error::RelationViolated(format!(
            "sum of multiplicity times degree is {} but the rank is {r}",
            cycle.mass()
        )));
    }
    Ok(cycle)
}

pub fn p_cycle_of_connection(c: &Connection<PrimeField>, budget: &Budget) -> Result<PCycle> {
    let ev = CenterEvaluation::of_connection(c)?;
    let ann = annihilator_in_center(&ev, default_start_bound(c), budget)?;
    cycle_from_annihilator(&ev, &ann, budget)
}

/// Carries a cycle along `(X, s) ↦ (s, -X)`: a relation `P(X, s)` becomes
/// `P(s, -X)`.
pub fn transform_cycle(cycle: &PCycle, budget: &Budget) -> Result<PCycle> {
    let n = cycle.n;
    let nv = 2 * n;
    let Some(first) = cycle.components.first() else {
        return Ok(cycle.clone());
    };
    let f = *first.basis.ring();
    let images: Vec<MultiPoly<PrimeField>> = (0..n)
        .map(|i| MultiPoly::var(f, nv, n + i))
        .chain((0..n).map(|i| -MultiPoly::var(f, nv, i)))
        .collect();
    let map = |gens: &[MultiPoly<PrimeField>]| -> Result<Vec<MultiPoly<PrimeField>>> {
        gens.iter().map(|g| g.substitute(&images)).collect()
    };
    let mut components = Vec::with_capacity(cycle.components.len());
    for c in &cycle.components {
        let ideal = Ideal::new(f, nv, map(c.basis.basis())?)?;
        components.push(Component {
            basis: buchberger(&ideal, MonomialOrder::GrevLex, budget)?,
            multiplicity: c.multiplicity,
            degree: c.degree,
        });
    }
    let ann = buchberger(&Ideal::new(f, nv, map(&cycle.annihilator)?)?, MonomialOrder::GrevLex, budget)?;
    Ok(PCycle {
        components,
        annihilator: ann.basis().to_vec(),
        via_fourier: !cycle.via_fourier,
        ..cycle.clone()
    })
}

/// p-cycle of `D/DL` in one variable. When `L` is not monic in `∂` the
/// Fourier partner `σ^{-1}(L)` is tried and its cycle transported back.
pub fn p_cycle(l: &WeylElement<PrimeField>, budget: &Budget) -> Result<PCycle> {
    match cyclic_connection(l) {
        Ok(c) => p_cycle_of_connection(&c, budget),
        Err(Error::NotMonic(msg)) => {
            let partner = l.fourier_inverse()?;
            match cyclic_connection(&partner) {
                Ok(c) => transform_cycle(&p_cycle_of_connection(&c, budget)?, budget),
                Err(Error::NotMonic(_)) => Err(Error::NotMonic(msg)),
                Err(e) => Err(e),
            }
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{center_ideal, fp};
    use super::*;
    use crate::algebra::parse::parse_poly_in;
    use crate::algebra::var_names;
    use crate::connection::exponential_module;
    use crate::groebner::ideal_equal;
    use crate::weyl::parse_weyl_mod_p;

    fn cyc(l: &str, p: u64) -> PCycle {
        p_cycle(&parse_weyl_mod_p(l, fp(p), 1).unwrap(), &Budget::default()).unwrap()
    }

    fn is(c: &Component, p: u64, n: usize, gens: &[&str]) -> bool {
        ideal_equal(&c.basis.to_ideal(), &center_ideal(p, n, gens), &Budget::default()).unwrap()
    }

    #[test]
    fn basic_cycles() {
        let c = cyc("d1", 5);
        assert!(is(&c.components[0], 5, 1, &["s1"]));
        assert_eq!(c.entries()[0].multiplicity, "1");
        for p in [3, 5, 7] {
            let c = cyc("d1^2", p);
            assert_eq!(c.components.len(), 1);
            assert!(is(&c.components[0], p, 1, &["s1"]));
            assert_eq!(c.components[0].multiplicity, Rational64::from_integer(2));
        }
        let f = fp(5);
        let g = parse_poly_in("x1^3/3", &var_names("x", 1), f, &|q| f.from_rational(q)).unwrap();
        let c = p_cycle_of_connection(&exponential_module(&g).unwrap(), &Budget::default()).unwrap();
        assert_eq!(c.entries(), vec![CycleEntry { ideal: vec!["X1^2 + 4*s1".into()], multiplicity: "1".into() }]);
    }

    #[test]
    fn airy_cycle() {
        for p in [5, 7, 11] {
            let c = cyc("d1^2 - x1", p);
            assert_eq!(c.components.len(), 1);
            assert!(is(&c.components[0], p, 1, &["s1^2 - X1"]));
            assert_eq!(c.components[0].multiplicity, Rational64::from_integer(1));
            assert_eq!(c.components[0].degree, 2);
            assert!(!c.via_fourier);
        }
    }

    #[test]
    fn fourier_fallback() {
        let c = cyc("x1", 5);
        assert!(c.via_fourier);
        assert!(is(&c.components[0], 5, 1, &["X1"]));
        // a delta module at x = ±1
        let c = cyc("x1^2 - 1", 5);
        assert!(c.via_fourier);
        assert_eq!(c.components.len(), 2);
        assert!(c.components.iter().any(|k| is(k, 5, 1, &["X1 - 1"])));
        assert!(c.components.iter().any(|k| is(k, 5, 1, &["X1 + 1"])));
        assert_eq!(c.mass(), Rational64::from_integer(2));
        // σ(d1^2 - x1) = x1^2 - d1 is monic, so no transport is needed
        let c = cyc("x1^2 - d1", 5);
        assert!(!c.via_fourier);
        let airy = cyc("d1^2 - x1", 5);
        let moved = transform_cycle(&airy, &Budget::default()).unwrap();
        assert!(moved.via_fourier);
        assert!(is(&c.components[0], 5, 1, &[&moved.components[0].to_strings()[0]]));
        assert!(matches!(
            p_cycle(&parse_weyl_mod_p("x1*d1 - 1", fp(5), 1).unwrap(), &Budget::default()),
            Err(Error::NotMonic(_))
        ));
    }

    #[test]
    fn reducible_support_splits() {
        let f = fp(5);
        let names = var_names("x", 1);
        let g = |s: &str| parse_poly_in(s, &names, f, &|q| f.from_rational(q)).unwrap();
        // Ψ = diag(1, 2)
        let a = exponential_module(&g("x1")).unwrap();
        let b = exponential_module(&g("2*x1")).unwrap();
        let c = p_cycle_of_connection(&a.direct_sum(&b).unwrap(), &Budget::default()).unwrap();
        assert_eq!(c.components.len(), 2);
        assert!(c.components.iter().any(|k| is(k, 5, 1, &["s1 - 1"])));
        assert!(c.components.iter().any(|k| is(k, 5, 1, &["s1 - 2"])));
        assert!(c.components.iter().all(|k| k.multiplicity == Rational64::from_integer(1)));
        assert_eq!(c.eliminants.len(), 1);
        let entries = c.entries();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].multiplicity, "1");

        // Ψ = diag(1, 1)
        let c = p_cycle_of_connection(&a.direct_sum(&a).unwrap(), &Budget::default()).unwrap();
        assert_eq!(c.components.len(), 1);
        assert_eq!(c.components[0].multiplicity, Rational64::from_integer(2));
    }

    #[test]
    fn nilpotent_multiplicity() {
        // Θ = [[0,1],[0,0]]: Ψ = 0 at p >= 3, support (s) with multiplicity 2
        let f = fp(7);
        let z = MultiPoly::zero(f, 1);
        let o = MultiPoly::one(f, 1);
        let c = Connection::polynomial(1, vec![vec![vec![z.clone(), o], vec![z.clone(), z]]]).unwrap();
        let cyc = p_cycle_of_connection(&c, &Budget::default()).unwrap();
        assert_eq!(cyc.components.len(), 1);
        assert_eq!(cyc.components[0].multiplicity, Rational64::from_integer(2));
        assert_eq!(cyc.mass(), Rational64::from_integer(2));
    }

    #[test]
    fn plane_exponential() {
        let f = fp(5);
        let names = var_names("x", 2);
        let g = parse_poly_in("x1*x2", &names, f, &|q| f.from_rational(q)).unwrap();
        let c = p_cycle_of_connection(&exponential_module(&g).unwrap(), &Budget::default()).unwrap();
        assert_eq!(c.components.len(), 1);
        assert!(is(&c.components[0], 5, 2, &["s1 - X2", "s2 - X1"]));
        assert_eq!(c.components[0].multiplicity, Rational64::from_integer(1));
    }
}
