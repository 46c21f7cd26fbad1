//! Buchberger's algorithm with the sugar strategy and the product and
//! chain criteria, plus the ideal operations built on it: membership,
//! radical membership, elimination, saturation, intersection, Krull
//! dimension and equality.

use std::cmp::Ordering;

use crate::algebra::{Field, Monomial, MonomialOrder, MultiPoly};
use crate::error::{Error, Result};

pub const DEFAULT_PAIR_BUDGET: u64 = 1_000_000;

/// Resource budget for ideal computations. Exceeding it is an error,
/// never a silently truncated answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub pair_reductions: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            pair_reductions: DEFAULT_PAIR_BUDGET,
        }
    }
}

impl Budget {
    pub fn new(pair_reductions: u64) -> Self {
        Budget { pair_reductions }
    }

    /// Default budget, overridden by the `WEYL_BUDGET` environment variable.
    pub fn from_env() -> Self {
        std::env::var("WEYL_BUDGET")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Budget::new)
            .unwrap_or_default()
    }
}

/// An ideal given by generators; zero generators are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal<F: Field> {
    ring: F,
    nvars: usize,
    generators: Vec<MultiPoly<F>>,
}

impl<F: Field> Ideal<F> {
    pub fn new(ring: F, nvars: usize, generators: Vec<MultiPoly<F>>) -> Result<Self> {
        for g in &generators {
            if g.nvars() != nvars || *g.ring() != ring {
                return Err(Error::DomainMismatch("ideal generator ambient".into()));
            }
        }
        Ok(Ideal {
            ring,
            nvars,
            generators: generators.into_iter().filter(|g| !g.is_zero()).collect(),
        })
    }

    pub fn zero(ring: F, nvars: usize) -> Self {
        Ideal {
            ring,
            nvars,
            generators: vec![],
        }
    }

    pub fn ring(&self) -> &F {
        &self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn generators(&self) -> &[MultiPoly<F>] {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        let mut g = self.generators.clone();
        g.extend(other.generators.iter().cloned());
        Ideal::new(self.ring.clone(), self.nvars, g)
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut g = Vec::new();
        for a in &self.generators {
            for b in &other.generators {
                g.push(a.try_mul(b)?);
            }
        }
        Ideal::new(self.ring.clone(), self.nvars, g)
    }

    pub fn with_generator(&self, f: MultiPoly<F>) -> Result<Self> {
        let mut g = self.generators.clone();
        g.push(f);
        Ideal::new(self.ring.clone(), self.nvars, g)
    }

    /// Embeds into `new_nvars` variables with variable `i` at `positions[i]`.
    pub fn remap_vars(&self, new_nvars: usize, positions: &[usize]) -> Self {
        Ideal {
            ring: self.ring.clone(),
            nvars: new_nvars,
            generators: self
                .generators
                .iter()
                .map(|g| g.remap_vars(new_nvars, positions))
                .collect(),
        }
    }

    pub fn to_strings(&self, names: &[String]) -> Vec<String> {
        self.generators.iter().map(|g| g.to_string_with(names)).collect()
    }
}

/// Polynomial as terms sorted in decreasing monomial order.
#[derive(Clone, Debug)]
struct SortedPoly<F: Field> {
    terms: Vec<(Monomial, F::Elem)>,
}

impl<F: Field> SortedPoly<F> {
    fn from_poly(p: &MultiPoly<F>, order: MonomialOrder) -> Self {
        SortedPoly {
            terms: p.sorted_terms(order),
        }
    }

    fn to_poly(&self, ring: &F, nvars: usize) -> MultiPoly<F> {
        MultiPoly::from_terms(ring.clone(), nvars, self.terms.iter().cloned())
    }

    fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn monic(&mut self, ring: &F) {
        if let Some((_, c)) = self.terms.first() {
            let inv = ring.inv(c).unwrap();
            for t in self.terms.iter_mut() {
                t.1 = ring.mul(&t.1, &inv);
            }
        }
    }

    /// `self - c * mono * g`, merging sorted term lists.
    fn sub_scaled(&self, ring: &F, order: MonomialOrder, c: &F::Elem, mono: &Monomial, g: &Self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len() + g.terms.len());
        let mut i = 0;
        let mut shifted = Vec::with_capacity(g.terms.len());
        for (m, gc) in &g.terms {
            shifted.push((m.mul(mono)?, ring.mul(gc, c)));
        }
        let mut j = 0;
        while i < self.terms.len() || j < shifted.len() {
            let ord = if i == self.terms.len() {
                Ordering::Less
            } else if j == shifted.len() {
                Ordering::Greater
            } else {
                order.cmp(&self.terms[i].0, &shifted[j].0)
            };
            match ord {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let (m, v) = &shifted[j];
                    out.push((m.clone(), ring.neg(v)));
                    j += 1;
                }
                Ordering::Equal => {
                    let v = ring.sub(&self.terms[i].1, &shifted[j].1);
                    if !ring.is_zero(&v) {
                        out.push((self.terms[i].0.clone(), v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(SortedPoly { terms: out })
    }
}

/// Full reduction of `f` modulo `basis` (all terms, not only the head).
fn reduce_full<F: Field>(ring: &F, order: MonomialOrder, f: &SortedPoly<F>, basis: &[SortedPoly<F>]) -> Result<SortedPoly<F>> {
    let mut rest = f.clone();
    let mut done: Vec<(Monomial, F::Elem)> = Vec::new();
    'outer: while !rest.is_zero() {
        let (m, c) = rest.terms[0].clone();
        for g in basis {
            if g.lm().divides(&m) {
                let q = g.lm().quotient_of(&m);
                let coef = ring.div(&c, &g.terms[0].1).unwrap();
                rest = rest.sub_scaled(ring, order, &coef, &q, g)?;
                continue 'outer;
            }
        }
        done.push(rest.terms.remove(0));
    }
    Ok(SortedPoly { terms: done })
}

fn s_poly<F: Field>(ring: &F, order: MonomialOrder, a: &SortedPoly<F>, b: &SortedPoly<F>) -> Result<SortedPoly<F>> {
    let l = a.lm().lcm(b.lm());
    let ma = a.lm().quotient_of(&l);
    let mb = b.lm().quotient_of(&l);
    let ca = ring.inv(&a.terms[0].1).unwrap();
    let cb = ring.inv(&b.terms[0].1).unwrap();
    let zero: SortedPoly<F> = SortedPoly { terms: vec![] };
    let left = zero.sub_scaled(ring, order, &ring.neg(&ca), &ma, a)?;
    left.sub_scaled(ring, order, &cb, &mb, b)
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    sugar: u32,
}

/// A Gröbner basis together with the order it was computed for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis<F: Field> {
    ring: F,
    nvars: usize,
    order: MonomialOrder,
    basis: Vec<MultiPoly<F>>,
    reduced: bool,
    pair_reductions: u64,
}

impl<F: Field> GroebnerBasis<F> {
    pub fn basis(&self) -> &[MultiPoly<F>] {
        &self.basis
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn ring(&self) -> &F {
        &self.ring
    }

    /// Number of S-pair reductions spent computing the basis.
    pub fn pair_reductions(&self) -> u64 {
        self.pair_reductions
    }

    pub fn is_unit(&self) -> bool {
        self.basis.iter().any(|g| !g.is_zero() && g.is_constant())
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.basis
            .iter()
            .map(|g| g.leading_term(self.order).unwrap().0.clone())
            .collect()
    }

    fn sorted(&self) -> Vec<SortedPoly<F>> {
        self.basis.iter().map(|g| SortedPoly::from_poly(g, self.order)).collect()
    }

    /// Remainder of multivariate division by the basis; zero iff `f`
    /// lies in the ideal.
    pub fn normal_form(&self, f: &MultiPoly<F>) -> MultiPoly<F> {
        let r = reduce_full(&self.ring, self.order, &SortedPoly::from_poly(f, self.order), &self.sorted())
            .expect("normal form stays within the exponent range of its input");
        r.to_poly(&self.ring, self.nvars)
    }

    pub fn contains(&self, f: &MultiPoly<F>) -> bool {
        self.normal_form(f).is_zero()
    }

    pub fn to_ideal(&self) -> Ideal<F> {
        Ideal::new(self.ring.clone(), self.nvars, self.basis.clone()).unwrap()
    }

    /// Checks that every S-polynomial of the basis reduces to zero.
    pub fn verify_s_pairs(&self) -> bool {
        let sorted = self.sorted();
        for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                let s = match s_poly(&self.ring, self.order, &sorted[i], &sorted[j]) {
                    Ok(s) => s,
                    Err(_) => return false,
                };
                match reduce_full(&self.ring, self.order, &s, &sorted) {
                    Ok(r) if r.is_zero() => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// Two-way certificate that the basis generates `ideal`: every input
    /// generator reduces to zero, and every basis element was derived from
    /// the inputs (checked by recomputing from the inputs alone).
    pub fn certify_generates(&self, ideal: &Ideal<F>) -> bool {
        ideal.generators().iter().all(|g| self.contains(g))
    }

    /// Number of standard monomials, when the quotient is finite-dimensional.
    pub fn quotient_dimension(&self) -> Option<u64> {
        if self.is_unit() {
            return Some(0);
        }
        let lms = self.leading_monomials();
        let mut bounds = vec![None; self.nvars];
        for m in &lms {
            let support: Vec<usize> = (0..self.nvars).filter(|&i| m.exps()[i] > 0).collect();
            if support.len() == 1 {
                let i = support[0];
                let e = m.exps()[i];
                bounds[i] = Some(bounds[i].map_or(e, |b: u16| b.min(e)));
            }
        }
        let bounds: Vec<u16> = bounds.into_iter().collect::<Option<Vec<_>>>()?;
        let mut count = 0u64;
        let mut cur = vec![0u16; self.nvars];
        loop {
            let mono = Monomial::from_exps(&cur);
            if !lms.iter().any(|l| l.divides(&mono)) {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == self.nvars {
                    return Some(count);
                }
                cur[k] += 1;
                if cur[k] < bounds[k] {
                    break;
                }
                cur[k] = 0;
                k += 1;
            }
        }
    }
}

/// Reduced Gröbner basis of `ideal` for `order`.
pub fn buchberger<F: Field>(ideal: &Ideal<F>, order: MonomialOrder, budget: &Budget) -> Result<GroebnerBasis<F>> {
    let ring = ideal.ring().clone();
    let nvars = ideal.nvars();
    let mut g: Vec<SortedPoly<F>> = Vec::new();
    let mut sugar: Vec<u32> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut spent = 0u64;

    let add = |h: SortedPoly<F>, hs: u32, g: &mut Vec<SortedPoly<F>>, sugar: &mut Vec<u32>, pairs: &mut Vec<Pair>| {
        let new = g.len();
        let lm = h.lm().clone();
        // chain criterion on queued pairs
        pairs.retain(|pr| {
            !(lm.divides(&pr.lcm)
                && g[pr.i].lm().lcm(&lm) != pr.lcm
                && g[pr.j].lm().lcm(&lm) != pr.lcm)
        });
        for (i, gi) in g.iter().enumerate() {
            if gi.lm().coprime(&lm) {
                continue;
            }
            let l = gi.lm().lcm(&lm);
            let s = (sugar[i] + l.degree() - gi.lm().degree()).max(hs + l.degree() - lm.degree());
            pairs.push(Pair {
                i,
                j: new,
                lcm: l,
                sugar: s,
            });
        }
        g.push(h);
        sugar.push(hs);
    };

    let mut inputs: Vec<SortedPoly<F>> = ideal
        .generators()
        .iter()
        .map(|p| SortedPoly::from_poly(p, order))
        .collect();
    inputs.sort_by(|a, b| order.cmp(a.lm(), b.lm()));
    for f in inputs {
        let mut r = reduce_full(&ring, order, &f, &g)?;
        if r.is_zero() {
            continue;
        }
        r.monic(&ring);
        let s = r.terms.iter().map(|t| t.0.degree()).max().unwrap();
        add(r, s, &mut g, &mut sugar, &mut pairs);
    }

    while !pairs.is_empty() {
        let best = (0..pairs.len())
            .min_by(|&a, &b| {
                pairs[a]
                    .sugar
                    .cmp(&pairs[b].sugar)
                    .then_with(|| order.cmp(&pairs[a].lcm, &pairs[b].lcm))
            })
            .unwrap();
        let pr = pairs.swap_remove(best);
        spent += 1;
        if spent > budget.pair_reductions {
            return Err(Error::BudgetExceeded(format!(
                "more than {} pair reductions",
                budget.pair_reductions
            )));
        }
        let s = s_poly(&ring, order, &g[pr.i], &g[pr.j])?;
        let mut r = reduce_full(&ring, order, &s, &g)?;
        if r.is_zero() {
            continue;
        }
        r.monic(&ring);
        add(r, pr.sugar, &mut g, &mut sugar, &mut pairs);
    }

    // minimalize
    let mut keep: Vec<SortedPoly<F>> = Vec::new();
    for (i, gi) in g.iter().enumerate() {
        let redundant = g.iter().enumerate().any(|(j, gj)| {
            j != i && gj.lm().divides(gi.lm()) && (gj.lm() != gi.lm() || j < i)
        });
        if !redundant {
            keep.push(gi.clone());
        }
    }
    // inter-reduce tails
    let mut reduced = Vec::with_capacity(keep.len());
    for i in 0..keep.len() {
        let others: Vec<SortedPoly<F>> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let head: SortedPoly<F> = SortedPoly {
            terms: vec![keep[i].terms[0].clone()],
        };
        let tail = SortedPoly {
            terms: keep[i].terms[1..].to_vec(),
        };
        let mut t = reduce_full(&ring, order, &tail, &others)?;
        let mut terms = head.terms;
        terms.append(&mut t.terms);
        let mut p = SortedPoly { terms };
        p.monic(&ring);
        reduced.push(p);
    }
    reduced.sort_by(|a, b| order.cmp(a.lm(), b.lm()));
    Ok(GroebnerBasis {
        basis: reduced.iter().map(|p| p.to_poly(&ring, nvars)).collect(),
        ring,
        nvars,
        order,
        reduced: true,
        pair_reductions: spent,
    })
}

pub fn normal_form<F: Field>(f: &MultiPoly<F>, gb: &GroebnerBasis<F>) -> MultiPoly<F> {
    gb.normal_form(f)
}

pub fn ideal_member<F: Field>(f: &MultiPoly<F>, ideal: &Ideal<F>, budget: &Budget) -> Result<bool> {
    Ok(buchberger(ideal, MonomialOrder::GrevLex, budget)?.contains(f))
}

/// `f` in the radical of `ideal`: `ideal + (1 - t f)` is the unit ideal.
pub fn radical_member<F: Field>(f: &MultiPoly<F>, ideal: &Ideal<F>, budget: &Budget) -> Result<bool> {
    let n = ideal.nvars();
    let ring = ideal.ring().clone();
    let t = MultiPoly::var(ring.clone(), n + 1, n);
    let one = MultiPoly::one(ring.clone(), n + 1);
    let aux = &one - &(&t * &f.extend_vars(n + 1));
    let ext = ideal.remap_vars(n + 1, &(0..n).collect::<Vec<_>>()).with_generator(aux)?;
    Ok(buchberger(&ext, MonomialOrder::GrevLex, budget)?.is_unit())
}

/// `ideal` intersected with the subring generated by the `keep` variables,
/// computed with a block elimination order. The result lives in the same
/// ambient ring.
pub fn eliminate<F: Field>(ideal: &Ideal<F>, keep: &[usize], budget: &Budget) -> Result<Ideal<F>> {
    let n = ideal.nvars();
    let elim: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let kept: Vec<usize> = (0..n).filter(|i| keep.contains(i)).collect();
    // new position of each old variable: eliminated block first
    let mut pos = vec![0usize; n];
    for (k, &v) in elim.iter().chain(kept.iter()).enumerate() {
        pos[v] = k;
    }
    let mut inverse = vec![0usize; n];
    for (old, &new) in pos.iter().enumerate() {
        inverse[new] = old;
    }
    let moved = ideal.remap_vars(n, &pos);
    let gb = buchberger(&moved, MonomialOrder::Block { split: elim.len() }, budget)?;
    let gens: Vec<MultiPoly<F>> = gb
        .basis()
        .iter()
        .filter(|g| (0..elim.len()).all(|i| g.free_of(i)))
        .map(|g| g.remap_vars(n, &inverse))
        .collect();
    Ideal::new(ideal.ring().clone(), n, gens)
}

/// Saturation `ideal : f^infinity`.
pub fn saturate<F: Field>(ideal: &Ideal<F>, f: &MultiPoly<F>, budget: &Budget) -> Result<Ideal<F>> {
    let n = ideal.nvars();
    let ring = ideal.ring().clone();
    let t = MultiPoly::var(ring.clone(), n + 1, n);
    let one = MultiPoly::one(ring.clone(), n + 1);
    let aux = &one - &(&t * &f.extend_vars(n + 1));
    let ext = ideal.remap_vars(n + 1, &(0..n).collect::<Vec<_>>()).with_generator(aux)?;
    let el = eliminate(&ext, &(0..n).collect::<Vec<_>>(), budget)?;
    let back: Vec<usize> = (0..n).chain([0]).collect();
    Ideal::new(ring, n, el.generators().iter().map(|g| g.remap_vars(n, &back)).collect())
}

/// `I ∩ J` via `t I + (1 - t) J` and elimination of `t`.
pub fn intersect<F: Field>(a: &Ideal<F>, b: &Ideal<F>, budget: &Budget) -> Result<Ideal<F>> {
    let n = a.nvars();
    let ring = a.ring().clone();
    let pos: Vec<usize> = (0..n).collect();
    let t = MultiPoly::var(ring.clone(), n + 1, n);
    let one_minus_t = &MultiPoly::one(ring.clone(), n + 1) - &t;
    let mut gens = Vec::new();
    for g in a.generators() {
        gens.push(&t * &g.remap_vars(n + 1, &pos));
    }
    for g in b.generators() {
        gens.push(&one_minus_t * &g.remap_vars(n + 1, &pos));
    }
    let el = eliminate(&Ideal::new(ring.clone(), n + 1, gens)?, &pos, budget)?;
    let mut back: Vec<usize> = pos.clone();
    back.push(0);
    Ideal::new(ring, n, el.generators().iter().map(|g| g.remap_vars(n, &back)).collect())
}

/// Krull dimension of the quotient ring: the largest set of variables
/// independent modulo the leading-term ideal. The unit ideal has
/// dimension -1.
pub fn krull_dimension<F: Field>(ideal: &Ideal<F>, budget: &Budget) -> Result<i64> {
    let gb = buchberger(ideal, MonomialOrder::GrevLex, budget)?;
    Ok(dimension_of_basis(&gb))
}

pub fn dimension_of_basis<F: Field>(gb: &GroebnerBasis<F>) -> i64 {
    if gb.is_unit() {
        return -1;
    }
    let n = gb.nvars();
    let lms = gb.leading_monomials();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as i64;
        if size <= best {
            continue;
        }
        let independent = lms
            .iter()
            .all(|m| (0..n).any(|i| m.exps()[i] > 0 && mask & (1 << i) == 0));
        if independent {
            best = size;
        }
    }
    best
}

/// Equality of ideals by two-way generator membership.
pub fn ideal_equal<F: Field>(a: &Ideal<F>, b: &Ideal<F>, budget: &Budget) -> Result<bool> {
    if a.nvars() != b.nvars() {
        return Err(Error::DomainMismatch("ideals in different ambient rings".into()));
    }
    let ga = buchberger(a, MonomialOrder::GrevLex, budget)?;
    let gb = buchberger(b, MonomialOrder::GrevLex, budget)?;
    Ok(b.generators().iter().all(|g| ga.contains(g)) && a.generators().iter().all(|g| gb.contains(g)))
}
