//! Exponential modules, pushforward of connections along finite maps of
//! the line, and the matching pushforward of p-cycles.

use num_rational::Rational64;

use crate::algebra::localized::normalize_denominator;
use crate::algebra::{Field, LocalizedPoly, Monomial, MonomialOrder, MultiPoly, PrimeField};
use crate::connection::{Connection, LMat};
use crate::error::{Error, Result};
use crate::groebner::{buchberger, eliminate, ideal_equal, intersect, Budget, Ideal};
use crate::psupport::{point_count, sample_points, Component, PCycle, SampleInfo};

pub use crate::connection::exponential_module;

/// `z ↦ x = π(z)` on the affine line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCurveMap<F: Field> {
    pi: MultiPoly<F>,
}

impl<F: Field> FiniteCurveMap<F> {
    pub fn new(pi: MultiPoly<F>) -> Result<Self> {
        if pi.nvars() != 1 {
            return Err(Error::DomainMismatch("curve maps are polynomials in one variable".into()));
        }
        match pi.degree_in(0) {
            None | Some(0) => Err(Error::Invalid("curve map must be nonconstant".into())),
            Some(_) => Ok(FiniteCurveMap { pi }),
        }
    }

    pub fn polynomial(&self) -> &MultiPoly<F> {
        &self.pi
    }

    pub fn degree(&self) -> usize {
        self.pi.degree_in(0).unwrap() as usize
    }

    /// `π′(z)`.
    pub fn discriminant(&self) -> MultiPoly<F> {
        self.pi.diff(0).expect("derivative of a one-variable polynomial")
    }

    fn ring(&self) -> F {
        self.pi.ring().clone()
    }

    /// Writes a polynomial in `(z, x)` on the basis `1, z, .., z^(m-1)` of
    /// `F[x][z]/(π(z) - x)`.
    fn reduce(&self, f: &MultiPoly<F>) -> Vec<MultiPoly<F>> {
        let ring = self.ring();
        let m = self.degree();
        let lead = self.pi.coeff(&Monomial::from_exps(&[m as u16]));
        let inv = ring.inv(&lead).expect("leading coefficient is a unit");
        // z^m = (x - lower(z)) / lead
        let mut lower = self.pi.clone();
        lower.add_term(Monomial::from_exps(&[m as u16]), ring.neg(&lead));
        let rel = (&MultiPoly::var(ring.clone(), 2, 1) - &lower.remap_vars(2, &[0])).scale(&inv);
        let mut f = f.clone();
        loop {
            let top = f
                .terms()
                .filter(|(mono, _)| mono.exps()[0] as usize >= m)
                .max_by_key(|(mono, _)| mono.exps()[0])
                .map(|(mono, c)| (mono.clone(), c.clone()));
            let Some((mono, c)) = top else { break };
            let e = mono.exps();
            let rest = Monomial::from_exps(&[e[0] - m as u16, e[1]]);
            let mut head = MultiPoly::zero(ring.clone(), 2);
            head.add_term(mono.clone(), c.clone());
            f = &(&f - &head) + &rel.mul_term(&rest, &c).expect("exponent in range");
        }
        let mut out = vec![MultiPoly::zero(ring.clone(), 1); m];
        for (mono, c) in f.terms() {
            out[mono.exps()[0] as usize].add_term(Monomial::from_exps(&[mono.exps()[1]]), c.clone());
        }
        out
    }

    /// Multiplication by `g(z, x)` on the basis `z^j`.
    fn multiplication_matrix(&self, g: &MultiPoly<F>) -> Vec<Vec<MultiPoly<F>>> {
        let m = self.degree();
        let ring = self.ring();
        let mut mat = vec![vec![MultiPoly::zero(ring.clone(), 1); m]; m];
        for j in 0..m {
            let col = self.reduce(&g.mul_term(&Monomial::from_exps(&[j as u16, 0]), &ring.one()).unwrap());
            for (i, v) in col.into_iter().enumerate() {
                mat[i][j] = v;
            }
        }
        mat
    }

    /// `1/π′(z)` as `(u, d)` with `u ∈ F[x]^m` on the basis `z^j` and `d`
    /// the monic denominator in `x`.
    pub fn inverse_discriminant(&self) -> Result<(Vec<MultiPoly<F>>, MultiPoly<F>)> {
        let mat = self.multiplication_matrix(&self.discriminant().remap_vars(2, &[0]));
        let det = determinant(&mat);
        if det.is_zero() {
            return Err(Error::Invalid("π′ is a zero divisor: the map is inseparable".into()));
        }
        let den = normalize_denominator(&det)?;
        let ring = self.ring();
        let scale = ring.inv(&det.exact_div(&den).expect("normalized divides").constant_term()).unwrap();
        let m = self.degree();
        let u = (0..m)
            .map(|j| {
                let minor = if m == 1 {
                    MultiPoly::one(ring.clone(), 1)
                } else {
                    determinant(&minor_matrix(&mat, 0, j))
                };
                let minor = if j % 2 == 1 { -minor } else { minor };
                minor.scale(&scale)
            })
            .collect();
        Ok((u, den))
    }
}

fn minor_matrix<F: Field>(m: &[Vec<MultiPoly<F>>], row: usize, col: usize) -> Vec<Vec<MultiPoly<F>>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| v.clone()).collect())
        .collect()
}

fn determinant<F: Field>(m: &[Vec<MultiPoly<F>>]) -> MultiPoly<F> {
    match m.len() {
        0 => unreachable!("empty matrix"),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = MultiPoly::zero(m[0][0].ring().clone(), m[0][0].nvars());
            for j in 0..m.len() {
                if m[0][j].is_zero() {
                    continue;
                }
                let t = &m[0][j] * &determinant(&minor_matrix(m, 0, j));
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

/// Pushforward of a polynomial connection on the `z`-line along `π`, on the
/// basis `z^j ⊗ e_k` (index `j·r + k`), over the target localized at the
/// norm of `π′`.
pub fn finite_pushforward_curve<F: Field>(c: &Connection<F>, map: &FiniteCurveMap<F>) -> Result<Connection<F>> {
    if c.nvars() != 1 {
        return Err(Error::DomainMismatch("source must be a connection on the line".into()));
    }
    let theta = c
        .polynomial_theta()
        .ok_or_else(|| Error::DenominatorEscape("source connection must be polynomial".into()))?;
    let ring = c.ring().clone();
    let r = c.rank();
    let m = map.degree();
    let (u, den) = map.inverse_discriminant()?;
    let mut u2 = MultiPoly::zero(ring.clone(), 2);
    for (j, uj) in u.iter().enumerate() {
        u2 = &u2 + &uj.remap_vars(2, &[1]).mul_term(&Monomial::from_exps(&[j as u16, 0]), &ring.one())?;
    }
    let z = |j: usize| MultiPoly::term(ring.clone(), Monomial::from_exps(&[j as u16, 0]), ring.one());
    let mut out: LMat<F> = vec![vec![LocalizedPoly::zero_like(&den); m * r]; m * r];
    for j in 0..m {
        for k in 0..r {
            for l in 0..r {
                // component along e_l of ∂_z(z^j e_k)
                let mut w = &z(j) * &theta[0][l][k].remap_vars(2, &[0]);
                if l == k && j > 0 {
                    w = &w + &z(j - 1).scale(&ring.from_i64(j as i64));
                }
                for (i, coeff) in map.reduce(&(&w * &u2)).into_iter().enumerate() {
                    out[i * r + l][j * r + k] = LocalizedPoly::new(coeff, den.clone(), 1);
                }
            }
        }
    }
    Connection::new(1, m * r, &den, vec![out])
}

/// Pushforward of a p-cycle on `T^*` of the `z`-line: each component
/// `I(Z, ζ)` becomes the elimination of `Z, t` from
/// `I(Z, π′(Z)·s) + (X - π(Z), 1 - t·π′(Z))`.
pub fn cycle_pushforward(cycle: &PCycle, map: &FiniteCurveMap<PrimeField>, budget: &Budget) -> Result<PCycle> {
    if cycle.n != 1 {
        return Err(Error::DomainMismatch("cycle pushforward is implemented on the line".into()));
    }
    let f = *map.polynomial().ring();
    // ring (Z, t, X, s)
    let zvar = MultiPoly::var(f, 4, 0);
    let tvar = MultiPoly::var(f, 4, 1);
    let xvar = MultiPoly::var(f, 4, 2);
    let svar = MultiPoly::var(f, 4, 3);
    let pi = map.polynomial().remap_vars(4, &[0]);
    let dpi = map.discriminant().remap_vars(4, &[0]);
    let images = [zvar.clone(), &dpi * &svar];
    let graph = [&xvar - &pi, &MultiPoly::one(f, 4) - &(&tvar * &dpi)];
    let back = [0, 0, 0, 1];

    let mut images_out: Vec<(Ideal<PrimeField>, Rational64)> = Vec::new();
    for comp in &cycle.components {
        let mut gens = comp
            .basis
            .basis()
            .iter()
            .map(|g| g.substitute(&images))
            .collect::<Result<Vec<_>>>()?;
        gens.extend(graph.iter().cloned());
        let full = Ideal::new(f, 4, gens)?;
        let image = eliminate(&full, &[2, 3], budget)?;
        let image2 = image.remap_vars(2, &back);
        if buchberger(&image2, MonomialOrder::GrevLex, budget)?.is_unit() {
            return Err(Error::Invalid(format!(
                "component {:?} lies over the ramification locus",
                comp.to_strings()
            )));
        }
        // degree of C over the target: points of C over a generic X,
        // against points of the image over the same X
        let mut best = (0u64, 0u64);
        for a in sample_points(f.p(), 1) {
            let at = &xvar - &MultiPoly::constant(f, 4, a[0]);
            let upstairs = point_count(&full.with_generator(at.clone())?, budget)?;
            let at2 = at.remap_vars(2, &back);
            let downstairs = point_count(&image2.with_generator(at2)?, budget)?;
            if upstairs > best.0 || (upstairs == best.0 && downstairs > best.1) {
                best = (upstairs, downstairs);
            }
        }
        if best.1 == 0 {
            return Err(Error::SampleDegenerate("image component has no sampled fiber points".into()));
        }
        let deg = Rational64::new(best.0 as i64, best.1 as i64);
        let m = comp.multiplicity * deg;
        let mut merged = false;
        for (ideal, mult) in images_out.iter_mut() {
            if ideal_equal(ideal, &image2, budget)? {
                *mult += m;
                merged = true;
                break;
            }
        }
        if !merged {
            images_out.push((image2, m));
        }
    }

    let mut components = Vec::with_capacity(images_out.len());
    let mut support: Option<Ideal<PrimeField>> = None;
    for (ideal, multiplicity) in images_out {
        let basis = buchberger(&ideal, MonomialOrder::GrevLex, budget)?;
        let mut degree = 0;
        for a in sample_points(f.p(), 1) {
            let at = &MultiPoly::var(f, 2, 0) - &MultiPoly::constant(f, 2, a[0]);
            degree = degree.max(point_count(&ideal.with_generator(at)?, budget)?);
        }
        support = Some(match support {
            None => ideal.clone(),
            Some(s) => intersect(&s, &ideal, budget)?,
        });
        components.push(Component {
            basis,
            multiplicity,
            degree,
        });
    }
    components.sort_by_key(|c| c.to_strings());
    let annihilator = match support {
        Some(s) => buchberger(&s, MonomialOrder::GrevLex, budget)?.basis().to_vec(),
        None => vec![],
    };
    let out = PCycle {
        n: 1,
        rank: cycle.rank * map.degree(),
        components,
        annihilator,
        bound: 0,
        eliminants: vec![],
        sample: SampleInfo {
            point: vec![],
            points_tried: sample_points(f.p(), 1).len(),
        },
        via_fourier: false,
    };
    if out.mass() != Rational64::from_integer(out.rank as i64) {
        return Err(Error::RelationViolated(format!(
            "pushed cycle has mass {} but rank {}",
            out.mass(),
            out.rank
        )));
    }
    Ok(out)
}
