//! p-curvature `Ψ_i = (∂_i + Θ_i)^p` and its λ-version `(λ∂_i + Θ_i)^p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{apply_op, lmat_is_zero, lmat_mul, lmat_sub, Connection, LMat, LambdaConnection, PMat};
use crate::algebra::{var_names, LocalizedPoly, Monomial, MultiPoly, PrimeField};
use crate::error::{Error, Result};

/// Seed for the random test function of the O-linearity assertion.
pub const OLINEAR_SEED: u64 = 0x0b5e_55ed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PCurvature {
    n: usize,
    rank: usize,
    den: MultiPoly<PrimeField>,
    psi: Vec<LMat<PrimeField>>,
}

impl PCurvature {
    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn denominator(&self) -> &MultiPoly<PrimeField> {
        &self.den
    }

    pub fn psi(&self) -> &[LMat<PrimeField>] {
        &self.psi
    }

    pub fn polynomial_psi(&self) -> Option<Vec<PMat<PrimeField>>> {
        if !self.den.is_constant() {
            return None;
        }
        Some(
            self.psi
                .iter()
                .map(|m| m.iter().map(|r| r.iter().map(|e| e.numerator().clone()).collect()).collect())
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.psi.iter().all(lmat_is_zero)
    }

    /// Entries rendered row by row, one matrix per variable.
    pub fn to_strings(&self) -> Vec<Vec<Vec<String>>> {
        let names = var_names("x", self.n);
        self.psi
            .iter()
            .map(|m| m.iter().map(|r| r.iter().map(|e| e.to_string_with(&names)).collect()).collect())
            .collect()
    }
}

fn basis_vector(den: &MultiPoly<PrimeField>, r: usize, j: usize) -> Vec<LocalizedPoly<PrimeField>> {
    let mut v = vec![LocalizedPoly::zero_like(den); r];
    v[j] = LocalizedPoly::from_poly(MultiPoly::one(*den.ring(), den.nvars()), den);
    v
}

fn random_function(field: PrimeField, n: usize, rng: &mut ChaCha8Rng) -> MultiPoly<PrimeField> {
    let p = field.p();
    let terms = (0..4).map(|_| {
        let e: Vec<u16> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        (Monomial::from_exps(&e), rng.gen_range(1..p))
    });
    MultiPoly::from_terms(field, n, terms)
}

/// `Ψ_i = (∂_i + Θ_i)^p`, computed column by column by applying the
/// operator `p` times to each basis vector.
///
/// Asserted: Ψ is O-linear on a random function and the `Ψ_i` commute.
pub fn p_curvature(c: &Connection<PrimeField>) -> Result<PCurvature> {
    let field = *c.ring();
    let p = field.p();
    let (n, r, den) = (c.nvars(), c.rank(), c.denominator().clone());
    let mut psi = Vec::with_capacity(n);
    for i in 0..n {
        let mut cols = Vec::with_capacity(r);
        for j in 0..r {
            let mut v = basis_vector(&den, r, j);
            for _ in 0..p {
                v = apply_op(&c.theta()[i], i, &v)?;
            }
            cols.push(v);
        }
        let m: LMat<PrimeField> = (0..r).map(|a| (0..r).map(|b| cols[b][a].clone()).collect()).collect();
        psi.push(m);
    }
    let out = PCurvature { n, rank: r, den: den.clone(), psi };

    let mut rng = ChaCha8Rng::seed_from_u64(OLINEAR_SEED);
    let f = random_function(field, n, &mut rng);
    for i in 0..n {
        for j in 0..r {
            let mut v = basis_vector(&den, r, j);
            for e in v.iter_mut() {
                *e = e.mul_poly(&f);
            }
            for _ in 0..p {
                v = apply_op(&c.theta()[i], i, &v)?;
            }
            for (a, e) in v.iter().enumerate() {
                if *e != out.psi[i][a][j].mul_poly(&f) {
                    return Err(Error::RelationViolated(format!("p-curvature in direction {} is not O-linear", i + 1)));
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let comm = lmat_sub(&lmat_mul(&out.psi[i], &out.psi[j]), &lmat_mul(&out.psi[j], &out.psi[i]));
            if !lmat_is_zero(&comm) {
                return Err(Error::RelationViolated(format!("Ψ_{} and Ψ_{} do not commute", i + 1, j + 1)));
            }
        }
    }
    Ok(out)
}

/// `(λ∂_i + Θ_i)^p` with entries polynomial in `x1..xn, λ`.
pub fn p_curvature_lambda(c: &LambdaConnection<PrimeField>) -> Result<Vec<PMat<PrimeField>>> {
    let field = *c.theta()[0][0][0].ring();
    let p = field.p();
    let (n, r) = (c.nvars(), c.rank());
    let lam = MultiPoly::var(field, n + 1, n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let th = &c.theta()[i];
        let mut cols = Vec::with_capacity(r);
        for j in 0..r {
            let mut v: Vec<MultiPoly<PrimeField>> = (0..r)
                .map(|k| {
                    if k == j {
                        MultiPoly::one(field, n + 1)
                    } else {
                        MultiPoly::zero(field, n + 1)
                    }
                })
                .collect();
            for _ in 0..p {
                let mut w = Vec::with_capacity(r);
                for (k, row) in th.iter().enumerate() {
                    let mut acc = &lam * &v[k].diff(i)?;
                    for (b, t) in row.iter().enumerate() {
                        acc = &acc + &(t * &v[b]);
                    }
                    w.push(acc);
                }
                v = w;
            }
            cols.push(v);
        }
        out.push((0..r).map(|a| (0..r).map(|b| cols[b][a].clone()).collect()).collect());
    }
    Ok(out)
}
