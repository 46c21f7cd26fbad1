//! Flat connections, λ-connections and Higgs bundles on affine space.
//!
//! A connection of rank `r` on `A^n` is the free module `O^r` with
//! `∇_{∂_i} = ∂_i + Θ_i` acting on column vectors: column `j` of `Θ_i`
//! holds the coordinates of `∇_{∂_i} e_j`. Entries live in `O[1/d]` for a
//! single denominator `d` (which is `1` for polynomial connections).

pub mod cohomology;
pub mod pcurv;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::algebra::localized::normalize_denominator;
use crate::algebra::parse::{parse_expr, Expr, ExprAlgebra};
use crate::algebra::{var_names, Field, LocalizedPoly, MultiPoly, PrimeField};
use crate::error::{Error, Result};

pub use cohomology::{cartier, derham_cohomology, higgs_cohomology, Cohomology, CohomologyGroup};
pub use pcurv::{p_curvature, p_curvature_lambda, PCurvature};

pub type LMat<F> = Vec<Vec<LocalizedPoly<F>>>;
pub type PMat<F> = Vec<Vec<MultiPoly<F>>>;

pub(crate) fn lmat_zero<F: Field>(den: &MultiPoly<F>, r: usize) -> LMat<F> {
    vec![vec![LocalizedPoly::zero_like(den); r]; r]
}

pub(crate) fn lmat_mul<F: Field>(a: &LMat<F>, b: &LMat<F>) -> LMat<F> {
    let r = a.len();
    let den = a[0][0].denominator().clone();
    let mut out = lmat_zero(&den, r);
    for i in 0..r {
        for k in 0..r {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..r {
                if !b[k][j].is_zero() {
                    out[i][j] = out[i][j].add(&a[i][k].mul(&b[k][j]));
                }
            }
        }
    }
    out
}

pub(crate) fn lmat_sub<F: Field>(a: &LMat<F>, b: &LMat<F>) -> LMat<F> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u.sub(v)).collect())
        .collect()
}

pub(crate) fn lmat_is_zero<F: Field>(a: &LMat<F>) -> bool {
    a.iter().all(|r| r.iter().all(|e| e.is_zero()))
}

/// `∂_i + Θ` applied to a column vector.
pub(crate) fn apply_op<F: Field>(theta: &LMat<F>, i: usize, v: &[LocalizedPoly<F>]) -> Result<Vec<LocalizedPoly<F>>> {
    let mut out = Vec::with_capacity(v.len());
    for (k, row) in theta.iter().enumerate() {
        let mut acc = v[k].diff(i)?;
        for (j, t) in row.iter().enumerate() {
            if !t.is_zero() && !v[j].is_zero() {
                acc = acc.add(&t.mul(&v[j]));
            }
        }
        out.push(acc);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection<F: Field> {
    n: usize,
    rank: usize,
    den: MultiPoly<F>,
    theta: Vec<LMat<F>>,
}

impl<F: Field> Connection<F> {
    /// Builds a connection and checks flatness.
    pub fn new(n: usize, rank: usize, den: &MultiPoly<F>, theta: Vec<LMat<F>>) -> Result<Self> {
        let den = normalize_denominator(den)?;
        if theta.len() != n || theta.iter().any(|m| m.len() != rank || m.iter().any(|r| r.len() != rank)) {
            return Err(Error::DomainMismatch(format!("expected {n} matrices of size {rank}x{rank}")));
        }
        // re-express every entry over the normalized denominator
        let theta = theta
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .map(|row| row.into_iter().map(|e| rebase(&e, &den)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let c = Connection { n, rank, den, theta };
        c.check_flat()?;
        Ok(c)
    }

    pub fn polynomial(n: usize, theta: Vec<PMat<F>>) -> Result<Self> {
        let ring = theta
            .first()
            .and_then(|m| m.first())
            .and_then(|r| r.first())
            .map(|e| e.ring().clone())
            .ok_or_else(|| Error::Invalid("empty connection matrices".into()))?;
        let rank = theta[0].len();
        let one = MultiPoly::one(ring, n);
        let lt = theta
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .map(|row| row.into_iter().map(|e| LocalizedPoly::from_poly(e, &one)).collect())
                    .collect()
            })
            .collect();
        Self::new(n, rank, &one, lt)
    }

    pub fn trivial(ring: F, n: usize, rank: usize) -> Self {
        let one = MultiPoly::one(ring, n);
        Connection {
            n,
            rank,
            theta: vec![lmat_zero(&one, rank); n],
            den: one,
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn denominator(&self) -> &MultiPoly<F> {
        &self.den
    }

    pub fn theta(&self) -> &[LMat<F>] {
        &self.theta
    }

    pub fn ring(&self) -> &F {
        self.den.ring()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// Matrices with polynomial entries, when there is no denominator.
    pub fn polynomial_theta(&self) -> Option<Vec<PMat<F>>> {
        if !self.is_polynomial() {
            return None;
        }
        Some(
            self.theta
                .iter()
                .map(|m| m.iter().map(|r| r.iter().map(|e| e.numerator().clone()).collect()).collect())
                .collect(),
        )
    }

    /// Curvature `∂_iΘ_j − ∂_jΘ_i + [Θ_i, Θ_j]` for `i < j`.
    pub fn curvature(&self, i: usize, j: usize) -> Result<LMat<F>> {
        let r = self.rank;
        let mut out = lmat_sub(&lmat_mul(&self.theta[i], &self.theta[j]), &lmat_mul(&self.theta[j], &self.theta[i]));
        for a in 0..r {
            for b in 0..r {
                let t = self.theta[j][a][b].diff(i)?.sub(&self.theta[i][a][b].diff(j)?);
                out[a][b] = out[a][b].add(&t);
            }
        }
        Ok(out)
    }

    fn check_flat(&self) -> Result<()> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !lmat_is_zero(&self.curvature(i, j)?) {
                    return Err(Error::NotFlat(format!("curvature in directions ({}, {}) is nonzero", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    /// `∇_{∂_i}` on a column vector over `O[1/d]`.
    pub fn apply(&self, i: usize, v: &[LocalizedPoly<F>]) -> Result<Vec<LocalizedPoly<F>>> {
        apply_op(&self.theta[i], i, v)
    }

    /// Connection on `End(M)`: `D_i(η) = ∂_iη + Θ_iη − ηΘ_i`, on the basis
    /// `E_ab` ordered row-major.
    pub fn endo(&self) -> Result<Self> {
        let r = self.rank;
        let zero = LocalizedPoly::zero_like(&self.den);
        let mut theta = Vec::with_capacity(self.n);
        for t in &self.theta {
            let mut m = vec![vec![zero.clone(); r * r]; r * r];
            for a in 0..r {
                for b in 0..r {
                    for c in 0..r {
                        for d in 0..r {
                            let mut e = zero.clone();
                            if b == d {
                                e = e.add(&t[a][c]);
                            }
                            if a == c {
                                e = e.sub(&t[d][b]);
                            }
                            m[a * r + b][c * r + d] = e;
                        }
                    }
                }
            }
            theta.push(m);
        }
        Self::new(self.n, r * r, &self.den, theta)
    }

    /// Tensor product with a rank-one connection `g` (Θ adds).
    pub fn twist_by(&self, g: &Self) -> Result<Self> {
        if g.rank != 1 || g.n != self.n || g.den != self.den {
            return Err(Error::DomainMismatch("twist needs a rank-one connection on the same localization".into()));
        }
        let mut theta = self.theta.clone();
        for (i, m) in theta.iter_mut().enumerate() {
            for (a, row) in m.iter_mut().enumerate() {
                row[a] = row[a].add(&g.theta[i][0][0]);
            }
        }
        Self::new(self.n, self.rank, &self.den, theta)
    }

    /// Direct sum of two connections on the same localization.
    pub fn direct_sum(&self, o: &Self) -> Result<Self> {
        if o.n != self.n || o.den != self.den {
            return Err(Error::DomainMismatch("direct sum needs a common localization".into()));
        }
        let r = self.rank + o.rank;
        let mut theta = vec![lmat_zero(&self.den, r); self.n];
        for i in 0..self.n {
            for a in 0..self.rank {
                for b in 0..self.rank {
                    theta[i][a][b] = self.theta[i][a][b].clone();
                }
            }
            for a in 0..o.rank {
                for b in 0..o.rank {
                    theta[i][self.rank + a][self.rank + b] = o.theta[i][a][b].clone();
                }
            }
        }
        Self::new(self.n, r, &self.den, theta)
    }

    /// Gauge transform by a constant-determinant polynomial matrix `g`:
    /// `Θ' = gΘg⁻¹ − (∂g)g⁻¹`, so that `g` maps horizontal sections of
    /// this connection to horizontal sections of the result.
    pub fn gauge(&self, g: &PMat<F>, g_inv: &PMat<F>) -> Result<Self> {
        let lift = |m: &PMat<F>| -> LMat<F> {
            m.iter()
                .map(|r| r.iter().map(|e| LocalizedPoly::from_poly(e.clone(), &self.den)).collect())
                .collect()
        };
        let lg = lift(g);
        let lgi = lift(g_inv);
        let mut theta = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let dg: LMat<F> = lg
                .iter()
                .map(|r| r.iter().map(|e| e.diff(i)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let conj = lmat_mul(&lmat_mul(&lg, &self.theta[i]), &lgi);
            theta.push(lmat_sub(&conj, &lmat_mul(&dg, &lgi)));
        }
        Self::new(self.n, self.rank, &self.den, theta)
    }

    /// Pullback along a polynomial map `φ: A^m → A^n` given by `n`
    /// polynomials in `m` variables: `Θ̂_i = Σ_j (∂_i φ_j)·(Θ_j ∘ φ)`.
    pub fn pullback(&self, phi: &[MultiPoly<F>]) -> Result<Self> {
        if phi.len() != self.n {
            return Err(Error::DomainMismatch("map has the wrong number of components".into()));
        }
        let m = phi
            .first()
            .map(|f| f.nvars())
            .ok_or_else(|| Error::Invalid("pullback along a map to A^0".into()))?;
        let den_phi = self.den.substitute(phi)?;
        if den_phi.is_zero() {
            return Err(Error::DenominatorEscape("denominator vanishes on the image".into()));
        }
        let new_den = normalize_denominator(&den_phi)?;
        // den∘φ = c · new_den with c a nonzero constant
        let c = if den_phi.is_constant() {
            den_phi.constant_term()
        } else {
            den_phi.exact_div(&new_den).map(|q| q.constant_term()).unwrap()
        };
        let ring = self.ring().clone();
        let c_inv = ring.inv(&c).unwrap();
        let compose = |e: &LocalizedPoly<F>| -> Result<LocalizedPoly<F>> {
            let num = e.numerator().substitute(phi)?;
            let k = e.power();
            let num = num.scale(&ring.pow(&c_inv, k as u64));
            Ok(LocalizedPoly::new(num, new_den.clone(), k))
        };
        let composed: Vec<LMat<F>> = self
            .theta
            .iter()
            .map(|t| {
                t.iter()
                    .map(|r| r.iter().map(&compose).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut theta = Vec::with_capacity(m);
        for i in 0..m {
            let mut acc = lmat_zero(&new_den, self.rank);
            for (j, f) in phi.iter().enumerate() {
                let dfj = f.diff(i)?;
                if dfj.is_zero() {
                    continue;
                }
                for a in 0..self.rank {
                    for b in 0..self.rank {
                        acc[a][b] = acc[a][b].add(&composed[j][a][b].mul_poly(&dfj));
                    }
                }
            }
            theta.push(acc);
        }
        Self::new(m, self.rank, &new_den, theta)
    }

    pub fn to_spec(&self) -> ConnectionSpec {
        let names = var_names("x", self.n);
        ConnectionSpec {
            n: self.n,
            rank: self.rank,
            theta: self
                .theta
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|r| MatrixRow::Row(r.iter().map(|e| e.to_string_with(&names)).collect()))
                        .collect()
                })
                .collect(),
            denominator: (!self.is_polynomial()).then(|| self.den.to_string_with(&names)),
        }
    }
}

/// Expresses `e` over the denominator `den` (which must absorb `e`'s).
fn rebase<F: Field>(e: &LocalizedPoly<F>, den: &MultiPoly<F>) -> Result<LocalizedPoly<F>> {
    if e.denominator() == den || e.power() == 0 {
        return Ok(LocalizedPoly::new(e.numerator().clone(), den.clone(), e.power()));
    }
    // den must be a power product containing e's denominator; only the
    // case den == e.den^1 * unit is supported
    Err(Error::DenominatorEscape(format!(
        "entry with denominator {} over localization {}",
        e.denominator(),
        den
    )))
}

/// `λ∂_i + Θ_i` with polynomial entries in `x1..xn, λ` (λ is the last
/// variable).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaConnection<F: Field> {
    n: usize,
    rank: usize,
    theta: Vec<PMat<F>>,
}

pub(crate) fn pmat_mul<F: Field>(a: &PMat<F>, b: &PMat<F>) -> PMat<F> {
    let r = a.len();
    let z = MultiPoly::zero(a[0][0].ring().clone(), a[0][0].nvars());
    let mut out = vec![vec![z; r]; r];
    for i in 0..r {
        for k in 0..r {
            for j in 0..r {
                out[i][j] = &out[i][j] + &(&a[i][k] * &b[k][j]);
            }
        }
    }
    out
}

impl<F: Field> LambdaConnection<F> {
    pub fn new(n: usize, theta: Vec<PMat<F>>) -> Result<Self> {
        if theta.len() != n {
            return Err(Error::DomainMismatch("one matrix per variable".into()));
        }
        let rank = theta.first().map_or(0, |m| m.len());
        for m in &theta {
            for row in m {
                if row.len() != rank || row.iter().any(|e| e.nvars() != n + 1) {
                    return Err(Error::DomainMismatch("λ-connection entries live in n+1 variables".into()));
                }
            }
        }
        let c = LambdaConnection { n, rank, theta };
        for i in 0..n {
            for j in i + 1..n {
                let lam = MultiPoly::var(c.theta[0][0][0].ring().clone(), n + 1, n);
                let ci = pmat_mul(&c.theta[i], &c.theta[j]);
                let cj = pmat_mul(&c.theta[j], &c.theta[i]);
                for a in 0..rank {
                    for b in 0..rank {
                        let d = &c.theta[j][a][b].diff(i)? - &c.theta[i][a][b].diff(j)?;
                        let v = &(&lam * &d) + &(&ci[a][b] - &cj[a][b]);
                        if !v.is_zero() {
                            return Err(Error::NotFlat(format!("λ-curvature ({}, {}) is nonzero", i + 1, j + 1)));
                        }
                    }
                }
            }
        }
        Ok(c)
    }

    /// The λ-connection with the same matrices; it is λ-flat exactly when
    /// `dΘ` and `[Θ, Θ]` vanish separately (always the case on `A^1`).
    pub fn from_connection(c: &Connection<F>) -> Result<Self> {
        let theta = c
            .polynomial_theta()
            .ok_or_else(|| Error::Invalid("λ-connections are polynomial".into()))?;
        let n = c.nvars();
        let pos: Vec<usize> = (0..n).collect();
        Self::new(
            n,
            theta
                .iter()
                .map(|m| m.iter().map(|r| r.iter().map(|e| e.remap_vars(n + 1, &pos)).collect()).collect())
                .collect(),
        )
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn theta(&self) -> &[PMat<F>] {
        &self.theta
    }

    /// Matrices with `λ` set to `value`, in `n` variables.
    pub fn specialize_theta(&self, value: &F::Elem) -> Result<Vec<PMat<F>>> {
        let ring = self.theta[0][0][0].ring().clone();
        let n = self.n;
        let mut images: Vec<MultiPoly<F>> = (0..n).map(|i| MultiPoly::var(ring.clone(), n, i)).collect();
        images.push(MultiPoly::constant(ring, n, value.clone()));
        self.theta
            .iter()
            .map(|m| {
                m.iter()
                    .map(|r| r.iter().map(|e| e.substitute(&images)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    }

    pub fn at_one(&self) -> Result<Connection<F>> {
        let one = self.theta[0][0][0].ring().one();
        Connection::polynomial(self.n, self.specialize_theta(&one)?)
    }

    pub fn at_zero(&self) -> Result<HiggsBundle<F>> {
        let zero = self.theta[0][0][0].ring().zero();
        HiggsBundle::new(self.n, self.specialize_theta(&zero)?)
    }
}

/// An O-linear Higgs field: pairwise commuting matrices `Θ_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiggsBundle<F: Field> {
    n: usize,
    rank: usize,
    theta: Vec<PMat<F>>,
}

impl<F: Field> HiggsBundle<F> {
    pub fn new(n: usize, theta: Vec<PMat<F>>) -> Result<Self> {
        if theta.len() != n {
            return Err(Error::DomainMismatch("one matrix per variable".into()));
        }
        let rank = theta.first().map_or(0, |m| m.len());
        for i in 0..n {
            for j in i + 1..n {
                if pmat_mul(&theta[i], &theta[j]) != pmat_mul(&theta[j], &theta[i]) {
                    return Err(Error::NotFlat(format!("Higgs fields {} and {} do not commute", i + 1, j + 1)));
                }
            }
        }
        Ok(HiggsBundle { n, rank, theta })
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn theta(&self) -> &[PMat<F>] {
        &self.theta
    }
}

/// Rank-one connection `d + df`, i.e. `Θ_i = ∂_i f`.
pub fn exponential_module<F: Field>(f: &MultiPoly<F>) -> Result<Connection<F>> {
    let n = f.nvars();
    let theta = (0..n)
        .map(|i| Ok(vec![vec![f.diff(i)?]]))
        .collect::<Result<Vec<_>>>()?;
    Connection::polynomial(n, theta)
}

/// JSON form of a connection: `{"n", "rank", "theta", "denominator"?}`;
/// each `theta[i]` is either a flat row-major list of `rank²` strings or a
/// list of rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionSpec {
    pub n: usize,
    pub rank: usize,
    pub theta: Vec<Vec<MatrixRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRow {
    Entry(String),
    Row(Vec<String>),
}

/// Parses `a/b` where `b` is a constant times a power of the declared
/// denominator.
struct LocalizedAlgebra<'a> {
    field: PrimeField,
    names: &'a [String],
    den: MultiPoly<PrimeField>,
}

impl LocalizedAlgebra<'_> {
    fn as_den_power(&self, b: &LocalizedPoly<PrimeField>) -> Option<(u64, u32)> {
        if b.power() != 0 {
            return None;
        }
        let mut q = b.numerator().clone();
        let mut k = 0;
        while !q.is_constant() {
            if self.den.is_constant() {
                return None;
            }
            q = q.exact_div(&self.den)?;
            k += 1;
        }
        let c = q.constant_term();
        (c != 0).then_some((c, k))
    }
}

impl ExprAlgebra for LocalizedAlgebra<'_> {
    type Value = LocalizedPoly<PrimeField>;

    fn num(&self, q: &BigRational) -> Result<Self::Value> {
        let c = self.field.from_rational(q)?;
        Ok(LocalizedPoly::from_poly(MultiPoly::constant(self.field, self.names.len(), c), &self.den))
    }
    fn var(&self, name: &str) -> Result<Self::Value> {
        match self.names.iter().position(|v| v == name) {
            Some(i) => Ok(LocalizedPoly::from_poly(MultiPoly::var(self.field, self.names.len(), i), &self.den)),
            None => Err(Error::Parse {
                column: 0,
                message: format!("unknown variable '{name}'"),
            }),
        }
    }
    fn add(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value> {
        Ok(a.add(&b))
    }
    fn sub(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value> {
        Ok(a.sub(&b))
    }
    fn mul(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value> {
        Ok(a.mul(&b))
    }
    fn neg(&self, a: Self::Value) -> Result<Self::Value> {
        Ok(a.neg())
    }
    fn div(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value> {
        let (c, k) = self
            .as_den_power(&b)
            .ok_or_else(|| Error::DenominatorEscape(format!("cannot divide by {b} over the declared localization")))?;
        let inv = self.field.inv(&c).ok_or_else(|| Error::BadPrime("division by zero mod p".into()))?;
        let scaled = a.scale(&inv);
        Ok(LocalizedPoly::new(scaled.numerator().clone(), self.den.clone(), scaled.power() + k))
    }
    fn pow(&self, a: Self::Value, e: u32) -> Result<Self::Value> {
        let mut acc = self.num(&BigRational::from_integer(1.into()))?;
        for _ in 0..e {
            acc = acc.mul(&a);
        }
        Ok(acc)
    }
}

/// Parses an element of `F_p[x1..xn][1/den]`.
pub fn parse_localized(
    text: &str,
    field: PrimeField,
    n: usize,
    den: &MultiPoly<PrimeField>,
) -> Result<LocalizedPoly<PrimeField>> {
    let names = var_names("x", n);
    let e: Expr = parse_expr(text)?;
    e.eval(&LocalizedAlgebra {
        field,
        names: &names,
        den: den.clone(),
    })
}

impl ConnectionSpec {
    pub fn to_connection(&self, field: PrimeField) -> Result<Connection<PrimeField>> {
        let names = var_names("x", self.n);
        let den = match &self.denominator {
            None => MultiPoly::one(field, self.n),
            Some(d) => normalize_denominator(&crate::algebra::parse::parse_poly_in(d, &names, field, &|q| {
                field.from_rational(q)
            })?)?,
        };
        if self.theta.len() != self.n {
            return Err(Error::Invalid(format!("theta must list {} matrices", self.n)));
        }
        let r = self.rank;
        let mut theta = Vec::with_capacity(self.n);
        for m in &self.theta {
            let flat: Vec<&String> = if m.iter().all(|e| matches!(e, MatrixRow::Entry(_))) {
                m.iter()
                    .map(|e| match e {
                        MatrixRow::Entry(s) => s,
                        MatrixRow::Row(_) => unreachable!(),
                    })
                    .collect()
            } else if m.iter().all(|e| matches!(e, MatrixRow::Row(_))) {
                m.iter()
                    .flat_map(|e| match e {
                        MatrixRow::Row(r) => r.iter(),
                        MatrixRow::Entry(_) => unreachable!(),
                    })
                    .collect()
            } else {
                return Err(Error::Invalid("matrix mixes rows and entries".into()));
            };
            if flat.len() != r * r {
                return Err(Error::Invalid(format!("a {r}x{r} matrix needs {} entries", r * r)));
            }
            let entries = flat
                .iter()
                .map(|s| parse_localized(s, field, self.n, &den))
                .collect::<Result<Vec<_>>>()?;
            theta.push(entries.chunks(r).map(|c| c.to_vec()).collect());
        }
        Connection::new(self.n, r, &den, theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_poly_in;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn poly(s: &str, f: PrimeField, n: usize) -> MultiPoly<PrimeField> {
        parse_poly_in(s, &var_names("x", n), f, &|q| f.from_rational(q)).unwrap()
    }

    pub(crate) fn airy(f: PrimeField) -> Connection<PrimeField> {
        Connection::polynomial(1, vec![vec![vec![poly("0", f, 1), poly("x1", f, 1)], vec![poly("1", f, 1), poly("0", f, 1)]]])
            .unwrap()
    }

    #[test]
    fn flatness_is_checked() {
        let f = fp(5);
        // Θ = (x2 dx1): ∂2Θ1 = 1 ≠ 0
        let bad = Connection::polynomial(2, vec![vec![vec![poly("x2", f, 2)]], vec![vec![poly("0", f, 2)]]]);
        assert!(matches!(bad, Err(Error::NotFlat(_))));
        let good = exponential_module(&poly("x1*x2", f, 2)).unwrap();
        assert_eq!(good.polynomial_theta().unwrap(), vec![vec![vec![poly("x2", f, 2)]], vec![vec![poly("x1", f, 2)]]]);
    }

    #[test]
    fn exponential_examples() {
        let q = crate::algebra::parse::parse_poly("x1^3/3", &var_names("x", 1)).unwrap();
        let f5 = crate::algebra::reduce_mod_p(&q, fp(5)).unwrap();
        let c = exponential_module(&f5).unwrap();
        assert_eq!(c.polynomial_theta().unwrap()[0][0][0], poly("x1^2", fp(5), 1));
        let triv = exponential_module(&poly("0", fp(5), 1)).unwrap();
        assert_eq!(triv, Connection::trivial(fp(5), 1, 1));
    }

    #[test]
    fn endo_examples() {
        let f = fp(7);
        let e = exponential_module(&poly("x1^3 + x1", f, 1)).unwrap().endo().unwrap();
        assert_eq!(e, Connection::trivial(f, 1, 1));
        let airy = airy(f).endo().unwrap();
        // η = E_10 (row 1, col 0) has coordinate vector e_2
        let one = MultiPoly::one(f, 1);
        let mut eta = vec![LocalizedPoly::zero_like(&one); 4];
        eta[2] = LocalizedPoly::from_poly(one.clone(), &one);
        let d = airy.apply(0, &eta).unwrap();
        let got: Vec<MultiPoly<PrimeField>> = d.iter().map(|e| e.numerator().clone()).collect();
        assert_eq!(got, vec![poly("x1", f, 1), poly("0", f, 1), poly("0", f, 1), poly("-x1", f, 1)]);
        // identity is horizontal
        let mut id = vec![LocalizedPoly::zero_like(&one); 4];
        id[0] = LocalizedPoly::from_poly(one.clone(), &one);
        id[3] = LocalizedPoly::from_poly(one.clone(), &one);
        assert!(airy.apply(0, &id).unwrap().iter().all(|e| e.is_zero()));
    }

    #[test]
    fn pullback_examples() {
        let f = fp(7);
        let z2 = vec![poly("x1^2", f, 1)];
        let g = Connection::polynomial(1, vec![vec![vec![poly("x1^3 + 2", f, 1)]]]).unwrap();
        let pb = g.pullback(&z2).unwrap();
        assert_eq!(pb.polynomial_theta().unwrap()[0][0][0], poly("2*x1*(x1^6 + 2)", f, 1));
        let t = Connection::trivial(f, 2, 2);
        let phi = vec![poly("x1*x2", f, 2), poly("x1 + x2^3", f, 2)];
        assert_eq!(t.pullback(&phi).unwrap(), t);
        let e = exponential_module(&poly("x1^2*x2", f, 2)).unwrap();
        let pe = e.pullback(&phi).unwrap();
        let comp = poly("x1^2*x2", f, 2).substitute(&phi).unwrap();
        assert_eq!(pe, exponential_module(&comp).unwrap());
    }

    #[test]
    fn spec_round_trip() {
        let f = fp(5);
        let a = airy(f);
        let spec = a.to_spec();
        assert_eq!(spec.to_connection(f).unwrap(), a);
        let loc = ConnectionSpec {
            n: 1,
            rank: 2,
            theta: vec![vec![
                MatrixRow::Row(vec!["0".into(), "1/2".into()]),
                MatrixRow::Row(vec!["1/(2*x1)".into(), "1/(2*x1)".into()]),
            ]],
            denominator: Some("x1".into()),
        };
        let c = loc.to_connection(f).unwrap();
        assert_eq!(c.theta()[0][1][0].power(), 1);
        assert_eq!(c.to_spec().to_connection(f).unwrap(), c);
        let escape = ConnectionSpec {
            n: 1,
            rank: 1,
            theta: vec![vec![MatrixRow::Entry("1/(x1+1)".into())]],
            denominator: Some("x1".into()),
        };
        assert!(matches!(escape.to_connection(f), Err(Error::DenominatorEscape(_))));
    }

    #[test]
    fn lambda_specializations() {
        let f = fp(5);
        let c = airy(f);
        let l = LambdaConnection::from_connection(&c).unwrap();
        assert_eq!(l.at_one().unwrap(), c);
        let h = l.at_zero().unwrap();
        assert_eq!(h.rank(), 2);
        assert_eq!(h.theta()[0][0][1], poly("x1", f, 1));
    }
}
