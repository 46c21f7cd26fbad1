//! Lifts of flat connections from `F_p` to `Z/p^2`: curvature, the
//! obstruction class, the action of closed `End`-valued 1-forms and
//! isomorphism of lifts.

use std::collections::HashMap;

use crate::algebra::{linalg, var_names, Field, Monomial, MultiPoly, PrimeField, Ring, ZModP2};
use crate::connection::{Connection, PMat};
use crate::error::{Error, Result};

type Mat<R> = Vec<Vec<MultiPoly<R>>>;

fn mat_mul<R: Ring>(a: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    let r = a.len();
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let mut acc = MultiPoly::zero(a[0][0].ring().clone(), a[0][0].nvars());
                    for k in 0..r {
                        if !a[i][k].is_zero() && !b[k][j].is_zero() {
                            acc = &acc + &(&a[i][k] * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn mat_zip<R: Ring>(a: &Mat<R>, b: &Mat<R>, op: impl Fn(&MultiPoly<R>, &MultiPoly<R>) -> MultiPoly<R>) -> Mat<R> {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| op(x, y)).collect()).collect()
}

fn mat_add<R: Ring>(a: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    mat_zip(a, b, |x, y| x + y)
}

fn mat_sub<R: Ring>(a: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    mat_zip(a, b, |x, y| x - y)
}

fn mat_diff<R: Ring>(a: &Mat<R>, i: usize) -> Result<Mat<R>> {
    a.iter().map(|row| row.iter().map(|e| e.diff(i)).collect()).collect()
}

fn mat_is_zero<R: Ring>(a: &Mat<R>) -> bool {
    a.iter().all(|row| row.iter().all(|e| e.is_zero()))
}

fn commutator<R: Ring>(a: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    mat_sub(&mat_mul(a, b), &mat_mul(b, a))
}

/// `∂_1 A_2 - ∂_2 A_1 + [A_1, A_2]`-type expression: the `dx_1 ∧ dx_2`
/// coefficient of `dA + A ∧ A` for `A = A_1 dx_1 + A_2 dx_2`.
fn two_form<R: Ring>(a: &[Mat<R>]) -> Result<Mat<R>> {
    let d = mat_sub(&mat_diff(&a[1], 0)?, &mat_diff(&a[0], 1)?);
    Ok(mat_add(&d, &commutator(&a[0], &a[1])))
}

fn lift_poly(ring: ZModP2, f: &MultiPoly<PrimeField>) -> MultiPoly<ZModP2> {
    f.map_coeffs(ring, |c| ring.lift(*c))
}

fn lift_mat(ring: ZModP2, m: &PMat<PrimeField>) -> Mat<ZModP2> {
    m.iter().map(|row| row.iter().map(|e| lift_poly(ring, e)).collect()).collect()
}

fn times_p(ring: ZModP2, m: &PMat<PrimeField>) -> Mat<ZModP2> {
    let p = ring.p();
    m.iter()
        .map(|row| row.iter().map(|e| e.map_coeffs(ring, |c| ring.lift(*c) * p)).collect())
        .collect()
}

fn reduce_mat(field: PrimeField, m: &Mat<ZModP2>) -> PMat<PrimeField> {
    m.iter()
        .map(|row| row.iter().map(|e| e.map_coeffs(field, |c| c % field.p())).collect())
        .collect()
}

fn div_p_mat(field: PrimeField, ring: ZModP2, m: &Mat<ZModP2>) -> Option<PMat<PrimeField>> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|e| e.try_map_coeffs(field, |c| ring.div_p(c).ok_or(Error::RelationViolated(String::new()))).ok())
                .collect()
        })
        .collect()
}

/// A connection over `Z/p^2[x]` whose reduction mod `p` is flat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedConnection {
    n: usize,
    rank: usize,
    ring: ZModP2,
    theta: Vec<Mat<ZModP2>>,
}

impl LiftedConnection {
    pub fn new(n: usize, theta: Vec<Mat<ZModP2>>) -> Result<Self> {
        if !(1..=2).contains(&n) || theta.len() != n {
            return Err(Error::DomainMismatch("lifts are implemented for n = 1, 2".into()));
        }
        let rank = theta[0].len();
        if !(1..=2).contains(&rank) {
            return Err(Error::DomainMismatch("lifts are implemented for rank 1, 2".into()));
        }
        let ring = *theta[0][0][0].ring();
        for m in &theta {
            if m.len() != rank || m.iter().any(|row| row.len() != rank || row.iter().any(|e| e.nvars() != n)) {
                return Err(Error::DomainMismatch("connection matrices must be square of one rank".into()));
            }
        }
        let out = LiftedConnection { n, rank, ring, theta };
        out.reduction()?;
        Ok(out)
    }

    /// Entrywise lift, coefficients taken in `[0, p)`.
    pub fn lift(c: &Connection<PrimeField>) -> Result<Self> {
        let theta = c
            .polynomial_theta()
            .ok_or_else(|| Error::DenominatorEscape("only polynomial connections are lifted".into()))?;
        let ring = ZModP2::new(c.ring().p())?;
        Self::new(c.nvars(), theta.iter().map(|m| lift_mat(ring, m)).collect())
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ring(&self) -> ZModP2 {
        self.ring
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.ring.p()).expect("p is prime")
    }

    pub fn theta(&self) -> &[Mat<ZModP2>] {
        &self.theta
    }

    /// The reduction mod `p` (checked flat).
    pub fn reduction(&self) -> Result<Connection<PrimeField>> {
        let f = self.field();
        Connection::polynomial(self.n, self.theta.iter().map(|m| reduce_mat(f, m)).collect())
    }

    /// `dx_1 ∧ dx_2` coefficient of the curvature; `None` on the line.
    pub fn curvature(&self) -> Result<Option<Mat<ZModP2>>> {
        if self.n < 2 {
            return Ok(None);
        }
        two_form(&self.theta).map(Some)
    }

    pub fn is_flat(&self) -> Result<bool> {
        Ok(self.curvature()?.map_or(true, |c| mat_is_zero(&c)))
    }

    /// `Θ̃ + p·α`, with no closedness check on `α`.
    pub fn perturb(&self, alpha: &[PMat<PrimeField>]) -> Result<Self> {
        if alpha.len() != self.n {
            return Err(Error::DomainMismatch("1-form has the wrong number of components".into()));
        }
        let ring = self.ring;
        Self::new(self.n, self.theta.iter().zip(alpha).map(|(t, a)| mat_add(t, &times_p(ring, a))).collect())
    }

    pub fn to_strings(&self) -> Vec<Vec<Vec<String>>> {
        let names = var_names("x", self.n);
        self.theta
            .iter()
            .map(|m| m.iter().map(|row| row.iter().map(|e| e.to_string_with(&names)).collect()).collect())
            .collect()
    }
}

/// `D(η)` for an `End`-valued 0-form: components `∂_i η + [Θ_i, η]`.
pub fn d_zero(theta: &[PMat<PrimeField>], eta: &PMat<PrimeField>) -> Result<Vec<PMat<PrimeField>>> {
    (0..theta.len())
        .map(|i| Ok(mat_add(&mat_diff(eta, i)?, &commutator(&theta[i], eta))))
        .collect()
}

/// `D(α)` for an `End`-valued 1-form on the plane: the `dx_1 ∧ dx_2`
/// coefficient of `dα + [Θ ∧ α]`.
pub fn d_one(theta: &[PMat<PrimeField>], alpha: &[PMat<PrimeField>]) -> Result<PMat<PrimeField>> {
    let d = mat_sub(&mat_diff(&alpha[1], 0)?, &mat_diff(&alpha[0], 1)?);
    let br = mat_sub(&commutator(&theta[0], &alpha[1]), &commutator(&theta[1], &alpha[0]));
    Ok(mat_add(&d, &br))
}

/// Solves `op(η) = rhs` with `η` an `r × r` block of `blocks` matrices of
/// polynomials of degree `<= bound`.
fn solve_truncated(
    field: PrimeField,
    n: usize,
    rank: usize,
    blocks: usize,
    bound: u32,
    rhs: &[PMat<PrimeField>],
    op: &dyn Fn(&[PMat<PrimeField>]) -> Result<Vec<PMat<PrimeField>>>,
) -> Result<Option<Vec<PMat<PrimeField>>>> {
    let monos = monomials_up_to(n, bound);
    let zero = vec![vec![MultiPoly::zero(field, n); rank]; rank];
    let mut rows: HashMap<(usize, usize, usize, Monomial), usize> = HashMap::new();
    let mut row_of = |key: (usize, usize, usize, Monomial)| {
        let next = rows.len();
        *rows.entry(key).or_insert(next)
    };
    let mut cols: Vec<Vec<(usize, u64)>> = Vec::new();
    let mut unknowns = Vec::new();
    for blk in 0..blocks {
        for a in 0..rank {
            for b in 0..rank {
                for m in &monos {
                    let mut eta = vec![zero.clone(); blocks];
                    eta[blk][a][b] = MultiPoly::term(field, m.clone(), 1);
                    let img = op(&eta)?;
                    let mut col = Vec::new();
                    for (c, mat) in img.iter().enumerate() {
                        for (i, row) in mat.iter().enumerate() {
                            for (j, e) in row.iter().enumerate() {
                                for (mono, v) in e.terms() {
                                    col.push((row_of((c, i, j, mono.clone())), *v));
                                }
                            }
                        }
                    }
                    cols.push(col);
                    unknowns.push((blk, a, b, m.clone()));
                }
            }
        }
    }
    let mut target = Vec::new();
    for (c, mat) in rhs.iter().enumerate() {
        for (i, row) in mat.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                for (mono, v) in e.terms() {
                    target.push((row_of((c, i, j, mono.clone())), *v));
                }
            }
        }
    }
    let nrows = rows.len();
    let mut mat = linalg::zeros(&field, nrows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for &(r, v) in col {
            mat[r][j] = field.add(&mat[r][j], &v);
        }
    }
    let mut b = vec![0u64; nrows];
    for (r, v) in target {
        b[r] = field.add(&b[r], &v);
    }
    let Some(x) = linalg::solve(&field, &mat, &b, cols.len()) else {
        return Ok(None);
    };
    let mut eta = vec![zero; blocks];
    for ((blk, a, bb, m), v) in unknowns.into_iter().zip(x) {
        if v != 0 {
            eta[blk][a][bb].add_term(m, v);
        }
    }
    Ok(Some(eta))
}

fn monomials_up_to(n: usize, bound: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    match n {
        1 => {
            for i in 0..=bound {
                out.push(Monomial::from_exps(&[i as u16]));
            }
        }
        _ => {
            for d in 0..=bound {
                for i in 0..=d {
                    out.push(Monomial::from_exps(&[i as u16, (d - i) as u16]));
                }
            }
        }
    }
    out
}

/// How exactness of the obstruction was decided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exactness {
    /// Rank one: the coefficients of `x^{ap+p-1} y^{bp+p-1}` decide.
    Cartier { nonvanishing: Vec<(Monomial, u64)> },
    /// Higher rank: a primitive was searched up to this degree.
    Truncated { bound: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionClass {
    /// `C̃/p`, the `dx ∧ dy` coefficient.
    pub representative: PMat<PrimeField>,
    pub exactness: Exactness,
}

impl ObstructionClass {
    pub fn representative_strings(&self) -> Vec<Vec<String>> {
        let names = var_names("x", 2);
        self.representative
            .iter()
            .map(|row| row.iter().map(|e| e.to_string_with(&names)).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obstruction {
    /// A flat lift `Θ̃ - p·η` and the primitive `η`.
    Liftable { witness: LiftedConnection, primitive: Vec<PMat<PrimeField>> },
    Obstructed(ObstructionClass),
}

/// Primitive of a scalar 2-form `g dx ∧ dy`, or the Cartier coordinates
/// that block one.
fn scalar_primitive(g: &MultiPoly<PrimeField>) -> std::result::Result<[MultiPoly<PrimeField>; 2], Vec<(Monomial, u64)>> {
    let f = *g.ring();
    let p = f.p();
    let mut bad = Vec::new();
    let mut a = MultiPoly::zero(f, 2);
    let mut b = MultiPoly::zero(f, 2);
    for (m, c) in g.terms() {
        let (i, j) = (m.exps()[0] as u64, m.exps()[1] as u64);
        if (i + 1) % p != 0 {
            // d(x^{i+1} y^j / (i+1) dy) = x^i y^j dx∧dy
            let inv = f.inv(&f.from_u64(i + 1)).unwrap();
            b.add_term(Monomial::from_exps(&[(i + 1) as u16, j as u16]), f.mul(c, &inv));
        } else if (j + 1) % p != 0 {
            // d(-x^i y^{j+1} / (j+1) dx) = x^i y^j dx∧dy
            let inv = f.inv(&f.from_u64(j + 1)).unwrap();
            a.add_term(Monomial::from_exps(&[i as u16, (j + 1) as u16]), f.neg(&f.mul(c, &inv)));
        } else {
            bad.push((m.clone(), *c));
        }
    }
    if bad.is_empty() {
        Ok([a, b])
    } else {
        Err(bad)
    }
}

/// Default degree bound for the rank-two primitive search.
pub const DEFAULT_PRIMITIVE_BOUND: u32 = 12;

pub fn obstruction_class(c: &Connection<PrimeField>, bound: Option<u32>) -> Result<Obstruction> {
    if c.nvars() != 2 {
        return Err(Error::DomainMismatch("obstructions live on the plane (n = 2)".into()));
    }
    let lift = LiftedConnection::lift(c)?;
    let field = lift.field();
    let ring = lift.ring();
    let curv = lift.curvature()?.expect("n = 2");
    let rep = div_p_mat(field, ring, &curv)
        .ok_or_else(|| Error::RelationViolated("curvature of a lift of a flat connection is not divisible by p".into()))?;
    let theta = c.polynomial_theta().unwrap();
    let r = c.rank();

    let (primitive, exactness) = if r == 1 {
        match scalar_primitive(&rep[0][0]) {
            Ok([a, b]) => (Some(vec![vec![vec![a]], vec![vec![b]]]), None),
            Err(bad) => (None, Some(Exactness::Cartier { nonvanishing: bad })),
        }
    } else {
        let deg = rep.iter().flatten().filter_map(|e| e.total_degree()).max().unwrap_or(0);
        let b = bound.unwrap_or(DEFAULT_PRIMITIVE_BOUND).max(deg + 1);
        let op = |alpha: &[PMat<PrimeField>]| Ok(vec![d_one(&theta, alpha)?]);
        match solve_truncated(field, 2, r, 2, b, &[rep.clone()], &op)? {
            Some(eta) => (Some(eta), None),
            None => (None, Some(Exactness::Truncated { bound: b })),
        }
    };
    match primitive {
        Some(eta) => {
            if d_one(&theta, &eta)? != rep {
                return Err(Error::RelationViolated("primitive does not reproduce the obstruction".into()));
            }
            let witness = LiftedConnection::new(
                2,
                lift.theta.iter().zip(&eta).map(|(t, e)| mat_sub(t, &times_p(ring, e))).collect(),
            )?;
            if !witness.is_flat()? {
                return Err(Error::RelationViolated("corrected lift is not flat".into()));
            }
            Ok(Obstruction::Liftable { witness, primitive: eta })
        }
        None => Ok(Obstruction::Obstructed(ObstructionClass {
            representative: rep,
            exactness: exactness.unwrap(),
        })),
    }
}

/// `Θ̃ ↦ Θ̃ + p·α` for a `D`-closed `End`-valued 1-form `α`.
pub fn act_on_lift(l: &LiftedConnection, alpha: &[PMat<PrimeField>]) -> Result<LiftedConnection> {
    if l.n == 2 {
        let theta = l.reduction()?.polynomial_theta().unwrap();
        if !mat_is_zero(&d_one(&theta, alpha)?) {
            return Err(Error::NotClosed("D(α) is not zero".into()));
        }
    }
    l.perturb(alpha)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoResult {
    /// `η` with `Θ̃_2 = Θ̃_1 + p·D(η)`, i.e. the gauge `I - p·η`.
    pub witness: Option<PMat<PrimeField>>,
    pub bound: u32,
    /// A negative answer is final (not only up to the bound).
    pub bound_sufficient: bool,
}

impl IsoResult {
    pub fn isomorphic(&self) -> bool {
        self.witness.is_some()
    }
}

pub fn lifts_isomorphic(a: &LiftedConnection, b: &LiftedConnection, bound: u32) -> Result<IsoResult> {
    let ra = a.reduction()?;
    if ra != b.reduction()? {
        return Err(Error::DomainMismatch("lifts must have the same reduction".into()));
    }
    let field = a.field();
    let delta = a
        .theta
        .iter()
        .zip(&b.theta)
        .map(|(x, y)| div_p_mat(field, a.ring, &mat_sub(y, x)))
        .collect::<Option<Vec<_>>>()
        .expect("lifts with equal reductions differ by p");
    let theta = ra.polynomial_theta().unwrap();
    let op = |eta: &[PMat<PrimeField>]| d_zero(&theta, &eta[0]);
    let witness = solve_truncated(field, a.n, a.rank, 1, bound, &delta, &op)?.map(|mut e| e.remove(0));
    if let Some(eta) = &witness {
        let recon = d_zero(&theta, eta)?;
        for (i, d) in recon.iter().enumerate() {
            if mat_add(&a.theta[i], &times_p(a.ring, d)) != b.theta[i] {
                return Err(Error::RelationViolated("witness does not conjugate the lifts".into()));
            }
        }
    }
    // with Θ = 0, D = d lowers degree by one, so degree deg δ + 1 suffices
    let flat_zero = theta.iter().all(|m| mat_is_zero(m));
    let deg = delta.iter().flatten().flatten().filter_map(|e| e.total_degree()).max().unwrap_or(0);
    Ok(IsoResult {
        witness,
        bound,
        bound_sufficient: flat_zero && bound > deg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_poly_in;
    use crate::connection::exponential_module;
    use proptest::prelude::*;

    const P: u64 = 5;

    fn fp() -> PrimeField {
        PrimeField::new(P).unwrap()
    }

    fn zp2() -> ZModP2 {
        ZModP2::new(P).unwrap()
    }

    fn poly(s: &str, n: usize) -> MultiPoly<PrimeField> {
        let f = fp();
        let names = if n == 2 { vec!["x".to_string(), "y".to_string()] } else { vec!["x".to_string()] };
        parse_poly_in(s, &names, f, &|q| f.from_rational(q)).unwrap()
    }

    fn poly2(s: &str, n: usize) -> MultiPoly<ZModP2> {
        let r = zp2();
        let names = if n == 2 { vec!["x".to_string(), "y".to_string()] } else { vec!["x".to_string()] };
        parse_poly_in(s, &names, r, &|q| {
            let v = q.to_integer();
            Ok(r.from_i64(i64::try_from(v).unwrap()))
        })
        .unwrap()
    }

    fn scalar(s: &str, n: usize) -> Mat<ZModP2> {
        vec![vec![poly2(s, n)]]
    }

    #[test]
    fn curvature_examples() {
        // Θ̃ = d(xy) + p·x dy
        let l = LiftedConnection::new(2, vec![scalar("y", 2), scalar("x + 5*x", 2)]).unwrap();
        assert_eq!(l.curvature().unwrap().unwrap(), scalar("5", 2));
        let l = LiftedConnection::new(2, vec![scalar("3*x^2*y^7", 2), scalar("7*x^3*y^6", 2)]).unwrap();
        assert!(l.is_flat().unwrap());
        let l = LiftedConnection::new(1, vec![scalar("x^4", 1)]).unwrap();
        assert_eq!(l.curvature().unwrap(), None);
    }

    #[test]
    fn obstruction_examples() {
        let c = Connection::polynomial(2, vec![vec![vec![poly("x^4*y^5", 2)]], vec![vec![poly("0", 2)]]]).unwrap();
        match obstruction_class(&c, None).unwrap() {
            Obstruction::Obstructed(cls) => {
                assert_eq!(cls.representative, vec![vec![poly("-x^4*y^4", 2)]]);
                assert_eq!(cls.representative_strings(), vec![vec!["4*x1^4*x2^4".to_string()]]);
                assert!(matches!(cls.exactness, Exactness::Cartier { ref nonvanishing } if nonvanishing.len() == 1));
            }
            o => panic!("expected an obstruction, got {o:?}"),
        }
        let triv = Connection::trivial(fp(), 2, 1);
        match obstruction_class(&triv, None).unwrap() {
            Obstruction::Liftable { witness, primitive } => {
                assert_eq!(witness, LiftedConnection::lift(&triv).unwrap());
                assert!(primitive.iter().all(mat_is_zero));
            }
            o => panic!("{o:?}"),
        }
        let e = exponential_module(&poly("x^6*y^3 + 2*x*y^9", 2)).unwrap();
        assert!(matches!(obstruction_class(&e, None).unwrap(), Obstruction::Liftable { .. }));
    }

    #[test]
    fn rank_two_obstruction() {
        let f = fp();
        let z = MultiPoly::zero(f, 2);
        // nilpotent Θ_1 = [[0, x^4 y^5], [0, 0]], Θ_2 = 0: flat mod p,
        // the lift has curvature -p x^4 y^4 in the corner
        let t1 = vec![vec![z.clone(), poly("x^4*y^5", 2)], vec![z.clone(), z.clone()]];
        let t2 = vec![vec![z.clone(), z.clone()], vec![z.clone(), z.clone()]];
        let c = Connection::polynomial(2, vec![t1, t2]).unwrap();
        match obstruction_class(&c, Some(10)).unwrap() {
            Obstruction::Obstructed(cls) => {
                assert_eq!(cls.representative[0][1], poly("-x^4*y^4", 2));
                assert_eq!(cls.exactness, Exactness::Truncated { bound: 10 });
            }
            o => panic!("{o:?}"),
        }
        let t1 = vec![vec![z.clone(), poly("x*y^2", 2)], vec![z.clone(), z.clone()]];
        let t2 = vec![vec![z.clone(), poly("x^2*y", 2)], vec![z.clone(), z.clone()]];
        let c = Connection::polynomial(2, vec![t1, t2]).unwrap();
        assert!(matches!(obstruction_class(&c, Some(6)).unwrap(), Obstruction::Liftable { .. }));
    }

    #[test]
    fn act_on_lift_examples() {
        let triv = LiftedConnection::lift(&Connection::trivial(fp(), 1, 1)).unwrap();
        let one = vec![vec![vec![poly("1", 1)]]];
        assert_eq!(act_on_lift(&triv, &one).unwrap().theta()[0], scalar("5", 1));
        let zero = vec![vec![vec![poly("0", 1)]]];
        assert_eq!(act_on_lift(&triv, &zero).unwrap(), triv);
        let t2 = LiftedConnection::lift(&Connection::trivial(fp(), 2, 1)).unwrap();
        let not_closed = vec![vec![vec![poly("y", 2)]], vec![vec![poly("0", 2)]]];
        assert!(matches!(act_on_lift(&t2, &not_closed), Err(Error::NotClosed(_))));
    }

    #[test]
    fn isomorphism_examples() {
        let triv = LiftedConnection::lift(&Connection::trivial(fp(), 1, 1)).unwrap();
        let shifted = act_on_lift(&triv, &[vec![vec![poly("1", 1)]]]).unwrap();
        let r = lifts_isomorphic(&triv, &shifted, 10).unwrap();
        assert_eq!(r.witness, Some(vec![vec![poly("x", 1)]]));
        let canonical = act_on_lift(&triv, &[vec![vec![poly("x^4", 1)]]]).unwrap();
        for bound in [5, 20, 50] {
            let r = lifts_isomorphic(&triv, &canonical, bound).unwrap();
            assert!(!r.isomorphic());
            assert!(r.bound_sufficient);
        }
        let r = lifts_isomorphic(&canonical, &canonical, 3).unwrap();
        assert_eq!(r.witness, Some(vec![vec![poly("0", 1)]]));
        assert!(r.witness.unwrap().iter().flatten().all(|e| e.is_zero()));
    }

    fn arb_poly(n: usize) -> impl Strategy<Value = MultiPoly<PrimeField>> {
        proptest::collection::vec((0u16..7, 0u16..7, 0u64..P), 0..5).prop_map(move |terms| {
            MultiPoly::from_terms(
                fp(),
                n,
                terms.into_iter().map(|(a, b, c)| {
                    let e = if n == 2 { vec![a, b] } else { vec![a] };
                    (Monomial::from_exps(&e), c)
                }),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn exact_connections_lift(f in arb_poly(2)) {
            let c = exponential_module(&f).unwrap();
            let is_liftable = matches!(obstruction_class(&c, None).unwrap(), Obstruction::Liftable { .. });
            prop_assert!(is_liftable);
        }

        #[test]
        fn obstruction_is_independent_of_the_lift(f in arb_poly(2), a in arb_poly(2), b in arb_poly(2)) {
            // two lifts of the same Θ differ by p·α; their curvatures by p·D(α)
            let c = exponential_module(&f).unwrap();
            let l1 = LiftedConnection::lift(&c).unwrap();
            let alpha = vec![vec![vec![a]], vec![vec![b]]];
            let ring = l1.ring();
            let l2 = LiftedConnection::new(2, l1.theta().iter().zip(&alpha).map(|(t, x)| mat_add(t, &times_p(ring, x))).collect()).unwrap();
            let c1 = div_p_mat(fp(), ring, &l1.curvature().unwrap().unwrap()).unwrap();
            let c2 = div_p_mat(fp(), ring, &l2.curvature().unwrap().unwrap()).unwrap();
            let theta = c.polynomial_theta().unwrap();
            prop_assert_eq!(mat_sub(&c2, &c1), d_one(&theta, &alpha).unwrap());
        }

        #[test]
        fn torsor_on_the_line(g in arb_poly(1), a in arb_poly(1)) {
            let l1 = LiftedConnection::lift(&exponential_module(&g).unwrap()).unwrap();
            let ring = l1.ring();
            let l2 = LiftedConnection::new(1, vec![mat_add(&l1.theta()[0], &times_p(ring, &vec![vec![a.clone()]]))]).unwrap();
            let diff = div_p_mat(fp(), ring, &mat_sub(&l2.theta()[0], &l1.theta()[0])).unwrap();
            prop_assert_eq!(act_on_lift(&l1, &[diff]).unwrap(), l2);
        }

        #[test]
        fn exact_action_is_trivial(g in arb_poly(1), eta in arb_poly(1)) {
            let c = exponential_module(&g).unwrap();
            let l = LiftedConnection::lift(&c).unwrap();
            let eta = vec![vec![eta]];
            let d = d_zero(&c.polynomial_theta().unwrap(), &eta).unwrap();
            let moved = act_on_lift(&l, &d).unwrap();
            let r = lifts_isomorphic(&l, &moved, 8).unwrap();
            prop_assert!(r.isomorphic());
            let recon = d_zero(&c.polynomial_theta().unwrap(), r.witness.as_ref().unwrap()).unwrap();
            prop_assert_eq!(recon, d);
        }
    }
}
