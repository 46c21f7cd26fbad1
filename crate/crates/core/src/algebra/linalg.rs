//! Dense exact linear algebra over a field: row reduction, kernels,
//! solving, matrix products.

use super::field::Field;

pub type Mat<F> = Vec<Vec<<F as super::field::Ring>::Elem>>;

pub fn zeros<F: Field>(f: &F, rows: usize, cols: usize) -> Mat<F> {
    vec![vec![f.zero(); cols]; rows]
}

pub fn identity<F: Field>(f: &F, n: usize) -> Mat<F> {
    let mut m = zeros(f, n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = f.one();
    }
    m
}

pub fn mat_mul<F: Field>(f: &F, a: &Mat<F>, b: &Mat<F>) -> Mat<F> {
    let cols = b.first().map_or(0, |r| r.len());
    let mut out = zeros(f, a.len(), cols);
    for (i, row) in a.iter().enumerate() {
        for (k, aik) in row.iter().enumerate() {
            if f.is_zero(aik) {
                continue;
            }
            for (j, bkj) in b[k].iter().enumerate() {
                if !f.is_zero(bkj) {
                    out[i][j] = f.add(&out[i][j], &f.mul(aik, bkj));
                }
            }
        }
    }
    out
}

pub fn mat_add<F: Field>(f: &F, a: &Mat<F>, b: &Mat<F>) -> Mat<F> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| f.add(u, v)).collect())
        .collect()
}

pub fn mat_scale<F: Field>(f: &F, a: &Mat<F>, c: &F::Elem) -> Mat<F> {
    a.iter().map(|r| r.iter().map(|u| f.mul(u, c)).collect()).collect()
}

pub fn mat_pow<F: Field>(f: &F, a: &Mat<F>, mut e: u64) -> Mat<F> {
    let mut base = a.clone();
    let mut acc = identity(f, a.len());
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(f, &acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mat_mul(f, &base, &base);
        }
    }
    acc
}

pub fn is_zero_mat<F: Field>(f: &F, a: &Mat<F>) -> bool {
    a.iter().all(|r| r.iter().all(|x| f.is_zero(x)))
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<F: Field>(f: &F, m: &mut Mat<F>) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !f.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(r, pr);
        let inv = f.inv(&m[r][c]).unwrap();
        for x in m[r].iter_mut() {
            *x = f.mul(x, &inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || f.is_zero(&row[c]) {
                continue;
            }
            let factor = row[c].clone();
            for (x, pv) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !f.is_zero(pv) {
                    *x = f.sub(x, &f.mul(&factor, pv));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(f: &F, m: &Mat<F>) -> usize {
    let mut a = m.clone();
    rref(f, &mut a).len()
}

/// Basis of `{v : M v = 0}` for an `rows x cols` matrix.
pub fn kernel<F: Field>(f: &F, m: &Mat<F>, cols: usize) -> Vec<Vec<F::Elem>> {
    let mut a = m.clone();
    let pivots = rref(f, &mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![f.zero(); cols];
            v[fc] = f.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(&a[r][fc]);
            }
            v
        })
        .collect()
}

/// A solution of `M x = b`, if one exists.
pub fn solve<F: Field>(f: &F, m: &Mat<F>, b: &[F::Elem], cols: usize) -> Option<Vec<F::Elem>> {
    let mut aug: Mat<F> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(f, &mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![f.zero(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[r][cols].clone();
    }
    Some(x)
}

pub fn inverse<F: Field>(f: &F, m: &Mat<F>) -> Option<Mat<F>> {
    let n = m.len();
    let mut aug: Mat<F> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { f.one() } else { f.zero() }));
            r
        })
        .collect();
    let pivots = rref(f, &mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Rows of `m` reduced to an echelon basis of the row space.
pub fn row_space<F: Field>(f: &F, m: &Mat<F>) -> Mat<F> {
    let mut a = m.clone();
    let k = rref(f, &mut a).len();
    a.truncate(k);
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{PrimeField, Ring};

    #[test]
    fn kernel_and_solve() {
        let f = PrimeField::new(5).unwrap();
        let m: Mat<PrimeField> = vec![vec![1, 2, 3], vec![2, 4, 2]];
        let k = kernel(&f, &m, 3);
        assert_eq!(k.len(), 1);
        for v in &k {
            for row in &m {
                let s = row.iter().zip(v).fold(0, |acc, (a, b)| f.add(&acc, &f.mul(a, b)));
                assert_eq!(s, 0);
            }
        }
        let x = solve(&f, &m, &[1, 2], 3).unwrap();
        assert_eq!(mat_mul(&f, &m, &x.iter().map(|v| vec![*v]).collect()), vec![vec![1], vec![2]]);
        assert!(solve(&f, &vec![vec![1, 2], vec![2, 4]], &[1, 1], 2).is_none());
    }

    #[test]
    fn inverse_roundtrip() {
        let f = PrimeField::new(7).unwrap();
        let m: Mat<PrimeField> = vec![vec![1, 2], vec![3, 4]];
        let inv = inverse(&f, &m).unwrap();
        assert_eq!(mat_mul(&f, &m, &inv), identity(&f, 2));
        assert!(inverse(&f, &vec![vec![1, 2], vec![2, 4]]).is_none());
    }
}
