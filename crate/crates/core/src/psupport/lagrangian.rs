//! Dimension and isotropy checks for support components.

use crate::algebra::{linalg, ExtField, MultiPoly, PForm, PrimeField, Ring};
use crate::error::{Error, Result};
use crate::groebner::{krull_dimension, Budget, Ideal};

/// Smooth points sought per component.
pub const ISOTROPY_SAMPLES: usize = 5;
/// Largest extension degree searched for smooth points.
pub const MAX_EXTENSION: usize = 6;
/// Total point evaluations allowed across all extensions.
pub const MAX_EVALUATIONS: u64 = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropySample {
    /// Size of the field the point lives over.
    pub field_size: u64,
    /// Coordinates `X_1..X_n, s_1..s_n`, each a coefficient vector over `F_p`.
    pub point: Vec<Vec<u64>>,
    pub isotropic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagrangianReport {
    pub dimension: i64,
    pub dim_ok: bool,
    pub samples: Vec<IsotropySample>,
}

impl LagrangianReport {
    pub fn is_candidate(&self) -> bool {
        self.dim_ok && self.samples.iter().all(|s| s.isotropic)
    }
}

/// Checks `dim V(I) = n` and that `dX ∧ ds` vanishes on the tangent spaces
/// at a few smooth points, found by brute force over `F_{p^k}`.
pub fn is_lagrangian_candidate(ideal: &Ideal<PrimeField>, budget: &Budget) -> Result<LagrangianReport> {
    let nv = ideal.nvars();
    let n = nv / 2;
    let dimension = krull_dimension(ideal, budget)?;
    let dim_ok = dimension == n as i64;
    let mut report = LagrangianReport {
        dimension,
        dim_ok,
        samples: Vec::new(),
    };
    if !dim_ok {
        return Ok(report);
    }
    let base = *ideal.ring();
    let mut spent = 0u64;
    for k in 1..=MAX_EXTENSION {
        let ext = ExtField::new(base, k);
        let q = ext.size();
        let embed = |g: &MultiPoly<PrimeField>| g.map_coeffs(ext.clone(), |c| ext.embed(*c));
        let gens: Vec<_> = ideal.generators().iter().map(embed).collect();
        let jac: Vec<Vec<_>> = ideal
            .generators()
            .iter()
            .map(|g| (0..nv).map(|j| g.diff(j).map(|d| embed(&d))).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let omega = PForm::symplectic(ext.clone(), n);
        let total = q.checked_pow(nv as u32).unwrap_or(u64::MAX);
        for idx in 0..total {
            if spent >= MAX_EVALUATIONS {
                break;
            }
            spent += 1;
            let mut rest = idx;
            let point: Vec<Vec<u64>> = (0..nv)
                .map(|_| {
                    let e = ext.element(rest % q);
                    rest /= q;
                    e
                })
                .collect();
            if !gens.iter().all(|g| ext.is_zero(&g.eval(&point))) {
                continue;
            }
            let j: Vec<Vec<Vec<u64>>> = jac.iter().map(|row| row.iter().map(|d| d.eval(&point)).collect()).collect();
            if linalg::rank(&ext, &j) != nv - n {
                continue;
            }
            let tangent = linalg::kernel(&ext, &j, nv);
            let mut isotropic = true;
            for a in 0..tangent.len() {
                for b in a + 1..tangent.len() {
                    if !ext.is_zero(&omega.eval_pair(&point, &tangent[a], &tangent[b])) {
                        isotropic = false;
                    }
                }
            }
            report.samples.push(IsotropySample {
                field_size: q,
                point,
                isotropic,
            });
            if report.samples.len() >= ISOTROPY_SAMPLES {
                return Ok(report);
            }
        }
        if !report.samples.is_empty() || spent >= MAX_EVALUATIONS {
            break;
        }
    }
    if report.samples.is_empty() {
        return Err(Error::NoSmoothSample(format!(
            "no smooth point found over F_{{p^k}} for k <= {MAX_EXTENSION} within {MAX_EVALUATIONS} evaluations"
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::tests::center_ideal;
    use super::*;

    #[test]
    fn lagrangian_examples() {
        let b = Budget::default();
        let r = is_lagrangian_candidate(&center_ideal(5, 1, &["s1^2 - X1"]), &b).unwrap();
        assert!(r.dim_ok && r.is_candidate());
        assert!(!r.samples.is_empty());
        let r = is_lagrangian_candidate(&center_ideal(5, 2, &["s1 - X2", "s2 - X1"]), &b).unwrap();
        assert!(r.is_candidate());
        // graph of a non-symmetric linear map is not isotropic
        let r = is_lagrangian_candidate(&center_ideal(5, 2, &["s1 - X2", "s2"]), &b).unwrap();
        assert!(r.dim_ok);
        assert!(!r.is_candidate());
        let r = is_lagrangian_candidate(&center_ideal(5, 2, &["s1"]), &b).unwrap();
        assert_eq!(r.dimension, 3);
        assert!(!r.is_candidate());
        let r = is_lagrangian_candidate(&Ideal::zero(crate::algebra::PrimeField::new(5).unwrap(), 2), &b).unwrap();
        assert_eq!(r.dimension, 2);
        assert!(!r.dim_ok && r.samples.is_empty());
        let r = is_lagrangian_candidate(&center_ideal(5, 1, &["X1", "s1"]), &b).unwrap();
        assert_eq!(r.dimension, 0);
        assert!(!r.dim_ok);
    }

    #[test]
    fn smooth_points_may_need_an_extension() {
        // X^2 + 1 has no roots in F_3
        let b = Budget::default();
        let r = is_lagrangian_candidate(&center_ideal(3, 1, &["X1^2 + 1"]), &b).unwrap();
        assert!(r.samples.iter().all(|s| s.field_size == 9));
        assert!(r.is_candidate());
    }
}
