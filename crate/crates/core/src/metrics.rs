//! Distinguishability and overlap functionals on pairs of states.

use crate::error::{Error, Result};
use crate::linalg::{self, orthonormal_complement, psd_sqrt, svd, tol, CMatrix};
use crate::states::DensityMatrix;

fn ensure_same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states have dims {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `1/2 tr|rho - sigma|`, clamped to `[0, 1]`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    ensure_same_dim(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    let eig = linalg::hermitian_eig(&diff)?;
    let d = 0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// Uhlmann fidelity `tr sqrt(sqrt(rho) sigma sqrt(rho))` (not squared),
/// clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    ensure_same_dim(rho, sigma)?;
    let root = psd_sqrt(rho.matrix())?;
    let inner = &root * sigma.matrix() * &root;
    let inner = (&inner + inner.adjoint()) * linalg::real(0.5);
    let f = linalg::trace(&psd_sqrt(&inner)?).re;
    Ok(f.clamp(0.0, 1.0))
}

/// Canonical (principal) angles between the ranges of two states, with
/// paired canonical bases.
///
/// Column `i` of `basis_a` and column `i` of `basis_b` satisfy
/// `<a_i|b_j> = 0` for `i != j` and `<a_i|b_i> = cos(angles[i]) >= 0`.
/// When the ranks differ, the leftover range vectors of the larger side go
/// to `residual_a` / `residual_b`; they are orthogonal to everything on the
/// other side.
#[derive(Debug, Clone)]
pub struct CanonicalAngles {
    /// Ascending, in `[0, pi/2]`.
    pub angles: Vec<f64>,
    pub basis_a: CMatrix,
    pub basis_b: CMatrix,
    pub residual_a: CMatrix,
    pub residual_b: CMatrix,
}

impl CanonicalAngles {
    pub fn min_angle(&self) -> f64 {
        self.angles[0]
    }

    /// Sine of the smallest angle.
    pub fn wcd(&self) -> f64 {
        self.min_angle().sin().clamp(0.0, 1.0)
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

pub fn canonical_angles(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    rank_tol: f64,
) -> Result<CanonicalAngles> {
    ensure_same_dim(rho, sigma)?;
    let qa = rho.range_basis(rank_tol);
    let qb = sigma.range_basis(rank_tol);
    subspace_angles(&qa, &qb)
}

/// Canonical angles between the column spans of two matrices with
/// orthonormal columns.
///
/// Large angles come from the cosines (singular values of `Qa^dagger Qb`),
/// small ones from the sines (singular values of `(I - Qa Qa^dagger) Qb`),
/// which keeps both ends of the range accurate.
pub fn subspace_angles(qa: &CMatrix, qb: &CMatrix) -> Result<CanonicalAngles> {
    if qa.nrows() != qb.nrows() {
        return Err(Error::DimensionMismatch("ambient dimensions differ".into()));
    }
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return Err(Error::InvalidArgument("empty subspace".into()));
    }
    let n = qa.nrows();
    let overlap = qa.adjoint() * qb;
    let cos_svd = svd(&overlap)?;
    let k = cos_svd.singular_values.len();

    let reject = (CMatrix::identity(n, n) - qa * qa.adjoint()) * qb;
    let mut sines = svd(&reject)?.singular_values;
    sines.reverse();

    let angles: Vec<f64> = cos_svd
        .singular_values
        .iter()
        .zip(&sines)
        .map(|(&cos, &sin)| {
            let cos = cos.min(1.0);
            if cos * cos >= 0.5 {
                sin.min(1.0).asin()
            } else {
                cos.acos()
            }
        })
        .collect();

    let basis_a = qa * &cos_svd.u;
    let basis_b = qb * &cos_svd.v;
    let residual_a = if qa.ncols() > k {
        qa * orthonormal_complement(&cos_svd.u)
    } else {
        CMatrix::zeros(n, 0)
    };
    let residual_b = if qb.ncols() > k {
        qb * orthonormal_complement(&cos_svd.v)
    } else {
        CMatrix::zeros(n, 0)
    };

    Ok(CanonicalAngles {
        angles,
        basis_a,
        basis_b,
        residual_a,
        residual_b,
    })
}

/// Worst-case distinguishability: the smallest trace distance between pure
/// states drawn from the two ranges, i.e. the sine of the smallest
/// canonical angle.
pub fn wcd(rho: &DensityMatrix, sigma: &DensityMatrix, rank_tol: f64) -> Result<f64> {
    Ok(canonical_angles(rho, sigma, rank_tol)?.wcd())
}

/// `(alpha, beta)` with `sin(alpha) = wcd` and `cos(beta) = fidelity`.
pub fn alpha_beta(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(f64, f64)> {
    let alpha = wcd(rho, sigma, tol::RANK)?.asin();
    let beta = fidelity(rho, sigma)?.acos();
    Ok((alpha, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, real, CVector};
    use crate::states::{figure_example, random_mixed, PureStateVector};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn ket(v: &[f64]) -> DensityMatrix {
        PureStateVector::normalized(CVector::from_iterator(v.len(), v.iter().map(|&x| real(x))))
            .unwrap()
            .to_density()
    }

    #[test]
    fn trace_distance_values() {
        let zero = ket(&[1.0, 0.0]);
        let one = ket(&[0.0, 1.0]);
        let plus = ket(&[1.0, 1.0]);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&plus, &plus).unwrap().abs() < 1e-14);
        // closed form sqrt(1 - |<0|+>|^2)
        let expected = (1.0f64 - 0.5).sqrt();
        assert!((trace_distance(&zero, &plus).unwrap() - expected).abs() < 1e-12);
        assert!((expected - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(trace_distance(&zero, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn fidelity_values() {
        let zero = ket(&[1.0, 0.0]);
        let one = ket(&[0.0, 1.0]);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&mixed, &zero).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
        let a = random_mixed(4, 3, 1).unwrap();
        let b = random_mixed(4, 2, 2).unwrap();
        let ab = fidelity(&a, &b).unwrap();
        let ba = fidelity(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-9);
    }

    #[test]
    fn canonical_angles_identical_and_orthogonal() {
        let rho = random_mixed(4, 3, 5).unwrap();
        let ca = canonical_angles(&rho, &rho, tol::RANK).unwrap();
        assert_eq!(ca.len(), 3);
        assert!(ca.angles.iter().all(|a| a.abs() < 1e-8));
        assert!(wcd(&rho, &rho, tol::RANK).unwrap() < 1e-8);

        let a = DensityMatrix::diagonal(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        let b = DensityMatrix::diagonal(&[0.0, 0.0, 0.3, 0.7]).unwrap();
        let ca = canonical_angles(&a, &b, tol::RANK).unwrap();
        assert!(ca.angles.iter().all(|x| (x - FRAC_PI_2).abs() < 1e-12));
        assert_eq!(wcd(&a, &b, tol::RANK).unwrap(), 1.0);
    }

    #[test]
    fn canonical_pairing_invariants() {
        for seed in 0..30 {
            let a = random_mixed(4, 2, 2 * seed).unwrap();
            let b = random_mixed(4, 2, 2 * seed + 1).unwrap();
            let ca = canonical_angles(&a, &b, tol::RANK).unwrap();
            let g = ca.basis_a.adjoint() * &ca.basis_b;
            for i in 0..ca.len() {
                for j in 0..ca.len() {
                    if i == j {
                        assert!((g[(i, i)].norm() - ca.angles[i].cos()).abs() <= 1e-8);
                    } else {
                        assert!(g[(i, j)].norm() <= 1e-8);
                    }
                }
            }
            assert!(ca.angles.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        }
    }

    #[test]
    fn residuals_cover_larger_range() {
        let a = random_mixed(5, 3, 17).unwrap();
        let b = random_mixed(5, 1, 18).unwrap();
        let ca = canonical_angles(&a, &b, tol::RANK).unwrap();
        assert_eq!(ca.len(), 1);
        assert_eq!(ca.residual_a.ncols(), 2);
        assert_eq!(ca.residual_b.ncols(), 0);
        let mut all = ca.basis_a.clone().resize_horizontally(3, real(0.0));
        all.columns_mut(1, 2).copy_from(&ca.residual_a);
        let proj = &all * all.adjoint();
        let q = a.range_basis(tol::RANK);
        assert!(max_abs(&(proj - &q * q.adjoint())) <= 1e-8);
        assert!(max_abs(&(ca.residual_a.adjoint() * &ca.basis_b)) <= 1e-8);
    }

    #[test]
    fn wcd_figure_anchor() {
        let e = figure_example(0.0).unwrap();
        let w = wcd(&e.states()[0], &e.states()[1], tol::RANK).unwrap();
        assert!(w.abs() <= 1e-9);
    }

    #[test]
    fn wcd_zero_when_ranges_share_a_vector() {
        let a = DensityMatrix::diagonal(&[0.5, 0.5, 0.0]).unwrap();
        let b = (ket(&[0.0, 1.0, 0.0]).matrix() * real(0.4))
            + ket(&[0.0, 0.0, 1.0]).matrix() * real(0.6);
        let b = DensityMatrix::new(b).unwrap();
        assert!(wcd(&a, &b, tol::RANK).unwrap() <= 1e-12);
    }

    #[test]
    fn alpha_beta_limits() {
        let rho = random_mixed(3, 2, 4).unwrap();
        let (a, b) = alpha_beta(&rho, &rho).unwrap();
        assert!(a.abs() < 1e-7 && b.abs() < 1e-6);
        let x = ket(&[1.0, 0.0]);
        let y = ket(&[0.0, 1.0]);
        let (a, b) = alpha_beta(&x, &y).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-12 && (b - FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn alpha_beta_figure_bracket() {
        let e = figure_example(FRAC_PI_4).unwrap();
        let (a, b) = alpha_beta(&e.states()[0], &e.states()[1]).unwrap();
        let upper = 0.5 * (b - a).sin();
        assert!((upper - 0.0072).abs() < 0.0005, "{upper}");
    }
}
