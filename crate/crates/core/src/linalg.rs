//! Dense complex matrix kernels.
//!
//! Everything here works on small (`dim <= 64`) dense matrices backed by
//! `nalgebra`. Eigenvalues and singular values are always returned in
//! descending order so that downstream pairings are deterministic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default tolerances shared by the whole crate.
pub mod tol {
    /// Hermiticity and positivity checks.
    pub const HERMITIAN: f64 = 1e-8;
    /// Absolute eigenvalue cutoff for numerical rank on unit-trace matrices.
    pub const RANK: f64 = 1e-8;
    /// Reconstruction checks.
    pub const RECONSTRUCTION: f64 = 1e-9;
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn ensure_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `|v><v|`
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// `||U^dagger U - I||_max`
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns, column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&x| real(x)),
        ));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    /// Reassemble with `f` applied to every eigenvalue.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvectors.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(i);
            out += (v * v.adjoint()) * real(f(lambda));
        }
        out
    }
}

pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let defect = hermiticity_defect(m);
    if defect > tol::HERMITIAN {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let sym = (m + m.adjoint()) * real(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<CVector> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: CMatrix::from_columns(&cols),
    })
}

/// Thin singular value decomposition `m = U diag(s) V^dagger`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// `rows x k` with `k = min(rows, cols)`.
    pub u: CMatrix,
    /// `cols x k`.
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let k = self.singular_values.len();
        let s = CMatrix::from_diagonal(&DVector::from_iterator(
            k,
            self.singular_values.iter().map(|&x| real(x)),
        ));
        &self.u * s * self.v.adjoint()
    }
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
///
/// `nalgebra`'s complex SVD returns inaccurate factors (recomposition
/// errors around `1e-3`) for some rank-deficient inputs when singular
/// vectors are requested, so the factorization is done here. Jacobi also
/// gives small singular values to high relative accuracy, which the
/// canonical-angle code relies on.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if rows < cols {
        let t = svd(&m.adjoint())?;
        return Ok(Svd {
            singular_values: t.singular_values,
            u: t.v,
            v: t.u,
        });
    }
    if cols == 0 {
        return Ok(Svd {
            singular_values: Vec::new(),
            u: CMatrix::zeros(rows, 0),
            v: CMatrix::zeros(cols, 0),
        });
    }

    let mut a = m.clone();
    let mut v = CMatrix::identity(cols, cols);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g < f64::MIN_POSITIVE {
                    continue;
                }
                rotated = true;
                // rotate (a_p, a_q e^{-i phi}) by a real Jacobi rotation
                let phase = gamma / real(g);
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = xp * real(c) - xq * real(s);
                        mat[(i, q)] = xp * real(s) + xq * real(c);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let largest = norms[order[0]];
    let floor = largest * f64::EPSILON * cols as f64;

    let mut u_cols: Vec<CVector> = Vec::with_capacity(cols);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if norms[j] > floor && norms[j] > 0.0 {
            u_cols.push(a.column(j) / real(norms[j]));
        } else {
            u_cols.push(CVector::zeros(rows));
            missing.push(slot);
        }
    }
    if !missing.is_empty() {
        let kept: Vec<CVector> = u_cols
            .iter()
            .enumerate()
            .filter(|(i, _)| !missing.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        let fill = orthonormal_complement(&columns_to_matrix(rows, &kept));
        for (k, &slot) in missing.iter().enumerate() {
            u_cols[slot] = fill.column(k).into_owned();
        }
    }
    let v_cols: Vec<CVector> = order.iter().map(|&j| v.column(j).into_owned()).collect();
    Ok(Svd {
        singular_values: order.iter().map(|&j| norms[j]).collect(),
        u: CMatrix::from_columns(&u_cols),
        v: CMatrix::from_columns(&v_cols),
    })
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// `[-tol, 0)` are clamped to zero, and eigenvalues at round-off level
/// relative to the largest one are dropped so that the square root does not
/// amplify them to `~1e-8`.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -tol::HERMITIAN {
            return Err(Error::NotPositive(min));
        }
    }
    let floor = 64.0 * f64::EPSILON * eig.eigenvalues.first().map_or(0.0, |x| x.abs());
    Ok(eig.map_spectrum(|x| if x > floor { x.sqrt() } else { 0.0 }))
}

/// `tr|m|`, the sum of singular values. No factor one half.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    ensure_square(m)?;
    Ok(svd(m)?.singular_values.iter().sum())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Which tensor factor survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on `A (x) B` with the factor order of
/// [`kron`].
pub fn partial_trace(m: &CMatrix, dim_a: usize, dim_b: usize, keep: Keep) -> Result<CMatrix> {
    let n = dim_a * dim_b;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, subsystem dims {}x{}",
            m.nrows(),
            m.ncols(),
            dim_a,
            dim_b
        )));
    }
    let out = match keep {
        Keep::A => CMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Keep::B => CMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|k| m[(k * dim_b + i, k * dim_b + j)]).sum()
        }),
    };
    Ok(out)
}

/// Orthonormal basis (as columns) of the span of eigenvectors whose
/// eigenvalue exceeds `rank_tol`.
pub fn range_basis(m: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -tol::HERMITIAN {
            return Err(Error::NotPositive(min));
        }
    }
    let rank = eig.eigenvalues.iter().filter(|&&x| x > rank_tol).count();
    Ok(eig.eigenvectors.columns(0, rank).into_owned())
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `q`, which must have orthonormal columns.
pub fn orthonormal_complement(q: &CMatrix) -> CMatrix {
    let n = q.nrows();
    let proj = CMatrix::identity(n, n) - q * q.adjoint();
    let eig = hermitian_eig(&proj).expect("complement projector is Hermitian");
    let count = eig.eigenvalues.iter().filter(|&&x| x > 0.5).count();
    eig.eigenvectors.columns(0, count).into_owned()
}

/// Stack column vectors into a matrix; an empty list gives `n x 0`.
pub fn columns_to_matrix(n: usize, cols: &[CVector]) -> CMatrix {
    if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let a = random_matrix(rng, n, n);
        (&a + a.adjoint()) * real(0.5)
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let a = random_matrix(rng, n, n);
        &a * a.adjoint()
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = hermitian_eig(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);

        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(3.0)]));
        let e = hermitian_eig(&d).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!((e.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((e.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 6, 16] {
            let m = random_hermitian(&mut rng, n);
            let e = hermitian_eig(&m).unwrap();
            assert!(max_abs(&(e.reconstruct() - &m)) <= 1e-10);
            assert!(unitarity_defect(&e.eigenvectors) <= 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_rejects_bad_input() {
        assert!(matches!(
            hermitian_eig(&CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = real(1e-6);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn svd_cases() {
        let z = svd(&CMatrix::zeros(3, 2)).unwrap();
        assert!(z.singular_values.iter().all(|&s| s == 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 3);
        let unitary = hermitian_eig(&h).unwrap().eigenvectors;
        let s = svd(&unitary).unwrap();
        for x in s.singular_values {
            assert!((x - 1.0).abs() < 1e-12);
        }

        let m = random_matrix(&mut rng, 4, 2);
        let s = svd(&m).unwrap();
        assert_eq!(s.u.shape(), (4, 2));
        assert_eq!(s.v.shape(), (2, 2));
        assert!(max_abs(&(s.reconstruct() - &m)) <= 1e-10);
        assert!(s.singular_values[0] >= s.singular_values[1]);
        assert!(unitarity_defect(&s.u) <= 1e-10);
    }

    #[test]
    fn svd_rank_deficient_and_wide() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 2..6 {
            for rank in 1..n {
                let m = random_matrix(&mut rng, n, rank) * random_matrix(&mut rng, rank, n);
                let s = svd(&m).unwrap();
                assert!(max_abs(&(s.reconstruct() - &m)) <= 1e-12);
                assert!(unitarity_defect(&s.u) <= 1e-12 && unitarity_defect(&s.v) <= 1e-12);
                let reference = m.clone().singular_values();
                let mut reference: Vec<f64> = reference.iter().copied().collect();
                reference.sort_by(|a, b| b.total_cmp(a));
                for (x, y) in s.singular_values.iter().zip(&reference) {
                    assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
                }
                assert!(s.singular_values[rank..].iter().all(|&x| x <= 1e-12));
            }
        }
        let wide = random_matrix(&mut rng, 2, 5);
        let s = svd(&wide).unwrap();
        assert_eq!((s.u.shape(), s.v.shape()), ((2, 2), (5, 2)));
        assert!(max_abs(&(s.reconstruct() - &wide)) <= 1e-12);
    }

    #[test]
    fn sqrt_cases() {
        let i = CMatrix::identity(3, 3);
        assert!(max_abs(&(psd_sqrt(&i).unwrap() - &i)) < 1e-14);

        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![real(4.0), real(9.0)]));
        let s = psd_sqrt(&d).unwrap();
        assert!((s[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((s[(1, 1)].re - 3.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let m = random_psd(&mut rng, 4);
            let s = psd_sqrt(&m).unwrap();
            assert!(max_abs(&(&s * &s - &m)) <= 1e-9);
            assert!(hermiticity_defect(&s) <= 1e-12);
        }

        let neg = CMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(-1e-3)]));
        assert!(matches!(psd_sqrt(&neg), Err(Error::NotPositive(_))));
        let tiny = CMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(-1e-10)]));
        assert!(psd_sqrt(&tiny).is_ok());
    }

    #[test]
    fn trace_norm_cases() {
        assert!((trace_norm(&CMatrix::identity(5, 5)).unwrap() - 5.0).abs() < 1e-12);
        let sign = CMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(-1.0)]));
        assert!((trace_norm(&sign).unwrap() - 2.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_hermitian(&mut rng, 5);
            let oracle: f64 = hermitian_eig(&m)
                .unwrap()
                .eigenvalues
                .iter()
                .map(|x| x.abs())
                .sum();
            assert!((trace_norm(&m).unwrap() - oracle).abs() <= 1e-10);
        }
    }

    #[test]
    fn kron_matches_index_formula() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
        let p = CMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(0.0)]));
        let pp = kron(&p, &p);
        assert_eq!(pp[(0, 0)], real(1.0));
        assert_eq!(trace(&pp), real(1.0));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 2, 2);
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for k2 in 0..2 {
                    for l in 0..2 {
                        assert_eq!(k[(2 * i + k2, 2 * j + l)], a[(i, j)] * b[(k2, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_psd(&mut rng, 2);
        let b = random_psd(&mut rng, 3);
        let ab = kron(&a, &b);
        let ta = partial_trace(&ab, 2, 3, Keep::A).unwrap();
        assert!(max_abs(&(ta - &a * trace(&b))) < 1e-12);
        let tb = partial_trace(&ab, 2, 3, Keep::B).unwrap();
        assert!(max_abs(&(tb - &b * trace(&a))) < 1e-12);

        let s = 1.0 / 2f64.sqrt();
        let bell = CVector::from_vec(vec![real(s), real(0.0), real(0.0), real(s)]);
        let r = partial_trace(&outer(&bell), 2, 2, Keep::A).unwrap();
        assert!(max_abs(&(r - CMatrix::identity(2, 2) * real(0.5))) < 1e-15);

        assert!(matches!(
            partial_trace(&CMatrix::identity(5, 5), 2, 2, Keep::A),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn partial_trace_matches_index_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_psd(&mut rng, 4);
        let kept_a = partial_trace(&m, 2, 2, Keep::A).unwrap();
        let kept_b = partial_trace(&m, 2, 2, Keep::B).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut sa = C64::new(0.0, 0.0);
                let mut sb = C64::new(0.0, 0.0);
                for k in 0..2 {
                    sa += m[(2 * i + k, 2 * j + k)];
                    sb += m[(2 * k + i, 2 * k + j)];
                }
                assert!((kept_a[(i, j)] - sa).norm() <= 1e-12);
                assert!((kept_b[(i, j)] - sb).norm() <= 1e-12);
            }
        }
        assert!((trace(&kept_a) - trace(&m)).norm() <= 1e-12);
    }

    #[test]
    fn range_basis_cases() {
        let v = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let q = range_basis(&outer(&v), tol::RANK).unwrap();
        assert_eq!(q.ncols(), 1);
        let overlap = (q.column(0).adjoint() * &v)[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-12);

        let mixed = CMatrix::identity(3, 3) * real(1.0 / 3.0);
        assert_eq!(range_basis(&mixed, tol::RANK).unwrap().ncols(), 3);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_matrix(&mut rng, 4, 2);
        let m = &x * x.adjoint();
        let q = range_basis(&m, tol::RANK).unwrap();
        assert_eq!(q.ncols(), 2);
        let support = range_basis(&m, tol::RANK)
            .map(|q| &q * q.adjoint())
            .unwrap();
        // independent support projector: x (x^dag x)^{-1} x^dag
        let gram_inv = (x.adjoint() * &x).try_inverse().unwrap();
        let oracle = &x * gram_inv * x.adjoint();
        assert!(max_abs(&(support - oracle)) <= 1e-9);
    }

    #[test]
    fn complement_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_matrix(&mut rng, 5, 2);
        let q = range_basis(&(&x * x.adjoint()), tol::RANK).unwrap();
        let comp = orthonormal_complement(&q);
        assert_eq!(comp.ncols(), 3);
        assert!(max_abs(&(q.adjoint() * &comp)) < 1e-12);
    }
}
