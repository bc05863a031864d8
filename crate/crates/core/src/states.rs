//! Validated quantum states, ensembles with priors, and seeded generators.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::MatrixJson;
use crate::linalg::{
    self, c, hermitian_eig, kron, outer, real, tol, CMatrix, CVector, HermitianEigen,
};

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates and stores the Hermitian part of `matrix`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let eig = hermitian_eig(&matrix)?;
        let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if min < -tol::HERMITIAN {
            return Err(Error::NotPositive(min));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > tol::HERMITIAN || tr.im.abs() > tol::HERMITIAN {
            return Err(Error::BadTrace(tr.re));
        }
        let matrix = (&matrix + matrix.adjoint()) * real(0.5);
        Ok(Self { matrix })
    }

    pub fn from_pure(state: &PureStateVector) -> Self {
        Self {
            matrix: outer(&state.amplitudes),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim) * real(1.0 / dim as f64),
        }
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| real(p)),
        ));
        Self::new(d)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eig(&self.matrix).expect("density matrix is Hermitian")
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> Vec<f64> {
        self.eigen().eigenvalues
    }

    pub fn rank(&self, rank_tol: f64) -> usize {
        self.spectrum().iter().filter(|&&x| x > rank_tol).count()
    }

    /// Orthonormal basis of the support, as columns.
    pub fn range_basis(&self, rank_tol: f64) -> CMatrix {
        linalg::range_basis(&self.matrix, rank_tol).expect("density matrix is PSD")
    }

    /// `tr rho^2`
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        1.0 - self.purity() <= tol
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// `U rho U^dagger`; `u` must be unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        let defect = linalg::unitarity_defect(u);
        if u.nrows() != u.ncols() || defect > 1e-9 {
            return Err(Error::NotUnitary(defect));
        }
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state has dim {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        DensityMatrix::new(u * &self.matrix * u.adjoint())
    }
}

impl TryFrom<MatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(value: MatrixJson) -> Result<Self> {
        DensityMatrix::new(value.to_matrix()?)
    }
}

impl From<DensityMatrix> for MatrixJson {
    fn from(value: DensityMatrix) -> Self {
        MatrixJson::from_matrix(&value.matrix)
    }
}

/// Unit vector in `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    amplitudes: CVector,
}

impl PureStateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("empty state vector".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `v` to unit norm.
    pub fn normalized(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            amplitudes: v / real(norm),
        })
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut v = CVector::zeros(dim);
        v[index] = real(1.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureStateVector) -> linalg::C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn tensor(&self, other: &PureStateVector) -> PureStateVector {
        PureStateVector {
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// States with a-priori probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "EnsembleJson", into = "EnsembleJson")]
pub struct Ensemble {
    states: Vec<DensityMatrix>,
    priors: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleJson {
    priors: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl TryFrom<EnsembleJson> for Ensemble {
    type Error = Error;

    fn try_from(value: EnsembleJson) -> Result<Self> {
        Ensemble::new(value.states, value.priors)
    }
}

impl From<Ensemble> for EnsembleJson {
    fn from(value: Ensemble) -> Self {
        EnsembleJson {
            priors: value.priors,
            states: value.states,
        }
    }
}

impl Ensemble {
    pub fn new(states: Vec<DensityMatrix>, priors: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidPriors("ensemble is empty".into()));
        }
        if states.len() != priors.len() {
            return Err(Error::InvalidPriors(format!(
                "{} states but {} priors",
                states.len(),
                priors.len()
            )));
        }
        if let Some(p) = priors.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidPriors(format!("prior {p} is not positive")));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidPriors(format!("priors sum to {total}")));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "ensemble states have different dimensions".into(),
            ));
        }
        Ok(Self { states, priors })
    }

    /// Two states with priors `(eta, 1 - eta)`.
    pub fn pair(first: DensityMatrix, second: DensityMatrix, eta: f64) -> Result<Self> {
        Self::new(vec![first, second], vec![eta, 1.0 - eta])
    }

    /// Equal priors.
    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len();
        Self::new(states, vec![1.0 / n as f64; n])
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }
}

// ---------------------------------------------------------------------------
// generators

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> linalg::C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            real(1.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn sample_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureStateVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
        if let Ok(s) = PureStateVector::normalized(v) {
            return s;
        }
    }
}

/// Uniform sample from the probability simplex with every weight above
/// `floor`.
pub fn sample_simplex<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / total).collect();
        if p.iter().all(|&x| x > floor) {
            return p;
        }
    }
}

/// `V diag(spectrum) V^dagger` with `V` the first columns of `unitary`.
pub fn state_from_spectrum(unitary: &CMatrix, spectrum: &[f64]) -> DensityMatrix {
    let dim = unitary.nrows();
    let mut m = CMatrix::zeros(dim, dim);
    for (k, &p) in spectrum.iter().enumerate() {
        let v = unitary.column(k);
        m += (v * v.adjoint()) * real(p);
    }
    DensityMatrix::new(m).expect("spectrum on orthonormal vectors is a state")
}

pub fn sample_mixed<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside 1..={dim}"
        )));
    }
    let u = haar_unitary(dim, rng);
    let spectrum = sample_simplex(rank, 1e-6, rng);
    Ok(state_from_spectrum(&u, &spectrum))
}

pub fn sample_commuting_pair<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<(DensityMatrix, DensityMatrix)> {
    if dim < 2 {
        return Err(Error::InvalidArgument(
            "commuting pair needs dim >= 2".into(),
        ));
    }
    let u = haar_unitary(dim, rng);
    loop {
        let p = sample_simplex(dim, 1e-6, rng);
        let q = sample_simplex(dim, 1e-6, rng);
        let overlap: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        let distance: f64 = 0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
        if overlap > 1e-6 && distance > 1e-6 {
            return Ok((state_from_spectrum(&u, &p), state_from_spectrum(&u, &q)));
        }
    }
}

/// Haar-random pure state, deterministic in `seed`.
pub fn random_pure(dim: usize, seed: u64) -> PureStateVector {
    sample_pure(dim, &mut rng_from_seed(seed))
}

/// Haar basis with a uniform simplex spectrum on `rank` eigenvectors.
pub fn random_mixed(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    sample_mixed(dim, rank, &mut rng_from_seed(seed))
}

/// Two full-support states diagonal in one Haar-random basis; distinct and
/// never orthogonal.
pub fn random_commuting_pair(dim: usize, seed: u64) -> Result<(DensityMatrix, DensityMatrix)> {
    sample_commuting_pair(dim, &mut rng_from_seed(seed))
}

/// The two-qubit pair
///
/// ```text
/// rho  = 1/2 (|0><0| + |1><1|) (x) |0><0|
/// rho' = 2/3 |0><0| (x) |+><+| + 1/3 |1><1| (x) |theta><theta|
/// ```
///
/// with `|theta> = cos(theta)|0> + sin(theta)|1>`, at equal priors.
pub fn figure_example(theta: f64) -> Result<Ensemble> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "theta = {theta} outside [0, pi/2]"
        )));
    }
    let ket = |a: f64, b: f64| CVector::from_vec(vec![real(a), real(b)]);
    let zero = outer(&ket(1.0, 0.0));
    let one = outer(&ket(0.0, 1.0));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = outer(&ket(s, s));
    let tilted = outer(&ket(theta.cos(), theta.sin()));

    let rho = kron(&(&zero + &one), &zero) * real(0.5);
    let rho_prime = kron(&zero, &plus) * real(2.0 / 3.0) + kron(&one, &tilted) * real(1.0 / 3.0);
    Ensemble::pair(
        DensityMatrix::new(rho)?,
        DensityMatrix::new(rho_prime)?,
        0.5,
    )
}
