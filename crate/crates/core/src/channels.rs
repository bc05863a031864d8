//! CPTP maps in Kraus form, plus the constructions that contract pairs of
//! pure states and send two mixed states to pure outputs at the largest
//! admissible distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{from_entries, to_entries, Entries};
use crate::linalg::{self, kron, max_abs, real, tol, CMatrix, CVector};
use crate::metrics::canonical_angles;
use crate::states::{ginibre, rng_from_seed, DensityMatrix, PureStateVector};

/// Default trace-preservation tolerance.
pub const TP_TOL: f64 = 1e-8;

/// Outcome of a trace-preservation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub is_cptp: bool,
    /// `||sum K^dagger K - I||_max`, infinite when the operators have
    /// inconsistent shapes.
    pub defect: f64,
}

/// Complete positivity is automatic for a Kraus list, so only trace
/// preservation is checked.
pub fn is_cptp(kraus: &[CMatrix], tol: f64) -> CptpReport {
    let Some(first) = kraus.first() else {
        return CptpReport {
            is_cptp: false,
            defect: f64::INFINITY,
        };
    };
    let (rows, cols) = first.shape();
    if kraus.iter().any(|k| k.shape() != (rows, cols)) {
        return CptpReport {
            is_cptp: false,
            defect: f64::INFINITY,
        };
    }
    let mut sum = CMatrix::zeros(cols, cols);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    let defect = max_abs(&(sum - CMatrix::identity(cols, cols)));
    CptpReport {
        is_cptp: defect <= tol,
        defect,
    }
}

/// A channel `rho -> sum_k K_k rho K_k^dagger`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson", into = "ChannelJson")]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<Entries>,
}

impl TryFrom<ChannelJson> for KrausChannel {
    type Error = Error;

    fn try_from(value: ChannelJson) -> Result<Self> {
        let kraus = value
            .kraus
            .iter()
            .map(from_entries)
            .collect::<Result<Vec<_>>>()?;
        let channel = KrausChannel::new(kraus)?;
        if channel.in_dim != value.in_dim || channel.out_dim != value.out_dim {
            return Err(Error::DimensionMismatch(
                "declared channel dims disagree with Kraus shapes".into(),
            ));
        }
        Ok(channel)
    }
}

impl From<KrausChannel> for ChannelJson {
    fn from(value: KrausChannel) -> Self {
        ChannelJson {
            in_dim: value.in_dim,
            out_dim: value.out_dim,
            kraus: value.kraus.iter().map(to_entries).collect(),
        }
    }
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::InvalidArgument("empty Kraus list".into()));
        };
        let (out_dim, in_dim) = first.shape();
        if kraus.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::DimensionMismatch(
                "Kraus operators have different shapes".into(),
            ));
        }
        for k in &kraus {
            linalg::ensure_finite(k)?;
        }
        let report = is_cptp(&kraus, TP_TOL);
        if !report.is_cptp {
            return Err(Error::NotTracePreserving(report.defect));
        }
        Ok(Self {
            in_dim,
            out_dim,
            kraus,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![CMatrix::identity(dim, dim)]).expect("identity is CPTP")
    }

    /// `rho -> U rho U^dagger`
    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Replaces every input by `|target><target|`.
    pub fn constant(in_dim: usize, target: &PureStateVector) -> Self {
        let kraus = (0..in_dim)
            .map(|j| target.amplitudes() * PureStateVector::basis(in_dim, j).amplitudes().adjoint())
            .collect();
        Self::new(kraus).expect("constant map is CPTP")
    }

    /// `rho -> (1 - p) rho + p I/d`
    pub fn depolarizing(dim: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
        }
        let mut kraus = vec![CMatrix::identity(dim, dim) * real((1.0 - p).sqrt())];
        let w = (p / dim as f64).sqrt();
        for i in 0..dim {
            for j in 0..dim {
                let mut k = CMatrix::zeros(dim, dim);
                k[(i, j)] = real(w);
                kraus.push(k);
            }
        }
        Self::new(kraus)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn tp_defect(&self) -> f64 {
        is_cptp(&self.kraus, TP_TOL).defect
    }

    /// Linear action on an arbitrary operator.
    pub fn apply_operator(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.in_dim || m.ncols() != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "channel input dim {} but operator is {}x{}",
                self.in_dim,
                m.nrows(),
                m.ncols()
            )));
        }
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_operator(rho.matrix())?)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if first.out_dim != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed dim {} into dim {}",
                first.out_dim, self.in_dim
            )));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|b| first.kraus.iter().map(move |a| b * a))
            .collect();
        KrausChannel::new(kraus)
    }
}

/// `rho -> rho (x) sigma`, with Kraus operators `sqrt(mu_k) (I (x) |v_k>)`
/// from the spectral decomposition of `sigma`.
pub fn tensor_with_state(in_dim: usize, sigma: &DensityMatrix) -> KrausChannel {
    let eig = sigma.eigen();
    let id = CMatrix::identity(in_dim, in_dim);
    let kraus = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &mu)| mu > 0.0)
        .map(|(k, &mu)| {
            let v = eig.eigenvectors.column(k).into_owned();
            kron(&id, &CMatrix::from_columns(&[v])) * real(mu.sqrt())
        })
        .collect();
    KrausChannel::new(kraus).expect("appending a state is CPTP")
}

/// Random channel from a random Stinespring isometry cut into `count`
/// blocks of `out_dim` rows. Requires `out_dim * count >= in_dim`.
pub fn random_channel(
    in_dim: usize,
    out_dim: usize,
    count: usize,
    seed: u64,
) -> Result<KrausChannel> {
    let mut rng = rng_from_seed(seed);
    sample_channel(in_dim, out_dim, count, &mut rng)
}

pub fn sample_channel<R: rand::Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    count: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    if in_dim == 0 || out_dim == 0 || count == 0 {
        return Err(Error::InvalidArgument(
            "channel dims and Kraus count must be >= 1".into(),
        ));
    }
    if out_dim * count < in_dim {
        return Err(Error::InvalidArgument(format!(
            "{count} Kraus operators of shape {out_dim}x{in_dim} cannot be trace preserving"
        )));
    }
    let g = ginibre(out_dim * count, in_dim, rng);
    let gram = g.adjoint() * &g;
    let inv_root = linalg::hermitian_eig(&gram)?.map_spectrum(|x| 1.0 / x.sqrt());
    let v = g * inv_root;
    let kraus = (0..count)
        .map(|k| v.rows(k * out_dim, out_dim).into_owned())
        .collect();
    KrausChannel::new(kraus)
}

/// Threshold below which `b` is treated as parallel to `a`.
const PARALLEL_TOL: f64 = 1e-10;

fn orthogonalize(v: &CVector, against: &CVector) -> CVector {
    let mut w = v - against * against.dotc(v);
    w -= against * against.dotc(&w);
    w
}

/// Partial isometry `V: span{a, b} -> C^out (x) C^2` with `V a = phi (x) e`
/// and `V b = phi' (x) f`, where the ancilla overlap `<e|f>` makes up the
/// difference between `<a|b>` and `<phi|phi'>`. `V` vanishes on the
/// orthogonal complement of `span{a, b}`.
fn pair_isometry(a: &CVector, b: &CVector, phi: &CVector, phi_p: &CVector) -> Result<CMatrix> {
    let ov_in = a.dotc(b);
    let ov_out = phi.dotc(phi_p);
    if ov_in.norm() > ov_out.norm() + 1e-10 {
        return Err(Error::InfeasibleTarget {
            input: ov_in.norm(),
            output: ov_out.norm(),
        });
    }
    let mut r = if ov_out.norm() > 1e-14 {
        ov_in / ov_out
    } else {
        real(0.0)
    };
    if r.norm() > 1.0 {
        r /= r.norm();
    }
    let e = CVector::from_vec(vec![real(1.0), real(0.0)]);
    let f = CVector::from_vec(vec![r, real((1.0 - r.norm_sqr()).max(0.0).sqrt())]);
    let x1 = linalg::kron_vec(phi, &e);
    let y = linalg::kron_vec(phi_p, &f);

    let mut v = &x1 * a.adjoint();
    let b_perp = orthogonalize(b, a);
    if b_perp.norm() > PARALLEL_TOL {
        let u2 = &b_perp / real(b_perp.norm());
        let mut w2 = orthogonalize(&y, &x1);
        if w2.norm() <= PARALLEL_TOL {
            // images coincide; any direction orthogonal to x1 keeps V isometric
            let e1 = CVector::from_vec(vec![real(0.0), real(1.0)]);
            w2 = linalg::kron_vec(phi, &e1);
        }
        let w2 = &w2 / real(w2.norm());
        v += &w2 * u2.adjoint();
    }
    Ok(v)
}

/// Split `V: C^in -> C^out (x) C^2` into the two Kraus operators
/// `(I (x) <k|) V`.
fn split_ancilla(v: &CMatrix, out_dim: usize) -> [CMatrix; 2] {
    let cols = v.ncols();
    [0, 1].map(|k| CMatrix::from_fn(out_dim, cols, |i, j| v[(2 * i + k, j)]))
}

fn complement_of_projector(p: &CMatrix) -> Vec<CVector> {
    let n = p.nrows();
    let eig =
        linalg::hermitian_eig(&(CMatrix::identity(n, n) - p)).expect("projector is Hermitian");
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.5)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect()
}

fn output_error(channel: &KrausChannel, input: &CVector, target: &CVector) -> Result<f64> {
    let out = channel.apply_operator(&linalg::outer(input))?;
    Ok(max_abs(&(out - linalg::outer(target))))
}

/// A channel with `|a><a| -> |phi><phi|` and `|b><b| -> |phi'><phi'|`.
///
/// Such a channel exists exactly when `|<phi|phi'>| >= |<a|b>|`: pure
/// states can be pulled together by any amount, never pushed apart.
/// The construction is an isometry on `span{a, b}` into an enlarged space
/// followed by discarding a qubit ancilla; the orthogonal complement of
/// `span{a, b}` is sent to `phi`. The result is verified before returning.
pub fn pure_pair_contraction(
    a: &PureStateVector,
    b: &PureStateVector,
    phi: &PureStateVector,
    phi_prime: &PureStateVector,
) -> Result<KrausChannel> {
    if a.dim() != b.dim() || phi.dim() != phi_prime.dim() {
        return Err(Error::DimensionMismatch(
            "input pair and target pair must each share a dimension".into(),
        ));
    }
    let (in_dim, out_dim) = (a.dim(), phi.dim());
    let v = pair_isometry(
        a.amplitudes(),
        b.amplitudes(),
        phi.amplitudes(),
        phi_prime.amplitudes(),
    )?;
    let mut kraus: Vec<CMatrix> = split_ancilla(&v, out_dim).into();
    for cv in complement_of_projector(&(v.adjoint() * &v)) {
        kraus.push(phi.amplitudes() * cv.adjoint());
    }
    debug_assert!(kraus.iter().all(|k| k.shape() == (out_dim, in_dim)));
    let report = is_cptp(&kraus, TP_TOL);
    if !report.is_cptp {
        return Err(Error::Verification(format!(
            "TP defect {:.3e}",
            report.defect
        )));
    }
    let channel = KrausChannel::new(kraus)?;
    let err_a = output_error(&channel, a.amplitudes(), phi.amplitudes())?;
    let err_b = output_error(&channel, b.amplitudes(), phi_prime.amplitudes())?;
    if err_a.max(err_b) > 1e-8 {
        return Err(Error::Verification(format!(
            "pair outputs off target by {:.3e}",
            err_a.max(err_b)
        )));
    }
    Ok(channel)
}

/// Channel sending two states to pure outputs whose trace distance equals
/// their worst-case distinguishability.
#[derive(Debug, Clone)]
pub struct EqualDistanceMap {
    pub channel: KrausChannel,
    pub phi: PureStateVector,
    pub phi_prime: PureStateVector,
}

/// Builds a qubit-output channel with `rho -> |phi><phi|` and
/// `rho' -> |phi'><phi'|`, where `|<phi|phi'>|` is the cosine of the smallest
/// canonical angle between the two ranges.
///
/// The canonical bases split the ranges into mutually orthogonal blocks
/// `span{chi_i, chi'_i}`. Each block gets its own pair contraction onto
/// `(phi, phi')`; since every Kraus operator acts inside a single block,
/// cross-block coherences of `rho` and `rho'` are removed and linearity
/// gives pure outputs. Unpaired range vectors go to `phi` (from `rho`) or
/// `phi'` (from `rho'`), and the rest of the space goes to `phi`.
pub fn equal_distance_pure_outputs(
    rho: &DensityMatrix,
    rho_prime: &DensityMatrix,
    rank_tol: f64,
) -> Result<EqualDistanceMap> {
    let ca = canonical_angles(rho, rho_prime, rank_tol)?;
    let n = rho.dim();
    let min_angle = ca.min_angle();
    let phi = CVector::from_vec(vec![real(1.0), real(0.0)]);
    let phi_p = CVector::from_vec(vec![real(min_angle.cos()), real(min_angle.sin())]);

    let mut kraus = Vec::new();
    let mut covered = CMatrix::zeros(n, n);
    for i in 0..ca.len() {
        let a = ca.basis_a.column(i).into_owned();
        let b = ca.basis_b.column(i).into_owned();
        let v = pair_isometry(&a, &b, &phi, &phi_p)?;
        covered += v.adjoint() * &v;
        kraus.extend(split_ancilla(&v, 2));
    }
    for (residual, target) in [(&ca.residual_a, &phi), (&ca.residual_b, &phi_p)] {
        for r in residual.column_iter() {
            let r = r.into_owned();
            covered += linalg::outer(&r);
            kraus.push(target * r.adjoint());
        }
    }
    for cv in complement_of_projector(&covered) {
        kraus.push(&phi * cv.adjoint());
    }

    let report = is_cptp(&kraus, TP_TOL);
    if !report.is_cptp {
        return Err(Error::Verification(format!(
            "TP defect {:.3e}",
            report.defect
        )));
    }
    let channel = KrausChannel::new(kraus)?;
    let out = channel.apply_operator(rho.matrix())?;
    let out_p = channel.apply_operator(rho_prime.matrix())?;
    let err = max_abs(&(out - linalg::outer(&phi))).max(max_abs(&(out_p - linalg::outer(&phi_p))));
    if err > 1e-7 {
        return Err(Error::Verification(format!(
            "outputs off target by {err:.3e}"
        )));
    }
    Ok(EqualDistanceMap {
        channel,
        phi: PureStateVector::new(phi)?,
        phi_prime: PureStateVector::new(phi_p)?,
    })
}

/// Default-tolerance convenience wrapper.
pub fn equal_distance_map(
    rho: &DensityMatrix,
    rho_prime: &DensityMatrix,
) -> Result<EqualDistanceMap> {
    equal_distance_pure_outputs(rho, rho_prime, tol::RANK)
}
