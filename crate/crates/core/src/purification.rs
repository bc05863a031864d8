//! Purifications of single states, faithfulness bounds for two-state
//! purifiers with pure output, and the perfect-purifiability test for sets.
//!
//! A set admits a perfect purifier exactly when it splits into mutually
//! orthogonal groups, each of which can be globally rotated into
//! `|phi_i><phi_i| (x) sigma_B` with one shared `sigma_B` ("essentially
//! pure"). For two states this reduces to a computable test: the trace
//! distance must equal the worst-case distinguishability.

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json::{to_entries, MatrixJson};
use crate::linalg::{self, kron, max_abs, real, tol, trace_norm, CMatrix, CVector};
use crate::metrics::{self, canonical_angles, fidelity, trace_distance};
use crate::states::{
    haar_unitary, rng_from_seed, sample_mixed, sample_pure, DensityMatrix, Ensemble,
    PureStateVector,
};

/// Default tolerance on `|D - wcd|`.
pub const PAIR_TEST_TOL: f64 = 1e-7;

/// A pure state on `system (x) aux` whose partial trace over `aux` is the
/// purified state.
#[derive(Debug, Clone)]
pub struct Purification {
    pub state: PureStateVector,
    pub system_dim: usize,
    pub aux_dim: usize,
}

impl Purification {
    pub fn reduced(&self) -> CMatrix {
        linalg::partial_trace(
            &linalg::outer(self.state.amplitudes()),
            self.system_dim,
            self.aux_dim,
            linalg::Keep::A,
        )
        .expect("dims match by construction")
    }
}

/// `|psi> = sum_i sqrt(p_i) |lambda_i> (x) |i>` over the eigenpairs with
/// `p_i > rank_tol`; the auxiliary dimension is the numerical rank.
pub fn purify_state(rho: &DensityMatrix, rank_tol: f64) -> Purification {
    let eig = rho.eigen();
    let rank = eig
        .eigenvalues
        .iter()
        .filter(|&&p| p > rank_tol)
        .count()
        .max(1);
    let d = rho.dim();
    let mut psi = CVector::zeros(d * rank);
    for i in 0..rank {
        let weight = eig.eigenvalues[i].max(0.0).sqrt();
        let aux = PureStateVector::basis(rank, i);
        psi += linalg::kron_vec(&eig.eigenvectors.column(i).into_owned(), aux.amplitudes())
            * real(weight);
    }
    Purification {
        state: PureStateVector::normalized(psi).expect("dominant eigenvalue is positive"),
        system_dim: d,
        aux_dim: rank,
    }
}

/// Largest overlap `|<psi|psi'>|` between purifications of the two states,
/// evaluated in closed form as `|| sqrt(rho') sqrt(rho) ||_1`.
pub fn max_purification_overlap(rho: &DensityMatrix, rho_prime: &DensityMatrix) -> Result<f64> {
    if rho.dim() != rho_prime.dim() {
        return Err(Error::DimensionMismatch(
            "states have different dims".into(),
        ));
    }
    let a = linalg::psd_sqrt(rho.matrix())?;
    let b = linalg::psd_sqrt(rho_prime.matrix())?;
    trace_norm(&(b * a))
}

/// Bounds on the optimal deviation from perfect faithfulness of a
/// two-state purifier with pure output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaBounds {
    /// `eta (D - wcd)`, clamped at zero.
    pub lower: f64,
    /// `eta D`: a constant purifier onto a purification of the likelier state.
    pub upper_const: f64,
    /// `eta sin(beta - alpha)` with `sin(alpha) = wcd`, `cos(beta) = F`.
    pub upper_uhlmann: f64,
    /// The smaller of the two priors.
    pub eta_used: f64,
}

/// Pairwise quantities the bounds are built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairQuantities {
    pub trace_distance: f64,
    pub wcd: f64,
    pub fidelity: f64,
}

impl PairQuantities {
    pub fn compute(rho: &DensityMatrix, rho_prime: &DensityMatrix) -> Result<Self> {
        Ok(Self {
            trace_distance: trace_distance(rho, rho_prime)?,
            wcd: metrics::wcd(rho, rho_prime, tol::RANK)?,
            fidelity: fidelity(rho, rho_prime)?,
        })
    }

    pub fn bounds(&self, eta: f64) -> DeltaBounds {
        let alpha = self.wcd.asin();
        let beta = self.fidelity.acos();
        DeltaBounds {
            lower: (eta * (self.trace_distance - self.wcd)).max(0.0),
            upper_const: eta * self.trace_distance,
            upper_uhlmann: eta * (beta - alpha).max(0.0).sin(),
            eta_used: eta,
        }
    }
}

pub fn delta_bounds(
    rho: &DensityMatrix,
    rho_prime: &DensityMatrix,
    eta: f64,
    eta_prime: f64,
) -> Result<DeltaBounds> {
    if !(eta > 0.0 && eta_prime > 0.0) || (eta + eta_prime - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidPriors(format!(
            "priors ({eta}, {eta_prime}) must be positive and sum to 1"
        )));
    }
    Ok(PairQuantities::compute(rho, rho_prime)?.bounds(eta.min(eta_prime)))
}

// ---------------------------------------------------------------------------
// essentially pure sets

/// Witness that a set of states is essentially pure:
/// `rho_i (x) omega_aux = U (|phi_i><phi_i| (x) sigma_B) U^dagger`.
#[derive(Debug, Clone)]
pub struct EssentiallyPureCertificate {
    pub unitary: CMatrix,
    pub omega_aux: DensityMatrix,
    pub sigma_b: DensityMatrix,
    pub pure_states: Vec<PureStateVector>,
    pub dim_a: usize,
    pub dim_b: usize,
}

impl EssentiallyPureCertificate {
    /// Largest entrywise violation of the defining identity over all states.
    pub fn defect(&self, states: &[DensityMatrix]) -> Result<f64> {
        if states.len() != self.pure_states.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} states but {} certificate entries",
                states.len(),
                self.pure_states.len()
            )));
        }
        let mut worst: f64 = 0.0;
        for (rho, phi) in states.iter().zip(&self.pure_states) {
            let lhs = kron(rho.matrix(), self.omega_aux.matrix());
            let inner = kron(&linalg::outer(phi.amplitudes()), self.sigma_b.matrix());
            if lhs.shape() != inner.shape() || inner.nrows() != self.unitary.nrows() {
                return Err(Error::DimensionMismatch(
                    "certificate splits do not match the state dimension".into(),
                ));
            }
            let rhs = &self.unitary * inner * self.unitary.adjoint();
            worst = worst.max(max_abs(&(lhs - rhs)));
        }
        Ok(worst)
    }

    pub fn verify(&self, states: &[DensityMatrix], tol: f64) -> bool {
        self.defect(states).map(|d| d <= tol).unwrap_or(false)
    }

    /// Single-state certificate `rho = I (|0><0| (x) rho) I^dagger`.
    pub fn singleton(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        Self {
            unitary: CMatrix::identity(d, d),
            omega_aux: DensityMatrix::maximally_mixed(1),
            sigma_b: rho.clone(),
            pure_states: vec![PureStateVector::basis(1, 0)],
            dim_a: 1,
            dim_b: d,
        }
    }
}

impl Serialize for EssentiallyPureCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            dim_a: usize,
            dim_b: usize,
            unitary: crate::json::Entries,
            omega_aux: MatrixJson,
            sigma_b: MatrixJson,
            pure_states: Vec<Vec<[f64; 2]>>,
        }
        Wire {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            unitary: to_entries(&self.unitary),
            omega_aux: MatrixJson::from_matrix(self.omega_aux.matrix()),
            sigma_b: MatrixJson::from_matrix(self.sigma_b.matrix()),
            pure_states: self
                .pure_states
                .iter()
                .map(|p| p.amplitudes().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

/// `rho_i = U (|phi_i><phi_i| (x) sigma_B) U^dagger` with a trivial
/// auxiliary state.
pub fn essentially_pure_family(
    pure_states: &[PureStateVector],
    sigma_b: &DensityMatrix,
    unitary: &CMatrix,
) -> Result<(Vec<DensityMatrix>, EssentiallyPureCertificate)> {
    let Some(first) = pure_states.first() else {
        return Err(Error::InvalidArgument("no pure states given".into()));
    };
    let dim_a = first.dim();
    if pure_states.iter().any(|p| p.dim() != dim_a) {
        return Err(Error::DimensionMismatch(
            "pure states differ in dimension".into(),
        ));
    }
    let dim_b = sigma_b.dim();
    let n = dim_a * dim_b;
    if unitary.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "unitary must be {n}x{n}, got {}x{}",
            unitary.nrows(),
            unitary.ncols()
        )));
    }
    let defect = linalg::unitarity_defect(unitary);
    if defect > 1e-9 {
        return Err(Error::NotUnitary(defect));
    }
    let states = pure_states
        .iter()
        .map(|phi| phi.to_density().tensor(sigma_b).conjugate(unitary))
        .collect::<Result<Vec<_>>>()?;
    let certificate = EssentiallyPureCertificate {
        unitary: unitary.clone(),
        omega_aux: DensityMatrix::maximally_mixed(1),
        sigma_b: sigma_b.clone(),
        pure_states: pure_states.to_vec(),
        dim_a,
        dim_b,
    };
    Ok((states, certificate))
}

/// Random essentially pure pair: Haar `U`, full-rank mixed `sigma_B`, two
/// independent Haar pure states on `A`.
pub fn sample_essentially_pure_pair<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> Result<(Vec<DensityMatrix>, EssentiallyPureCertificate)> {
    let u = haar_unitary(dim_a * dim_b, rng);
    let sigma = sample_mixed(dim_b, dim_b, rng)?;
    let phis = [sample_pure(dim_a, rng), sample_pure(dim_a, rng)];
    essentially_pure_family(&phis, &sigma, &u)
}

/// Tries to build an explicit certificate for a non-orthogonal pair.
///
/// With `chi_k` an eigenbasis of `rho` (weights `mu_k`) and `P'` the support
/// projector of `rho'`, an essentially pure pair has `P' chi_k = cos(theta)
/// chi'_k` for an orthonormal family `chi'_k` carrying the same weights in
/// `rho'`. Writing `chi'_k = cos(theta) chi_k + sin(theta) xi_k` gives a
/// partial isometry `|0>|k> -> chi_k`, `|1>|k> -> xi_k`, which is completed
/// to a unitary on `system (x) aux` with `aux` of dimension `rank`. Returns
/// `None` when the identity fails to verify within `1e-8`.
pub fn certify_pair(
    rho: &DensityMatrix,
    rho_prime: &DensityMatrix,
) -> Option<EssentiallyPureCertificate> {
    let d = rho.dim();
    let eig = rho.eigen();
    let rank = rho.rank(tol::RANK);
    if rank != rho_prime.rank(tol::RANK) || d < 2 {
        return None;
    }
    let weights: Vec<f64> = eig.eigenvalues[..rank].to_vec();
    let total: f64 = weights.iter().sum();
    let sigma_b =
        DensityMatrix::diagonal(&weights.iter().map(|w| w / total).collect::<Vec<_>>()).ok()?;
    let states = [rho.clone(), rho_prime.clone()];

    let qb = rho_prime.range_basis(tol::RANK);
    let proj = &qb * qb.adjoint();
    let chis: Vec<CVector> = (0..rank)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    let projected: Vec<CVector> = chis.iter().map(|chi| &proj * chi).collect();
    let cos = projected.iter().map(|v| v.norm()).sum::<f64>() / rank as f64;

    if cos >= 1.0 - 1e-12 {
        let cert = EssentiallyPureCertificate {
            pure_states: vec![PureStateVector::basis(1, 0); 2],
            ..EssentiallyPureCertificate::singleton(rho)
        };
        return cert.verify(&states, 1e-8).then_some(cert);
    }
    let sin = (1.0 - cos * cos).sqrt();
    let aux = rank;
    let n = d * aux;
    let aux0 = PureStateVector::basis(aux, 0);

    // column index a * rank + k  <->  |a>_A |k>_B with dim_a = d, dim_b = rank
    let mut cols: Vec<Option<CVector>> = vec![None; n];
    for k in 0..rank {
        let xi = (&projected[k] / real(cos) - &chis[k] * real(cos)) / real(sin);
        cols[k] = Some(linalg::kron_vec(&chis[k], aux0.amplitudes()));
        cols[rank + k] = Some(linalg::kron_vec(&xi, aux0.amplitudes()));
    }
    let fixed: Vec<CVector> = cols.iter().flatten().cloned().collect();
    let fixed = CMatrix::from_columns(&fixed);
    if linalg::unitarity_defect(&fixed) > 1e-8 {
        return None;
    }
    let mut rest = linalg::orthonormal_complement(&fixed)
        .column_iter()
        .map(|c| c.into_owned())
        .collect::<Vec<_>>()
        .into_iter();
    let cols: Vec<CVector> = cols
        .into_iter()
        .map(|c| c.or_else(|| rest.next()))
        .collect::<Option<Vec<_>>>()?;
    let unitary = CMatrix::from_columns(&cols);

    let phi = PureStateVector::basis(d, 0);
    let mut v = CVector::zeros(d);
    v[0] = real(cos);
    v[1] = real(sin);
    let phi_prime = PureStateVector::normalized(v).ok()?;

    let mut omega = CMatrix::zeros(aux, aux);
    omega[(0, 0)] = real(1.0);
    let cert = EssentiallyPureCertificate {
        unitary,
        omega_aux: DensityMatrix::new(omega).ok()?,
        sigma_b,
        pure_states: vec![phi, phi_prime],
        dim_a: d,
        dim_b: rank,
    };
    cert.verify(&states, 1e-8).then_some(cert)
}

// ---------------------------------------------------------------------------
// verdicts

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Yes,
    No,
    Undetermined,
}

impl Verdict {
    /// Exit code used by the command-line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Yes => 0,
            Verdict::No => 1,
            Verdict::Undetermined => 2,
        }
    }
}

/// Per-pair numbers behind a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub trace_distance: f64,
    pub wcd: f64,
    /// `|D - wcd|`
    pub gap: f64,
    /// Max-norm distance between sorted spectra.
    pub spectrum_gap: f64,
    pub ranks: (usize, usize),
    /// Largest minus smallest canonical angle.
    pub angle_spread: f64,
}

impl PairReport {
    fn compute(i: usize, j: usize, a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        let d = trace_distance(a, b)?;
        let ca = canonical_angles(a, b, tol::RANK)?;
        let w = ca.wcd();
        let (sa, sb) = (a.spectrum(), b.spectrum());
        let spectrum_gap = sa
            .iter()
            .zip(&sb)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let spread = ca.angles.last().copied().unwrap_or(0.0) - ca.min_angle();
        Ok(Self {
            i,
            j,
            trace_distance: d,
            wcd: w,
            gap: (d - w).abs(),
            spectrum_gap,
            ranks: (a.rank(tol::RANK), b.rank(tol::RANK)),
            angle_spread: spread,
        })
    }
}

/// Analysis of one orthogonal component.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub indices: Vec<usize>,
    pub verdict: Verdict,
    /// Names of the necessary conditions that failed.
    pub failed_checks: Vec<String>,
    pub pairs: Vec<PairReport>,
    pub certificate: Option<EssentiallyPureCertificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PurifiabilityVerdict {
    pub verdict: Verdict,
    /// Trace distance of the first two states (pairs only).
    pub trace_distance: Option<f64>,
    /// Worst-case distinguishability of the first two states (pairs only).
    pub wcd: Option<f64>,
    pub components: Vec<ComponentReport>,
    /// Certificate for the whole set when it forms a single YES component.
    pub certificate: Option<EssentiallyPureCertificate>,
}

pub const CHECK_DISTANCE: &str = "trace_distance_equals_wcd";
pub const CHECK_SPECTRA: &str = "equal_spectra";
pub const CHECK_ANGLES: &str = "degenerate_canonical_angles";

/// Connected components of the overlap graph `tr(rho_i rho_j) > tol`.
pub fn orthogonal_union_decomposition(states: &[DensityMatrix], tol: f64) -> Vec<Vec<usize>> {
    let n = states.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            let overlap = linalg::trace(&(states[i].matrix() * states[j].matrix())).re;
            if overlap > tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn analyze_component(
    states: &[DensityMatrix],
    indices: &[usize],
    tol: f64,
) -> Result<ComponentReport> {
    let members: Vec<DensityMatrix> = indices.iter().map(|&i| states[i].clone()).collect();
    if members.len() == 1 {
        return Ok(ComponentReport {
            indices: indices.to_vec(),
            verdict: Verdict::Yes,
            failed_checks: Vec::new(),
            pairs: Vec::new(),
            certificate: Some(EssentiallyPureCertificate::singleton(&members[0])),
        });
    }
    let mut pairs = Vec::new();
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            pairs.push(PairReport::compute(
                indices[a],
                indices[b],
                &members[a],
                &members[b],
            )?);
        }
    }

    if members.len() == 2 {
        let pass = pairs[0].gap <= tol;
        return Ok(ComponentReport {
            indices: indices.to_vec(),
            verdict: if pass { Verdict::Yes } else { Verdict::No },
            failed_checks: if pass {
                Vec::new()
            } else {
                vec![CHECK_DISTANCE.to_string()]
            },
            certificate: if pass {
                certify_pair(&members[0], &members[1])
            } else {
                None
            },
            pairs,
        });
    }

    let mut failed = Vec::new();
    if pairs.iter().any(|p| p.gap > tol) {
        failed.push(CHECK_DISTANCE.to_string());
    }
    if pairs
        .iter()
        .any(|p| p.ranks.0 != p.ranks.1 || p.spectrum_gap > tol)
    {
        failed.push(CHECK_SPECTRA.to_string());
    }
    if pairs.iter().any(|p| p.angle_spread > tol) {
        failed.push(CHECK_ANGLES.to_string());
    }
    Ok(ComponentReport {
        indices: indices.to_vec(),
        verdict: if failed.is_empty() {
            Verdict::Undetermined
        } else {
            Verdict::No
        },
        failed_checks: failed,
        pairs,
        certificate: None,
    })
}

fn combine(components: Vec<ComponentReport>, pair: Option<(f64, f64)>) -> PurifiabilityVerdict {
    let verdict = if components.iter().any(|c| c.verdict == Verdict::No) {
        Verdict::No
    } else if components.iter().all(|c| c.verdict == Verdict::Yes) {
        Verdict::Yes
    } else {
        Verdict::Undetermined
    };
    let certificate = match components.as_slice() {
        [only] if only.verdict == Verdict::Yes => only.certificate.clone(),
        _ => None,
    };
    PurifiabilityVerdict {
        verdict,
        trace_distance: pair.map(|p| p.0),
        wcd: pair.map(|p| p.1),
        components,
        certificate,
    }
}

/// Decides perfect purifiability of a set: YES when every orthogonal
/// component is a singleton or a pair passing the distance test, NO when
/// some component fails a necessary condition, UNDETERMINED for larger
/// components that pass every necessary check.
pub fn analyze_set(ensemble: &Ensemble, tol: f64) -> Result<PurifiabilityVerdict> {
    let states = ensemble.states();
    let groups = orthogonal_union_decomposition(states, tol);
    let components = groups
        .iter()
        .map(|g| analyze_component(states, g, tol))
        .collect::<Result<Vec<_>>>()?;
    let pair = if states.len() == 2 {
        Some((
            trace_distance(&states[0], &states[1])?,
            metrics::wcd(&states[0], &states[1], tol::RANK)?,
        ))
    } else {
        None
    };
    Ok(combine(components, pair))
}

/// Two-state test: YES iff `|D - wcd| <= tol`.
pub fn can_purify_perfectly(
    rho: &DensityMatrix,
    rho_prime: &DensityMatrix,
    tol: f64,
) -> Result<PurifiabilityVerdict> {
    let report = PairReport::compute(0, 1, rho, rho_prime)?;
    let pass = report.gap <= tol;
    let orthogonal = (report.wcd - 1.0).abs() <= tol;
    let pair = Some((report.trace_distance, report.wcd));
    let states = [rho.clone(), rho_prime.clone()];

    let components = if pass && orthogonal {
        vec![
            analyze_component(&states, &[0], tol)?,
            analyze_component(&states, &[1], tol)?,
        ]
    } else {
        vec![ComponentReport {
            indices: vec![0, 1],
            verdict: if pass { Verdict::Yes } else { Verdict::No },
            failed_checks: if pass {
                Vec::new()
            } else {
                vec![CHECK_DISTANCE.to_string()]
            },
            certificate: if pass {
                certify_pair(rho, rho_prime)
            } else {
                None
            },
            pairs: vec![report],
        }]
    };
    Ok(combine(components, pair))
}

/// Two random states of rank at least two whose supports overlap
/// (`tr(rho sigma) > 1e-9`).
pub fn sample_overlapping_mixed_pair<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<(DensityMatrix, DensityMatrix)> {
    if dim < 2 {
        return Err(Error::InvalidArgument("rank two needs dim >= 2".into()));
    }
    loop {
        let ra = rng.random_range(2..=dim);
        let rb = rng.random_range(2..=dim);
        let a = sample_mixed(dim, ra, rng)?;
        let b = sample_mixed(dim, rb, rng)?;
        if linalg::trace(&(a.matrix() * b.matrix())).re > 1e-9 {
            return Ok((a, b));
        }
    }
}

/// Result of [`min_dimension_demo`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DimensionDemo {
    pub dim: usize,
    pub random_pairs: usize,
    pub injected_pairs: usize,
    pub yes_count: usize,
}

/// Counts perfect-purifiability YES verdicts over random non-orthogonal
/// pairs with ranks at least two, plus `injected` essentially pure pairs
/// (only possible for even `dim >= 4`).
pub fn min_dimension_demo(
    dim: usize,
    trials: usize,
    injected: usize,
    seed: u64,
) -> Result<DimensionDemo> {
    if dim < 2 {
        return Err(Error::InvalidArgument("dim must be at least 2".into()));
    }
    if injected > 0 && (dim < 4 || !dim.is_multiple_of(2)) {
        return Err(Error::InvalidArgument(format!(
            "essentially pure mixed pairs need an even dimension >= 4, got {dim}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut yes = 0;
    for _ in 0..trials {
        let (a, b) = sample_overlapping_mixed_pair(dim, &mut rng)?;
        if can_purify_perfectly(&a, &b, PAIR_TEST_TOL)?.verdict == Verdict::Yes {
            yes += 1;
        }
    }
    for _ in 0..injected {
        let (states, _) = sample_essentially_pure_pair(2, dim / 2, &mut rng)?;
        if can_purify_perfectly(&states[0], &states[1], PAIR_TEST_TOL)?.verdict == Verdict::Yes {
            yes += 1;
        }
    }
    Ok(DimensionDemo {
        dim,
        random_pairs: trials,
        injected_pairs: injected,
        yes_count: yes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{figure_example, random_commuting_pair, random_mixed, random_pure};
    use std::f64::consts::FRAC_PI_4;

    fn ket(v: &[f64]) -> PureStateVector {
        PureStateVector::normalized(CVector::from_iterator(v.len(), v.iter().map(|&x| real(x))))
            .unwrap()
    }

    #[test]
    fn purify_pure_state() {
        let psi = random_pure(3, 2);
        let p = purify_state(&psi.to_density(), tol::RANK);
        assert_eq!(p.aux_dim, 1);
        assert!((p.state.inner(&psi).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purify_maximally_mixed_qubit() {
        let p = purify_state(&DensityMatrix::maximally_mixed(2), tol::RANK);
        assert_eq!(p.aux_dim, 2);
        assert!(max_abs(&(p.reduced() - CMatrix::identity(2, 2) * real(0.5))) < 1e-14);
        // maximally entangled: both reductions are I/2
        let other =
            linalg::partial_trace(&linalg::outer(p.state.amplitudes()), 2, 2, linalg::Keep::B)
                .unwrap();
        assert!(max_abs(&(other - CMatrix::identity(2, 2) * real(0.5))) < 1e-14);
    }

    #[test]
    fn purify_rank_three() {
        let rho = random_mixed(4, 3, 21).unwrap();
        let p = purify_state(&rho, tol::RANK);
        assert_eq!(p.aux_dim, 3);
        assert!(max_abs(&(p.reduced() - rho.matrix())) <= 1e-10);
    }

    #[test]
    fn bounds_vanish_for_identical_states() {
        let rho = random_mixed(4, 2, 1).unwrap();
        let b = delta_bounds(&rho, &rho, 0.5, 0.5).unwrap();
        assert!(
            b.lower.abs() < 1e-7 && b.upper_const.abs() < 1e-12 && b.upper_uhlmann.abs() < 1e-6
        );
    }

    #[test]
    fn bounds_reject_bad_priors() {
        let rho = random_mixed(2, 2, 1).unwrap();
        assert!(delta_bounds(&rho, &rho, 0.5, 0.6).is_err());
        assert!(delta_bounds(&rho, &rho, 0.0, 1.0).is_err());
    }

    #[test]
    fn bounds_use_smaller_prior() {
        let e = figure_example(0.3).unwrap();
        let (a, b) = (&e.states()[0], &e.states()[1]);
        let x = delta_bounds(a, b, 0.2, 0.8).unwrap();
        let y = delta_bounds(a, b, 0.8, 0.2).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.eta_used, 0.2);
    }

    #[test]
    fn figure_bounds_at_zero_saturate_constant_bound() {
        // wcd vanishes, so the lower bound meets the constant-purifier bound
        let e = figure_example(0.0).unwrap();
        let b = delta_bounds(&e.states()[0], &e.states()[1], 0.5, 0.5).unwrap();
        assert!((b.lower - b.upper_const).abs() < 1e-9);
        assert!((b.upper_const - 0.25).abs() < 1e-12);
    }

    #[test]
    fn figure_bounds_at_quarter_pi() {
        let e = figure_example(FRAC_PI_4).unwrap();
        let b = delta_bounds(&e.states()[0], &e.states()[1], 0.5, 0.5).unwrap();
        assert!((b.lower - 0.0050).abs() < 0.0005, "{b:?}");
        assert!((b.upper_uhlmann - 0.0072).abs() < 0.0005, "{b:?}");
    }

    #[test]
    fn verdict_identical_and_orthogonal() {
        let rho = random_mixed(3, 2, 3).unwrap();
        let v = can_purify_perfectly(&rho, &rho, PAIR_TEST_TOL).unwrap();
        assert_eq!(v.verdict, Verdict::Yes);
        let cert = v.certificate.unwrap();
        assert!(cert.verify(&[rho.clone(), rho], 1e-8));

        let a = DensityMatrix::diagonal(&[0.3, 0.7, 0.0, 0.0]).unwrap();
        let b = DensityMatrix::diagonal(&[0.0, 0.0, 0.5, 0.5]).unwrap();
        let v = can_purify_perfectly(&a, &b, PAIR_TEST_TOL).unwrap();
        assert_eq!(v.verdict, Verdict::Yes);
        assert_eq!(v.components.len(), 2);
    }

    #[test]
    fn verdict_commuting_pairs_are_no() {
        for seed in 0..10 {
            let (a, b) = random_commuting_pair(3, seed).unwrap();
            let v = can_purify_perfectly(&a, &b, PAIR_TEST_TOL).unwrap();
            assert_eq!(v.verdict, Verdict::No);
            assert_eq!(
                v.components[0].failed_checks,
                vec![CHECK_DISTANCE.to_string()]
            );
        }
    }

    #[test]
    fn essentially_pure_pair_is_yes_with_certificate() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phis = [ket(&[1.0, 0.0]), ket(&[s, s])];
        let sigma = DensityMatrix::diagonal(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let (states, cert) =
            essentially_pure_family(&phis, &sigma, &CMatrix::identity(4, 4)).unwrap();
        assert!(cert.verify(&states, 1e-12));
        let comm =
            states[0].matrix() * states[1].matrix() - states[1].matrix() * states[0].matrix();
        assert!(max_abs(&comm) > 1e-3);
        let d = trace_distance(&states[0], &states[1]).unwrap();
        let w = metrics::wcd(&states[0], &states[1], tol::RANK).unwrap();
        assert!((d - w).abs() < 1e-10);
        let v = can_purify_perfectly(&states[0], &states[1], PAIR_TEST_TOL).unwrap();
        assert_eq!(v.verdict, Verdict::Yes);
        let built = v.certificate.expect("certificate for a certified pair");
        assert!(built.defect(&states).unwrap() <= 1e-8);
    }

    #[test]
    fn certify_random_essentially_pure_pairs() {
        let mut rng = rng_from_seed(44);
        for _ in 0..20 {
            let (states, _) = sample_essentially_pure_pair(2, 3, &mut rng).unwrap();
            let cert = certify_pair(&states[0], &states[1]).expect("certifiable");
            assert!(cert.defect(&states).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn family_shares_spectrum_of_sigma() {
        let mut rng = rng_from_seed(5);
        let sigma = sample_mixed(3, 3, &mut rng).unwrap();
        let u = haar_unitary(6, &mut rng);
        let phis: Vec<_> = (0..4).map(|_| sample_pure(2, &mut rng)).collect();
        let (states, _) = essentially_pure_family(&phis, &sigma, &u).unwrap();
        let target = sigma.spectrum();
        for s in &states {
            let spec = s.spectrum();
            for k in 0..3 {
                assert!((spec[k] - target[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn family_with_pure_sigma_is_pure() {
        let sigma = ket(&[0.0, 1.0]).to_density();
        let (states, _) = essentially_pure_family(
            &[random_pure(2, 1), random_pure(2, 2)],
            &sigma,
            &CMatrix::identity(4, 4),
        )
        .unwrap();
        assert!(states.iter().all(|s| s.is_pure(1e-10)));
        let bad = CMatrix::identity(4, 4) * real(2.0);
        assert!(matches!(
            essentially_pure_family(&[random_pure(2, 1)], &sigma, &bad),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn decomposition_examples() {
        let basis = |i| PureStateVector::basis(4, i).to_density();
        let three: Vec<_> = (0..3).map(basis).collect();
        assert_eq!(
            orthogonal_union_decomposition(&three, 1e-9),
            vec![vec![0], vec![1], vec![2]]
        );

        let overlapping: Vec<_> = (0..3).map(|s| random_mixed(3, 3, s).unwrap()).collect();
        assert_eq!(
            orthogonal_union_decomposition(&overlapping, 1e-9),
            vec![vec![0, 1, 2]]
        );

        let block = |v: [f64; 2]| ket(&[0.0, 0.0, v[0], v[1]]).to_density();
        let set = vec![basis(0), basis(1), block([1.0, 0.0]), block([1.0, 1.0])];
        assert_eq!(
            orthogonal_union_decomposition(&set, 1e-9),
            vec![vec![0], vec![1], vec![2, 3]]
        );
    }

    #[test]
    fn analyze_orthogonal_pure_set() {
        let set: Vec<_> = (0..4)
            .map(|i| PureStateVector::basis(4, i).to_density())
            .collect();
        let v = analyze_set(&Ensemble::uniform(set).unwrap(), PAIR_TEST_TOL).unwrap();
        assert_eq!(v.verdict, Verdict::Yes);
        assert_eq!(v.components.len(), 4);
    }

    #[test]
    fn analyze_set_with_commuting_pair_is_no() {
        let (a, b) = random_commuting_pair(3, 9).unwrap();
        let other = DensityMatrix::maximally_mixed(3);
        let v = analyze_set(
            &Ensemble::uniform(vec![a, b, other]).unwrap(),
            PAIR_TEST_TOL,
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::No);
        assert!(!v.components[0].failed_checks.is_empty());
    }

    #[test]
    fn analyze_essentially_pure_triple_is_undetermined() {
        let mut rng = rng_from_seed(71);
        let sigma = sample_mixed(2, 2, &mut rng).unwrap();
        let u = haar_unitary(4, &mut rng);
        let phis: Vec<_> = (0..3).map(|_| sample_pure(2, &mut rng)).collect();
        let (states, _) = essentially_pure_family(&phis, &sigma, &u).unwrap();
        let v = analyze_set(&Ensemble::uniform(states).unwrap(), PAIR_TEST_TOL).unwrap();
        assert_eq!(v.verdict, Verdict::Undetermined);
        assert!(v.components[0].failed_checks.is_empty());
    }

    #[test]
    fn analyze_pair_component_carries_certificate() {
        let mut rng = rng_from_seed(8);
        let (states, _) = sample_essentially_pure_pair(2, 2, &mut rng).unwrap();
        let far = PureStateVector::basis(4, 0).to_density();
        // append an orthogonal block by embedding into dim 8
        let embed = |m: &CMatrix, offset: usize| {
            let mut big = CMatrix::zeros(8, 8);
            big.view_mut((offset, offset), (4, 4)).copy_from(m);
            DensityMatrix::new(big).unwrap()
        };
        let set = vec![
            embed(states[0].matrix(), 0),
            embed(states[1].matrix(), 0),
            embed(far.matrix(), 4),
        ];
        let v = analyze_set(&Ensemble::uniform(set.clone()).unwrap(), PAIR_TEST_TOL).unwrap();
        assert_eq!(v.verdict, Verdict::Yes);
        assert_eq!(v.components.len(), 2);
        let pair = &v.components[0];
        assert!(pair.certificate.as_ref().unwrap().verify(&set[..2], 1e-8));
    }

    #[test]
    fn verdict_json_shape() {
        let (a, b) = random_commuting_pair(2, 0).unwrap();
        let v = can_purify_perfectly(&a, &b, PAIR_TEST_TOL).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["verdict"], "NO");
        assert!(json["trace_distance"].is_number());
        assert!(json["wcd"].is_number());
        assert!(json["components"].is_array());
        assert!(json["certificate"].is_null());
    }

    #[test]
    fn uhlmann_closed_form_matches_fidelity() {
        for seed in 0..20 {
            let a = random_mixed(4, 1 + (seed as usize % 4), seed).unwrap();
            let b = random_mixed(4, 1 + ((seed as usize + 1) % 4), 100 + seed).unwrap();
            let f = fidelity(&a, &b).unwrap();
            let g = max_purification_overlap(&a, &b).unwrap();
            assert!((g - f).abs() <= 1e-8, "{seed} {f} {g}");
        }
    }

    #[test]
    fn low_dimension_demo() {
        assert_eq!(min_dimension_demo(2, 50, 0, 1).unwrap().yes_count, 0);
        assert_eq!(min_dimension_demo(3, 50, 0, 2).unwrap().yes_count, 0);
        assert_eq!(min_dimension_demo(4, 20, 5, 3).unwrap().yes_count, 5);
        assert!(min_dimension_demo(3, 1, 1, 0).is_err());
    }
}
