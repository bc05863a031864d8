//! Seeded randomized property suites with JSON counterexample reports.
//!
//! Each suite draws all of its inputs from one ChaCha stream seeded by the
//! caller, so a report is reproducible from `(suite, trials, seed)`.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::channels::{
    equal_distance_pure_outputs, pure_pair_contraction, sample_channel, tensor_with_state,
    KrausChannel, TP_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs, real, tol, CVector};
use crate::metrics::{fidelity, trace_distance, wcd};
use crate::purification::{
    analyze_set, can_purify_perfectly, max_purification_overlap, purify_state,
    sample_essentially_pure_pair, sample_overlapping_mixed_pair, PairQuantities, Verdict,
    PAIR_TEST_TOL,
};
use crate::states::{
    rng_from_seed, sample_commuting_pair, sample_mixed, sample_pure, DensityMatrix, Ensemble,
    PureStateVector,
};

type Rng8 = rand_chacha::ChaCha8Rng;

/// Counterexamples kept in a report; failures beyond this are only counted.
pub const MAX_COUNTEREXAMPLES: usize = 10;

pub const SUITES: &[(&str, &str)] = &[
    (
        "data-processing",
        "trace distance never grows under a random channel",
    ),
    (
        "dim-nogo",
        "no overlapping mixed pair in dims 2 and 3 is perfectly purifiable",
    ),
    (
        "purify-faithful",
        "purify_state output is pure and reduces to the input",
    ),
    (
        "purity-nogo",
        "appending an auxiliary state never raises purity",
    ),
    (
        "constant-map",
        "distinct pure outputs force a mixed output on the midpoint",
    ),
    (
        "equal-distance",
        "equal-distance construction hits wcd with pure outputs",
    ),
    ("composition", "composed channels stay trace preserving"),
    ("uhlmann", "maximal purification overlap equals fidelity"),
    (
        "bound-ordering",
        "lower bound never exceeds either upper bound",
    ),
    (
        "verdict-soundness",
        "YES verdicts carry verifying certificates, commuting pairs are NO",
    ),
];

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub checks: usize,
    pub failures: usize,
    pub passed: bool,
    pub counterexamples: Vec<Value>,
}

struct Recorder {
    checks: usize,
    failures: usize,
    examples: Vec<Value>,
}

impl Recorder {
    fn new() -> Self {
        Self {
            checks: 0,
            failures: 0,
            examples: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, example: impl FnOnce() -> Value) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < MAX_COUNTEREXAMPLES {
                self.examples.push(example());
            }
        }
    }
}

fn ket_json(p: &PureStateVector) -> Value {
    json!(p
        .amplitudes()
        .iter()
        .map(|z| [z.re, z.im])
        .collect::<Vec<_>>())
}

fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=dim);
    sample_mixed(dim, rank, rng)
}

/// Channel `in_dim -> out_dim` with a random admissible Kraus count.
fn random_channel_for<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    let count = in_dim.div_ceil(out_dim) + rng.random_range(0..=2);
    sample_channel(in_dim, out_dim, count, rng)
}

pub fn run_suite(name: &str, trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = rng_from_seed(seed);
    let mut rec = Recorder::new();
    let (rng, r) = (&mut rng, &mut rec);
    match name {
        "data-processing" => data_processing(trials, rng, r)?,
        "dim-nogo" => dim_nogo(trials, rng, r)?,
        "purify-faithful" => purify_faithful(trials, rng, r)?,
        "purity-nogo" => purity_nogo(trials, rng, r)?,
        "constant-map" => constant_map(trials, rng, r)?,
        "equal-distance" => equal_distance(trials, rng, r)?,
        "composition" => composition(trials, rng, r)?,
        "uhlmann" => uhlmann(trials, rng, r)?,
        "bound-ordering" => bound_ordering(trials, rng, r)?,
        "verdict-soundness" => verdict_soundness(trials, rng, r)?,
        other => {
            let known: Vec<&str> = SUITES.iter().map(|s| s.0).collect();
            return Err(Error::InvalidArgument(format!(
                "unknown suite '{other}' (known: {})",
                known.join(", ")
            )));
        }
    }
    Ok(SuiteReport {
        suite: name.to_string(),
        trials,
        seed,
        checks: rec.checks,
        failures: rec.failures,
        passed: rec.failures == 0,
        counterexamples: rec.examples,
    })
}

fn data_processing(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for trial in 0..trials {
        let d = rng.random_range(2..=4);
        let out = rng.random_range(2..=4);
        let channel = random_channel_for(d, out, rng)?;
        let (a, b) = (random_state(d, rng)?, random_state(d, rng)?);
        let before = trace_distance(&a, &b)?;
        let after = trace_distance(&channel.apply(&a)?, &channel.apply(&b)?)?;
        rec.check(after <= before + 1e-9, || {
            json!({"trial": trial, "before": before, "after": after, "rho": a, "sigma": b, "channel": channel})
        });
    }
    Ok(())
}

fn dim_nogo(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for dim in [2, 3] {
        for trial in 0..trials {
            let (a, b) = sample_overlapping_mixed_pair(dim, rng)?;
            let v = can_purify_perfectly(&a, &b, PAIR_TEST_TOL)?;
            rec.check(v.verdict != Verdict::Yes, || {
                json!({"dim": dim, "trial": trial, "trace_distance": v.trace_distance, "wcd": v.wcd, "rho": a, "sigma": b})
            });
        }
    }
    Ok(())
}

fn purify_faithful(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for trial in 0..trials {
        let d = rng.random_range(2..=8);
        let rho = random_state(d, rng)?;
        let p = purify_state(&rho, tol::RANK);
        let err = max_abs(&(p.reduced() - rho.matrix()));
        let proj = linalg::outer(p.state.amplitudes());
        let purity = linalg::trace(&(&proj * &proj)).re;
        rec.check(err <= 1e-10 && purity >= 1.0 - 1e-10, || {
            json!({"trial": trial, "dim": d, "reduction_error": err, "purity": purity, "rho": rho})
        });
    }
    Ok(())
}

fn purity_nogo(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for trial in 0..trials {
        let d = rng.random_range(2..=4);
        let rho = random_state(d, rng)?;
        let aux_dim = rng.random_range(1..=3);
        let sigma = random_state(aux_dim, rng)?;
        let out = tensor_with_state(d, &sigma).apply(&rho)?;
        let (before, after) = (rho.purity(), out.purity());
        rec.check(after <= before + 1e-12, || {
            json!({"trial": trial, "purity_in": before, "purity_out": after, "rho": rho, "sigma": sigma})
        });
    }
    Ok(())
}

/// Pure state at overlap exactly `c` with `phi`.
fn at_overlap<R: Rng + ?Sized>(
    phi: &PureStateVector,
    c: f64,
    rng: &mut R,
) -> Result<PureStateVector> {
    let r = sample_pure(phi.dim(), rng);
    let perp: CVector = r.amplitudes() - phi.amplitudes() * phi.inner(&r);
    let perp = PureStateVector::normalized(perp)?;
    PureStateVector::new(
        phi.amplitudes() * real(c) + perp.amplitudes() * real((1.0 - c * c).max(0.0).sqrt()),
    )
}

fn constant_map(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for trial in 0..trials {
        let d = rng.random_range(2..=4);
        let out_dim = rng.random_range(2..=3);
        let (channel, a, b) = if trial % 2 == 0 {
            let (a, b) = (sample_pure(d, rng), sample_pure(d, rng));
            let phi = sample_pure(out_dim, rng);
            let c0 = a.inner(&b).norm();
            let c = c0 + (1.0 - c0) * rng.random::<f64>();
            let phi_prime = at_overlap(&phi, c, rng)?;
            let ch = pure_pair_contraction(&a, &b, &phi, &phi_prime)?;
            (ch, a.to_density(), b.to_density())
        } else {
            (
                random_channel_for(d, out_dim, rng)?,
                random_state(d, rng)?,
                random_state(d, rng)?,
            )
        };
        let mid = DensityMatrix::new((a.matrix() + b.matrix()) * real(0.5))?;
        let (oa, ob, om) = (channel.apply(&a)?, channel.apply(&b)?, channel.apply(&mid)?);
        let dist = trace_distance(&oa, &ob)?;
        if dist > 1e-6 {
            let purity = om.purity();
            rec.check(purity < 1.0 - 1e-8, || {
                json!({"trial": trial, "output_distance": dist, "midpoint_purity": purity, "channel": channel, "rho1": a, "rho2": b})
            });
        }
    }
    Ok(())
}

fn equal_distance(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for trial in 0..trials {
        let ra = rng.random_range(1..=2);
        let rb = rng.random_range(1..=2);
        let (a, b) = (sample_mixed(4, ra, rng)?, sample_mixed(4, rb, rng)?);
        let map = equal_distance_pure_outputs(&a, &b, tol::RANK)?;
        let (oa, ob) = (map.channel.apply(&a)?, map.channel.apply(&b)?);
        let w = wcd(&a, &b, tol::RANK)?;
        let dist = trace_distance(&oa, &ob)?;
        let defect = map.channel.tp_defect();
        let ok = oa.purity() >= 1.0 - 1e-7
            && ob.purity() >= 1.0 - 1e-7
            && (dist - w).abs() <= 1e-7
            && defect <= TP_TOL;
        rec.check(ok, || {
            json!({
                "trial": trial, "wcd": w, "output_distance": dist, "tp_defect": defect,
                "purities": [oa.purity(), ob.purity()], "rho": a, "sigma": b,
                "phi": ket_json(&map.phi), "phi_prime": ket_json(&map.phi_prime),
            })
        });
    }
    Ok(())
}

fn composition(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for trial in 0..trials {
        let (d0, d1, d2) = (
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        );
        let first = random_channel_for(d0, d1, rng)?;
        let second = random_channel_for(d1, d2, rng)?;
        let composed = second.compose(&first)?;
        let defect = composed.tp_defect();
        rec.check(
            defect <= TP_TOL,
            || json!({"trial": trial, "tp_defect": defect, "first": first, "second": second}),
        );
    }
    Ok(())
}

fn uhlmann(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for trial in 0..trials {
        let d = rng.random_range(2..=4);
        let (a, b) = (random_state(d, rng)?, random_state(d, rng)?);
        let f = fidelity(&a, &b)?;
        let overlap = max_purification_overlap(&a, &b)?;
        rec.check(
            (f - overlap).abs() <= 1e-8,
            || json!({"trial": trial, "fidelity": f, "max_overlap": overlap, "rho": a, "sigma": b}),
        );
    }
    Ok(())
}

fn bound_ordering(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for trial in 0..trials {
        let d = rng.random_range(2..=4);
        let (a, b) = (random_state(d, rng)?, random_state(d, rng)?);
        let eta: f64 = rng.random_range(0.01..0.99);
        let bounds = PairQuantities::compute(&a, &b)?.bounds(eta.min(1.0 - eta));
        let ok = bounds.lower <= bounds.upper_const + 1e-9
            && bounds.lower <= bounds.upper_uhlmann + 1e-9
            && [bounds.lower, bounds.upper_const, bounds.upper_uhlmann]
                .iter()
                .all(|x| x.is_finite() && *x >= 0.0);
        rec.check(
            ok,
            || json!({"trial": trial, "eta": eta, "bounds": bounds, "rho": a, "sigma": b}),
        );
    }
    Ok(())
}

fn verdict_soundness(trials: usize, rng: &mut Rng8, rec: &mut Recorder) -> Result<()> {
    for trial in 0..trials {
        let dim_b = rng.random_range(2..=3);
        let (states, _) = sample_essentially_pure_pair(2, dim_b, rng)?;
        let v = analyze_set(&Ensemble::uniform(states.clone())?, PAIR_TEST_TOL)?;
        let defect = v
            .certificate
            .as_ref()
            .map(|c| c.defect(&states))
            .transpose()?;
        let ok = v.verdict == Verdict::Yes && defect.is_some_and(|d| d <= 1e-8);
        rec.check(ok, || {
            json!({"trial": trial, "kind": "essentially_pure", "verdict": v.verdict, "certificate_defect": defect, "states": states})
        });

        let d = rng.random_range(2..=4);
        let (a, b) = sample_commuting_pair(d, rng)?;
        let v = can_purify_perfectly(&a, &b, PAIR_TEST_TOL)?;
        rec.check(v.verdict == Verdict::No, || {
            json!({"trial": trial, "kind": "commuting", "verdict": v.verdict, "rho": a, "sigma": b})
        });
    }
    Ok(())
}
