//! Randomized search for a non-decaying periodic law on a lifted family.
//!
//! Every periodic law, however its segments are drawn from the hull, should
//! have a one-period spectral radius strictly below 1; a single law at or
//! above 1 would contradict decay under periodic switching and is returned
//! as counter-evidence. Each sampled law also gets a trajectory-level check:
//! iterating the monodromy must stay under the eigenbasis-conditioned decay
//! envelope 2 k(V) rho^n |x0|, computed in log space so deep decay cannot
//! underflow.

use serde::{Deserialize, Serialize};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lift::LiftedFamily;
use crate::smallmat::{eigenbasis_condition, norm2};

use super::monodromy::DECAY_BAND;
use super::{monodromy, Segment, SwitchingLaw};

const SEGMENTS_MAX: usize = 12;
const DURATION_RANGE: (f64, f64) = (0.05, 5.0);
const ENVELOPE_PERIODS: usize = 50;

/// A sampled law that failed to decay, kept for reproduction.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CounterEvidence {
    pub index: usize,
    pub rho: f64,
    pub law: SwitchingLaw,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepReport {
    pub count: usize,
    pub seed: u64,
    pub all_decay: bool,
    pub max_rho: f64,
    pub max_rho_index: usize,
    /// Worst log-space slack in the decay envelope over all laws and
    /// periods: max of ln|x_n| - n ln rho - ln|x_0| - ln(2 k(V)); decay
    /// consistent with rho^n keeps this below zero.
    pub worst_envelope_slack: f64,
    pub envelope_ok: bool,
    pub counter_evidence: Vec<CounterEvidence>,
    /// How the laws were drawn, for the record.
    pub generator: String,
}

fn mix_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over seed xor golden-ratio-scaled index
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn random_law(rng: &mut ChaCha8Rng, vertex_count: usize) -> Result<SwitchingLaw> {
    let nseg = rng.gen_range(1..=SEGMENTS_MAX);
    let (lo, hi) = (DURATION_RANGE.0.ln(), DURATION_RANGE.1.ln());
    let mut segments = Vec::with_capacity(nseg);
    for _ in 0..nseg {
        let duration = rng.gen_range(lo..hi).exp();
        let weights = if rng.gen_bool(0.5) {
            let mut w = vec![0.0; vertex_count];
            w[rng.gen_range(0..vertex_count)] = 1.0;
            w
        } else {
            // exponential draws normalized to the simplex
            let raw: Vec<f64> = (0..vertex_count)
                .map(|_| -(1.0 - rng.gen::<f64>()).ln())
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        };
        segments.push(Segment { duration, weights });
    }
    SwitchingLaw::new(segments, true)
}

/// Draws `count` independent periodic laws on the lifted hull and verifies
/// each one decays: spectral radius below 1 by the classification margin,
/// and iterates bounded by the conditioned envelope. Fully deterministic in
/// (`seed`, `count`).
pub fn periodic_decay_sweep(l: &LiftedFamily, count: usize, seed: u64) -> Result<SweepReport> {
    if count == 0 {
        return Err(Error::Input("sweep needs at least one law".into()));
    }
    let family = l.family();
    let vertex_count = family.vertex_count();
    let mut max_rho = 0.0_f64;
    let mut max_rho_index = 0usize;
    let mut worst_envelope_slack = f64::NEG_INFINITY;
    let mut counter_evidence = Vec::new();

    for index in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, index as u64));
        let law = random_law(&mut rng, vertex_count)?;
        let report = monodromy(&family, &law)?;
        let rho = report.spectral_radius;
        if rho > max_rho {
            max_rho = rho;
            max_rho_index = index;
        }
        if rho >= 1.0 - DECAY_BAND {
            counter_evidence.push(CounterEvidence { index, rho, law: law.clone() });
        }

        // envelope check: |R^n x0| <= 2 k(V) rho^n |x0|, tracked in logs with
        // a renormalized iterate so deep decay cannot underflow
        let kappa = eigenbasis_condition(&report.r)?;
        let log_allow = (2.0 * kappa).ln();
        let dim = family.dim();
        let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n0 = norm2(&x);
        if n0 == 0.0 {
            x[0] = 1.0;
        } else {
            x.iter_mut().for_each(|v| *v /= n0);
        }
        let mut log_norm = 0.0_f64; // ln(|x_n| / |x_0|)
        for n in 1..=ENVELOPE_PERIODS {
            x = report.r.matvec(&x)?;
            let growth = norm2(&x);
            if growth == 0.0 {
                break; // exact annihilation decays trivially
            }
            log_norm += growth.ln();
            x.iter_mut().for_each(|v| *v /= growth);
            let slack = log_norm - n as f64 * rho.ln() - log_allow;
            worst_envelope_slack = worst_envelope_slack.max(slack);
        }
    }

    Ok(SweepReport {
        count,
        seed,
        all_decay: counter_evidence.is_empty(),
        max_rho,
        max_rho_index,
        worst_envelope_slack,
        envelope_ok: worst_envelope_slack <= 0.0,
        counter_evidence,
        generator: format!(
            "per-law chacha8(splitmix64(seed, index)); segments 1..={SEGMENTS_MAX}; \
             durations log-uniform over [{}, {}]; weights per segment: fair coin \
             between a uniform vertex and a normalized exponential convex vector",
            DURATION_RANGE.0, DURATION_RANGE.1
        ),
    })
}
