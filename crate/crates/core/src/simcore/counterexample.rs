//! Long-horizon run of the lifted system under the quasi-periodic law.
//!
//! Driving the four-vertex lift with the law indexed by the two bang clocks
//! (u(t), u(alpha t)) makes the 4D state factor exactly as
//! y(t) = x(t) (x) z(alpha t), where x and z both follow the planar
//! two-bang law. When that planar law traces a closed orbit, both factor
//! norms stay inside a fixed positive band, so |y(t)| is pinched between the
//! squared band edges for all time: the lifted trajectory neither decays nor
//! blows up. The run reports the observed norm band and the worst deviation
//! from the tensor factorization, which doubles as an end-to-end check of
//! the event grid and the propagators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lift::LiftedFamily;
use crate::smallmat::{kron_vec, norm2};

use super::{propagate, quasi_periodic_law, SwitchingLaw};

/// Hard failure threshold on the tensor-factorization mismatch; the
/// acceptance level is tighter, this one catches structural bugs.
pub const TENSOR_MISMATCH_LIMIT: f64 = 1e-5;

/// Samples per planar law period in the 4D run.
const SAMPLES_PER_PERIOD: f64 = 64.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CounterexampleReport {
    pub horizon: f64,
    pub initial_norm: f64,
    /// Extremes of |y(t)| over the sample grid (switch times included).
    pub inf_norm: f64,
    pub sup_norm: f64,
    /// Worst |y(t) - x(t) (x) z(alpha t)| over the samples.
    pub tensor_mismatch: f64,
    pub sample_count: usize,
    pub segment_count: usize,
    pub min_event_gap: f64,
    pub max_event_gap: f64,
}

/// Propagates w (x) w under the quasi-periodic four-vertex law up to
/// `horizon` and compares against the tensor product of the two planar
/// factor trajectories. `t0` and `t` are the planar law's first-bang
/// duration and period.
pub fn counterexample_run(
    l: &LiftedFamily,
    t0: f64,
    t: f64,
    w: [f64; 2],
    horizon: f64,
) -> Result<CounterexampleReport> {
    counterexample_trajectory(l, t0, t, w, horizon).map(|(report, _)| report)
}

/// Same run as [`counterexample_run`], also returning the sampled lifted
/// trajectory for plotting.
pub fn counterexample_trajectory(
    l: &LiftedFamily,
    t0: f64,
    t: f64,
    w: [f64; 2],
    horizon: f64,
) -> Result<(CounterexampleReport, super::Trajectory)> {
    let norm_w = norm2(&w);
    if !(norm_w > 0.0) || !norm_w.is_finite() {
        return Err(Error::Input("initial planar point must be nonzero and finite".into()));
    }
    let alpha = l.alpha();
    let law4 = quasi_periodic_law(t0, t, alpha, horizon)?;
    let y0 = kron_vec(&w, &w);
    let sample_step = t / SAMPLES_PER_PERIOD;
    let traj4 = propagate(&l.family(), &law4, &y0, horizon, sample_step)?;

    // planar factors under the same two-bang law, one of them on the
    // alpha-scaled clock; a one-period margin keeps end-time lookups inside
    let planar_law = SwitchingLaw::periodic_bangs(&[(t0, 0), (t - t0, 1)], 2)?;
    let family2 = l.source().family();
    let x_traj = propagate(&family2, &planar_law, &w, horizon + t, t)?;
    let z_traj = propagate(&family2, &planar_law, &w, alpha * horizon + t, t)?;

    let mut inf_norm = f64::INFINITY;
    let mut sup_norm = 0.0_f64;
    let mut tensor_mismatch = 0.0_f64;
    for (time, y) in traj4.times().iter().zip(traj4.states()) {
        let n = norm2(y);
        inf_norm = inf_norm.min(n);
        sup_norm = sup_norm.max(n);
        let x = x_traj.state_at(*time)?;
        let z = z_traj.state_at(alpha * *time)?;
        let factored = kron_vec(&x, &z);
        let gap: Vec<f64> = y.iter().zip(&factored).map(|(a, b)| a - b).collect();
        tensor_mismatch = tensor_mismatch.max(norm2(&gap));
    }
    if tensor_mismatch > TENSOR_MISMATCH_LIMIT {
        return Err(Error::FactorizationFailure {
            observed: tensor_mismatch,
            limit: TENSOR_MISMATCH_LIMIT,
        });
    }

    let report = CounterexampleReport {
        horizon,
        initial_norm: norm2(&y0),
        inf_norm,
        sup_norm,
        tensor_mismatch,
        sample_count: traj4.times().len(),
        segment_count: law4.segments().len(),
        min_event_gap: law4.min_duration(),
        max_event_gap: law4.max_duration(),
    };
    Ok((report, traj4))
}
