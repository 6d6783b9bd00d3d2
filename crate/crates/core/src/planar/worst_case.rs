//! Extremal bang-bang orbits found by axis-crossing event detection.
//!
//! Trajectories of a rotating planar pair cross the coordinate axes
//! transversally; the extremal law holds one fixed vertex per pair of
//! opposite quadrants and switches exactly at the crossings. Which vertex
//! goes with which quadrant pair admits two assignments, one the time
//! reversal of the other. Both are traced and the faster-growing orbit is
//! returned, so the result is the worst case over this family of laws. For
//! the tau-pair this picks the assignment that freezes the Lyapunov
//! function: vertex 0 while the coordinates share a sign.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simcore::{monodromy, propagate, SwitchedFamily, SwitchingLaw, Segment, Trajectory};
use crate::smallmat::{norm2, SmallMatrix};

/// Coarse event-march step; quadrant transit times of interest are O(1).
const MARCH_DT: f64 = 0.005;

/// Bisection window width for a crossing time.
const BISECT_TOL: f64 = 1e-12;

/// Give up if no axis crossing occurs within this much trajectory time.
const CROSSING_HORIZON: f64 = 200.0;

/// Samples per law period in the returned trajectory.
const SAMPLES_PER_PERIOD: f64 = 256.0;

/// Two-bang periodic law in canonical form: vertex 0 on [0, first_bang),
/// vertex 1 on [first_bang, period), repeated. `phase` locates the queried
/// initial point inside the cycle: the orbit through it sees vertex
/// `u(t + phase)` at time t.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorstCaseLaw {
    pub first_bang: f64,
    pub second_bang: f64,
    pub period: f64,
    pub phase: f64,
}

impl WorstCaseLaw {
    pub fn switching_law(&self) -> SwitchingLaw {
        SwitchingLaw::periodic_bangs(&[(self.first_bang, 0), (self.second_bang, 1)], 2)
            .expect("positive bang durations")
    }
}

/// One state period of the extremal orbit plus its diagnostics. The gaps are
/// relative to the initial norm; they are near zero only when the orbit is
/// genuinely periodic (growth rate zero), and are reported, not enforced.
#[derive(Clone, Debug)]
pub struct WorstCaseOrbit {
    pub law: WorstCaseLaw,
    pub trajectory: Trajectory,
    pub switch_times: Vec<f64>,
    pub switch_points: Vec<[f64; 2]>,
    /// One-period spectral radius of the canonical law's monodromy.
    pub monodromy_rho: f64,
    /// |x(state period) - x(0)| / |x(0)|
    pub closure_gap: f64,
    /// |x(half state period) + x(0)| / |x(0)|
    pub antipode_gap: f64,
}

struct TracedOrbit {
    bangs: Vec<(f64, usize)>,
    crossings: Vec<(f64, [f64; 2])>,
    start_u: usize,
    on_axis: bool,
}

/// Traces the orbit through `w`, switching vertex at every axis crossing.
/// `flip` selects the quadrant-to-vertex assignment: with `flip = false`,
/// vertex 0 is active while x1 x2 > 0.
fn trace_orbit(
    vertices: &[SmallMatrix; 2],
    w: [f64; 2],
    flip: bool,
    events_needed: usize,
) -> Result<TracedOrbit> {
    let norm_w = norm2(&w);
    let on_axis = w[0].abs().min(w[1].abs()) <= 1e-12 * norm_w;
    let vertex_for_sign = |q: f64| -> usize {
        let base = if q > 0.0 { 0 } else { 1 };
        if flip {
            1 - base
        } else {
            base
        }
    };

    // q is the sign of x1 x2 in the quadrant being traversed.
    let mut q: f64;
    let mut u: usize;
    if on_axis {
        // Entering-quadrant sign from the product derivative
        // d(x1 x2)/dt = (Mx)_1 x2 + x1 (Mx)_2, which for an axis point has
        // the same sign for both candidate vertices or vanishes.
        let mut chosen = None;
        for sign in [1.0_f64, -1.0] {
            let cand = vertex_for_sign(sign);
            let v = vertices[cand].matvec(&w)?;
            let s = v[0] * w[1] + w[0] * v[1];
            if s * sign > 1e-14 * norm_w * norm_w {
                chosen = Some((sign, cand));
                break;
            }
        }
        match chosen {
            Some((sign, cand)) => {
                q = sign;
                u = cand;
            }
            None => {
                // no vertex drives the state off the axis; march anyway and
                // let the horizon guard report non-rotation
                q = 1.0;
                u = vertex_for_sign(1.0);
            }
        }
    } else {
        q = (w[0] * w[1]).signum();
        u = vertex_for_sign(q);
    }

    let mut bangs = Vec::new();
    let mut crossings = Vec::new();
    let start_u = u;
    let mut seg_t = 0.0_f64;
    let mut seg_x = w;

    while crossings.len() < events_needed {
        let m = &vertices[u];
        let step_flow = m.scale(MARCH_DT).expm()?;
        let mut lo = 0.0_f64;
        let mut hi;
        let mut t_off = 0.0_f64;
        let mut x_march = seg_x.to_vec();
        loop {
            let x_next = step_flow.matvec(&x_march)?;
            t_off += MARCH_DT;
            let h = q * x_next[0] * x_next[1];
            let scale = x_next[0] * x_next[0] + x_next[1] * x_next[1];
            if h < -1e-18 * scale {
                hi = t_off;
                break;
            }
            lo = t_off;
            x_march = x_next;
            if seg_t + t_off > CROSSING_HORIZON {
                return Err(Error::NonRotating(CROSSING_HORIZON));
            }
        }
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let xm = m.scale(mid).expm()?.matvec(&seg_x)?;
            if q * xm[0] * xm[1] < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let dt = 0.5 * (lo + hi);
        let xc = m.scale(dt).expm()?.matvec(&seg_x)?;
        let x_cross = [xc[0], xc[1]];
        bangs.push((dt, u));
        seg_t += dt;
        seg_x = x_cross;
        crossings.push((seg_t, x_cross));
        q = -q;
        u = vertex_for_sign(q);
    }

    Ok(TracedOrbit { bangs, crossings, start_u, on_axis })
}

fn orbit_report(
    family: &SwitchedFamily,
    traced: TracedOrbit,
    w: [f64; 2],
) -> Result<WorstCaseOrbit> {
    // The first bang is partial unless the start point sits on an axis;
    // full bangs give the two durations and the state period.
    let full = if traced.on_axis { &traced.bangs[..4] } else { &traced.bangs[1..5] };
    let first_bang = full
        .iter()
        .find(|(_, u)| *u == 0)
        .map(|(d, _)| *d)
        .ok_or_else(|| Error::Input("orbit never activates vertex 0".into()))?;
    let second_bang = full
        .iter()
        .find(|(_, u)| *u == 1)
        .map(|(d, _)| *d)
        .ok_or_else(|| Error::Input("orbit never activates vertex 1".into()))?;
    let period = first_bang + second_bang;
    let state_period: f64 = full.iter().map(|(d, _)| d).sum();

    // Start time of the first bang on vertex 0: t = 0 if the orbit begins
    // there, otherwise the first crossing that hands control to vertex 0.
    let first_zero_start = if traced.on_axis && traced.start_u == 0 {
        0.0
    } else {
        // the vertex entered at crossing k is the vertex of bang k + 1
        (0..traced.bangs.len() - 1)
            .find(|&k| traced.bangs[k + 1].1 == 0)
            .map(|k| traced.crossings[k].0)
            .ok_or_else(|| Error::Input("orbit never activates vertex 0".into()))?
    };
    let phase = (period - first_zero_start).rem_euclid(period);

    let segments: Vec<Segment> = traced
        .bangs
        .iter()
        .map(|(d, u)| Segment {
            duration: *d,
            weights: if *u == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] },
        })
        .collect();
    let orbit_law = SwitchingLaw::new(segments, false)?;
    let trajectory = propagate(
        family,
        &orbit_law,
        &w,
        state_period,
        period / SAMPLES_PER_PERIOD,
    )?;

    let mut switch_times = Vec::new();
    let mut switch_points = Vec::new();
    if traced.on_axis {
        switch_times.push(0.0);
        switch_points.push(w);
    }
    for (t, x) in &traced.crossings {
        if *t <= state_period * (1.0 + 1e-12) {
            switch_times.push(*t);
            switch_points.push(*x);
        }
    }

    let norm_w = norm2(&w);
    let x_full = trajectory.state_at(state_period)?;
    let closure_gap = norm2(&[x_full[0] - w[0], x_full[1] - w[1]]) / norm_w;
    let x_half = trajectory.state_at(0.5 * state_period)?;
    let antipode_gap = norm2(&[x_half[0] + w[0], x_half[1] + w[1]]) / norm_w;

    let law = WorstCaseLaw { first_bang, second_bang, period, phase };
    let rep = monodromy(family, &law.switching_law())?;

    Ok(WorstCaseOrbit {
        law,
        trajectory,
        switch_times,
        switch_points,
        monodromy_rho: rep.spectral_radius,
        closure_gap,
        antipode_gap,
    })
}

/// Finds the extremal axis-switching orbit through `w`: event-detects the
/// crossings by marching and bisecting the coordinate-product sign on the
/// exact segment flows, measures the bang durations and the phase of `w`,
/// and returns one full state period of the trajectory. Errors with
/// `NonRotating` when no axis crossing happens within the horizon.
pub fn worst_case_law_and_period(p: &super::PlanarPair, w: [f64; 2]) -> Result<WorstCaseOrbit> {
    let norm_w = norm2(&w);
    if !(norm_w > 0.0) || !norm_w.is_finite() {
        return Err(Error::Input("initial point must be nonzero and finite".into()));
    }
    let vertices = [p.a0().clone(), p.a1().clone()];
    let family = p.family();

    let mut best: Option<WorstCaseOrbit> = None;
    let mut last_err = None;
    for flip in [false, true] {
        // 5 crossings cover a full state period even when the first bang is
        // partial (interior start)
        match trace_orbit(&vertices, w, flip, 5)
            .and_then(|traced| orbit_report(&family, traced, w))
        {
            Ok(orbit) => {
                let better = match &best {
                    None => true,
                    Some(b) => orbit.monodromy_rho > b.monodromy_rho * (1.0 + 1e-12),
                };
                if better {
                    best = Some(orbit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(orbit) => Ok(orbit),
        None => Err(last_err.unwrap_or(Error::NonRotating(CROSSING_HORIZON))),
    }
}

/// Exponential growth rate of the extremal orbit: log spectral radius of the
/// one-period monodromy divided by the law period. Zero exactly when the
/// worst trajectories are periodic.
pub fn growth_rate(p: &super::PlanarPair) -> Result<f64> {
    let orbit = worst_case_law_and_period(p, [1.0, 0.0])?;
    Ok(orbit.monodromy_rho.ln() / orbit.law.period)
}
