use super::{Segment, SwitchingLaw};
use crate::error::{Error, Result};

/// Absolute tolerance for merging nearly-coincident event times of the two
/// clocks. With an irrational speed ratio genuine collisions cannot occur,
/// so only floating-point twins are merged.
const EVENT_DEDUP_TOL: f64 = 1e-12;

/// Value of the two-bang square wave with first-bang length `t0` and period
/// `t`: 0 on [0, t0) and 1 on [t0, t), repeated.
fn square_wave(t0: f64, t: f64, time: f64) -> usize {
    let phase = time.rem_euclid(t);
    usize::from(phase >= t0)
}

/// Builds the four-vertex law obtained by running the square wave at unit
/// speed and at speed `alpha` simultaneously: on each segment between two
/// consecutive switching events the vertex index is `i + 2j` where `i` is
/// the unit-speed value and `j` the accelerated value. The result is a
/// finite (non-periodic) law covering `[0, horizon]`.
pub fn quasi_periodic_law(t0: f64, t: f64, alpha: f64, horizon: f64) -> Result<SwitchingLaw> {
    if !(t0 > 0.0) || !(t > t0) || !t.is_finite() {
        return Err(Error::Input(format!(
            "bang length {t0} and period {t} must satisfy 0 < t0 < t"
        )));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Input(format!("speed ratio must be positive, got {alpha}")));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Input(format!("horizon must be positive, got {horizon}")));
    }

    // switching events of the unit-speed wave inside (0, horizon)
    let mut events: Vec<f64> = Vec::new();
    let mut m = 0.0f64;
    loop {
        let rise = m * t + t0;
        let fall = (m + 1.0) * t;
        if rise < horizon {
            events.push(rise);
        }
        if fall < horizon {
            events.push(fall);
        } else {
            break;
        }
        m += 1.0;
    }
    // events of the accelerated wave: the same events divided by alpha
    let mut m = 0.0f64;
    loop {
        let rise = (m * t + t0) / alpha;
        let fall = ((m + 1.0) * t) / alpha;
        if rise < horizon {
            events.push(rise);
        }
        if fall < horizon {
            events.push(fall);
        } else {
            break;
        }
        m += 1.0;
    }
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    events.dedup_by(|a, b| (*a - *b).abs() <= EVENT_DEDUP_TOL);

    let mut boundaries = Vec::with_capacity(events.len() + 2);
    boundaries.push(0.0);
    for e in events {
        if e > EVENT_DEDUP_TOL && e < horizon - EVENT_DEDUP_TOL {
            boundaries.push(e);
        }
    }
    boundaries.push(horizon);

    let mut segments = Vec::with_capacity(boundaries.len() - 1);
    for pair in boundaries.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = 0.5 * (a + b);
        let i = square_wave(t0, t, mid);
        let j = square_wave(t0, t, alpha * mid);
        let mut weights = vec![0.0; 4];
        weights[i + 2 * j] = 1.0;
        segments.push(Segment { duration: b - a, weights });
    }
    SwitchingLaw::new(segments, false)
}
