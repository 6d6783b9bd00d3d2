use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One piece of a switching law: hold the convex combination given by
/// `weights` for `duration` time units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub weights: Vec<f64>,
}

/// Piecewise-constant switching law over the vertices of a family. Periodic
/// laws repeat their segment list forever; finite laws simply end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLaw", into = "RawLaw")]
pub struct SwitchingLaw {
    segments: Vec<Segment>,
    periodic: bool,
}

#[derive(Serialize, Deserialize)]
struct RawLaw {
    segments: Vec<Segment>,
    periodic: bool,
}

impl TryFrom<RawLaw> for SwitchingLaw {
    type Error = Error;

    fn try_from(raw: RawLaw) -> Result<Self> {
        SwitchingLaw::new(raw.segments, raw.periodic)
    }
}

impl From<SwitchingLaw> for RawLaw {
    fn from(law: SwitchingLaw) -> Self {
        RawLaw { segments: law.segments, periodic: law.periodic }
    }
}

impl SwitchingLaw {
    pub fn new(segments: Vec<Segment>, periodic: bool) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Input("switching law needs at least one segment".into()));
        }
        let vertex_count = segments[0].weights.len();
        if vertex_count == 0 {
            return Err(Error::Input("segment weight vector is empty".into()));
        }
        for (k, seg) in segments.iter().enumerate() {
            if !(seg.duration > 0.0) || !seg.duration.is_finite() {
                return Err(Error::Input(format!(
                    "segment {k} has non-positive duration {}",
                    seg.duration
                )));
            }
            if seg.weights.len() != vertex_count {
                return Err(Error::Input(format!(
                    "segment {k} has {} weights, expected {vertex_count}",
                    seg.weights.len()
                )));
            }
            let mut sum = 0.0;
            for &w in &seg.weights {
                if !w.is_finite() {
                    return Err(Error::NonFinite);
                }
                if w < -WEIGHT_SUM_TOL {
                    return Err(Error::Input(format!("segment {k} has negative weight {w}")));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::Input(format!(
                    "segment {k} weights sum to {sum}, expected 1"
                )));
            }
        }
        Ok(SwitchingLaw { segments, periodic })
    }

    /// Periodic bang-bang law: a list of (duration, vertex index) pairs.
    pub fn periodic_bangs(bangs: &[(f64, usize)], vertex_count: usize) -> Result<Self> {
        let segments = bangs
            .iter()
            .map(|&(duration, vertex)| {
                if vertex >= vertex_count {
                    return Err(Error::Input(format!(
                        "vertex index {vertex} out of range for {vertex_count} vertices"
                    )));
                }
                let mut weights = vec![0.0; vertex_count];
                weights[vertex] = 1.0;
                Ok(Segment { duration, weights })
            })
            .collect::<Result<Vec<_>>>()?;
        SwitchingLaw::new(segments, true)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn vertex_count(&self) -> usize {
        self.segments[0].weights.len()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Period of a periodic law (the sum of its segment durations).
    pub fn period(&self) -> Option<f64> {
        self.periodic.then(|| self.total_duration())
    }

    pub fn min_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).fold(f64::INFINITY, f64::min)
    }

    pub fn max_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).fold(0.0, f64::max)
    }

    /// The same periodic law with its segment list repeated `n` times; the
    /// period grows accordingly.
    pub fn unrolled(&self, n: usize) -> Result<SwitchingLaw> {
        if !self.periodic {
            return Err(Error::Input("only periodic laws can be unrolled".into()));
        }
        if n == 0 {
            return Err(Error::Input("unroll count must be at least 1".into()));
        }
        let mut segments = Vec::with_capacity(self.segments.len() * n);
        for _ in 0..n {
            segments.extend(self.segments.iter().cloned());
        }
        SwitchingLaw::new(segments, true)
    }

    /// Time-shifted version of a periodic law: the returned law at time t
    /// equals this law at time t + shift.
    pub fn cyclic_shift(&self, shift: f64) -> Result<SwitchingLaw> {
        if !self.periodic {
            return Err(Error::Input("only periodic laws can be shifted".into()));
        }
        if !shift.is_finite() || shift < 0.0 {
            return Err(Error::Input(format!("shift must be nonnegative, got {shift}")));
        }
        let period = self.total_duration();
        let mut offset = shift % period;
        let eps = 1e-12 * period.max(1.0);
        if offset < eps || offset > period - eps {
            return Ok(self.clone());
        }
        // locate the segment containing the offset
        let mut idx = 0;
        while offset >= self.segments[idx].duration - eps {
            offset -= self.segments[idx].duration;
            idx += 1;
        }
        let mut segments = Vec::with_capacity(self.segments.len() + 1);
        let cut = &self.segments[idx];
        segments.push(Segment { duration: cut.duration - offset, weights: cut.weights.clone() });
        for k in idx + 1..self.segments.len() {
            segments.push(self.segments[k].clone());
        }
        for k in 0..idx {
            segments.push(self.segments[k].clone());
        }
        if offset > eps {
            segments.push(Segment { duration: offset, weights: cut.weights.clone() });
        }
        SwitchingLaw::new(segments, true)
    }

    /// Sorted list of maximal single-vertex interval lengths over one period,
    /// merging consecutive segments that share an extremal vertex. Used to
    /// compare bang-bang laws up to cyclic shift.
    pub fn sorted_bang_durations(&self) -> Vec<f64> {
        let n = self.segments.len();
        let vertex_of = |seg: &Segment| -> Option<usize> {
            let mut best = 0;
            for (i, &w) in seg.weights.iter().enumerate() {
                if w > seg.weights[best] {
                    best = i;
                }
            }
            (seg.weights[best] > 1.0 - 1e-9).then_some(best)
        };
        // walk the cyclic segment list, merging runs of equal vertex
        let verts: Vec<Option<usize>> = self.segments.iter().map(vertex_of).collect();
        let mut runs: Vec<(Option<usize>, f64)> = Vec::new();
        for k in 0..n {
            let v = verts[k];
            let d = self.segments[k].duration;
            match runs.last_mut() {
                Some((lv, ld)) if *lv == v && v.is_some() => *ld += d,
                _ => runs.push((v, d)),
            }
        }
        if self.periodic && runs.len() > 1 {
            let first = runs[0];
            let last = *runs.last().unwrap();
            if first.0 == last.0 && first.0.is_some() {
                runs[0].1 += last.1;
                runs.pop();
            }
        }
        let mut out: Vec<f64> = runs.into_iter().map(|(_, d)| d).collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(duration: f64, weights: &[f64]) -> Segment {
        Segment { duration, weights: weights.to_vec() }
    }

    #[test]
    fn validation_rules() {
        assert!(SwitchingLaw::new(vec![], true).is_err());
        assert!(SwitchingLaw::new(vec![seg(0.0, &[1.0])], true).is_err());
        assert!(SwitchingLaw::new(vec![seg(1.0, &[0.5, 0.6])], true).is_err());
        assert!(SwitchingLaw::new(vec![seg(1.0, &[-0.1, 1.1])], true).is_err());
        assert!(SwitchingLaw::new(vec![seg(1.0, &[0.5, 0.5]), seg(1.0, &[1.0])], true).is_err());
        assert!(SwitchingLaw::new(vec![seg(1.0, &[0.25, 0.75])], false).is_ok());
    }

    #[test]
    fn period_is_total_duration() {
        let law =
            SwitchingLaw::new(vec![seg(1.5, &[1.0, 0.0]), seg(2.5, &[0.0, 1.0])], true).unwrap();
        assert_eq!(law.period(), Some(4.0));
        let finite = SwitchingLaw::new(vec![seg(1.5, &[1.0, 0.0])], false).unwrap();
        assert_eq!(finite.period(), None);
    }

    #[test]
    fn unroll_repeats_segments() {
        let law =
            SwitchingLaw::new(vec![seg(1.0, &[1.0, 0.0]), seg(2.0, &[0.0, 1.0])], true).unwrap();
        let u3 = law.unrolled(3).unwrap();
        assert_eq!(u3.segments().len(), 6);
        assert_eq!(u3.period(), Some(9.0));
    }

    #[test]
    fn cyclic_shift_splits_segments() {
        let law =
            SwitchingLaw::new(vec![seg(2.0, &[1.0, 0.0]), seg(3.0, &[0.0, 1.0])], true).unwrap();
        let shifted = law.cyclic_shift(0.5).unwrap();
        let durations: Vec<f64> = shifted.segments().iter().map(|s| s.duration).collect();
        assert_eq!(durations, vec![1.5, 3.0, 0.5]);
        assert_eq!(shifted.segments()[0].weights, vec![1.0, 0.0]);
        assert_eq!(shifted.segments()[2].weights, vec![1.0, 0.0]);
        // shifting by a whole period is the identity
        let full = law.cyclic_shift(5.0).unwrap();
        assert_eq!(full, law);
    }

    #[test]
    fn sorted_bangs_merge_across_the_period_seam() {
        let law =
            SwitchingLaw::new(vec![seg(2.0, &[1.0, 0.0]), seg(3.0, &[0.0, 1.0])], true).unwrap();
        assert_eq!(law.sorted_bang_durations(), vec![2.0, 3.0]);
        let shifted = law.cyclic_shift(0.5).unwrap();
        assert_eq!(shifted.sorted_bang_durations(), vec![2.0, 3.0]);
    }

    #[test]
    fn serde_roundtrip_and_rejection() {
        let law =
            SwitchingLaw::new(vec![seg(1.0, &[0.5, 0.5]), seg(0.25, &[0.0, 1.0])], true).unwrap();
        let json = serde_json::to_string(&law).unwrap();
        let back: SwitchingLaw = serde_json::from_str(&json).unwrap();
        assert_eq!(law, back);
        let bad = "{\"segments\":[{\"duration\":-1.0,\"weights\":[1.0]}],\"periodic\":true}";
        assert!(serde_json::from_str::<SwitchingLaw>(bad).is_err());
        let bad = "{\"segments\":[{\"duration\":1.0,\"weights\":[0.7,0.7]}],\"periodic\":false}";
        assert!(serde_json::from_str::<SwitchingLaw>(bad).is_err());
    }
}
