//! Simulation of switched linear systems x'(t) = M(t) x(t) where M(t) is a
//! piecewise-constant convex combination of a fixed list of generator
//! matrices. Propagation is exact per segment (matrix exponentials of the
//! segment generators), so the only error sources are the exponential itself
//! and the placement of switching times.

mod counterexample;
mod law;
mod monodromy;
mod quasi;
mod sweep;
mod trajectory;

pub use counterexample::{
    counterexample_run, counterexample_trajectory, CounterexampleReport, TENSOR_MISMATCH_LIMIT,
};
pub use law::{Segment, SwitchingLaw};
pub use monodromy::{
    jacobi_determinant, monodromy, Classification, MonodromyReport, DECAY_BAND, PERIODIC_BAND,
};
pub use quasi::quasi_periodic_law;
pub use sweep::{periodic_decay_sweep, CounterEvidence, SweepReport};
pub use trajectory::Trajectory;

use crate::error::{Error, Result};
use crate::smallmat::SmallMatrix;

/// Ordered list of generator matrices ("vertices"); switching laws assign a
/// convex weight vector over these per time segment.
#[derive(Clone, Debug)]
pub struct SwitchedFamily {
    dim: usize,
    vertices: Vec<SmallMatrix>,
}

impl SwitchedFamily {
    pub fn new(vertices: Vec<SmallMatrix>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::Input("family needs at least one vertex".into()))?;
        if !first.is_square() {
            return Err(Error::NotSquare { rows: first.rows(), cols: first.cols() });
        }
        let dim = first.rows();
        for v in &vertices {
            if v.rows() != dim || v.cols() != dim {
                return Err(Error::Dimension(format!(
                    "vertex is {}x{}, expected {}x{}",
                    v.rows(),
                    v.cols(),
                    dim,
                    dim
                )));
            }
        }
        Ok(SwitchedFamily { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[SmallMatrix] {
        &self.vertices
    }

    /// Convex combination of the vertices under the given weights.
    pub fn hull_matrix(&self, weights: &[f64]) -> Result<SmallMatrix> {
        if weights.len() != self.vertices.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} vertices",
                weights.len(),
                self.vertices.len()
            )));
        }
        let mut m = SmallMatrix::zeros(self.dim, self.dim)?;
        for (w, v) in weights.iter().zip(&self.vertices) {
            if !w.is_finite() {
                return Err(Error::NonFinite);
            }
            m = m.add(&v.scale(*w))?;
        }
        Ok(m)
    }
}

/// Relative time tolerance for sample/boundary collision decisions.
fn time_eps(t: f64) -> f64 {
    1e-12 * t.abs().max(1.0)
}

/// Integrates the switched system from `x0` under `law` up to `horizon`,
/// sampling on the `sample_step` grid plus every switching time. Periodic
/// laws repeat as needed; finite laws end the trajectory at their total
/// duration if that comes first.
pub fn propagate(
    family: &SwitchedFamily,
    law: &SwitchingLaw,
    x0: &[f64],
    horizon: f64,
    sample_step: f64,
) -> Result<Trajectory> {
    if x0.len() != family.dim() {
        return Err(Error::Dimension(format!(
            "initial state has length {}, family dimension is {}",
            x0.len(),
            family.dim()
        )));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Input(format!("horizon must be positive, got {horizon}")));
    }
    if !(sample_step > 0.0) || !sample_step.is_finite() {
        return Err(Error::Input(format!("sample step must be positive, got {sample_step}")));
    }
    if law.vertex_count() != family.vertex_count() {
        return Err(Error::Dimension(format!(
            "law has {} weights per segment, family has {} vertices",
            law.vertex_count(),
            family.vertex_count()
        )));
    }

    let end_time = if law.periodic() { horizon } else { law.total_duration().min(horizon) };

    let mut traj = Trajectory::new(family.dim());
    let mut t_cursor = 0.0f64;
    let mut x = x0.to_vec();
    traj.push_sample(0.0, x.clone());
    let mut next_sample = sample_step;

    let mut seg_idx = 0usize;
    let seg_total = law.segments().len();
    while t_cursor < end_time - time_eps(end_time) {
        if !law.periodic() && seg_idx >= seg_total {
            break;
        }
        let seg = &law.segments()[seg_idx % seg_total];
        seg_idx += 1;
        let m = family.hull_matrix(&seg.weights)?;
        let duration = seg.duration.min(end_time - t_cursor);
        let t_end = t_cursor + duration;

        // grid samples strictly inside the segment
        while next_sample < t_end - time_eps(t_end) {
            let dt = next_sample - t_cursor;
            if dt > time_eps(t_end) {
                let xs = m.scale(dt).expm()?.matvec(&x)?;
                traj.push_sample(next_sample, xs);
            }
            next_sample += sample_step;
        }

        let propagator = m.scale(duration).expm()?;
        let x_next = propagator.matvec(&x)?;
        traj.push_segment(t_cursor, m, x.clone(), propagator);
        x = x_next;
        t_cursor = t_end;
        traj.push_sample(t_cursor, x.clone());
        while next_sample <= t_cursor + time_eps(t_cursor) {
            next_sample += sample_step;
        }
    }
    traj.finish(t_cursor, x);
    Ok(traj)
}
