use serde::{Deserialize, Serialize};

use super::{SwitchedFamily, SwitchingLaw};
use crate::error::{Error, Result};
use crate::smallmat::{SmallMatrix, Spectrum};

/// Spectral radii below 1 by more than this margin classify as decay.
pub const DECAY_BAND: f64 = 1e-9;

/// Spectral radii within this band of 1 are candidates for a periodic orbit.
pub const PERIODIC_BAND: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Classification {
    Decays,
    PeriodicOrbit,
    Inconclusive,
}

/// One-period propagator of a periodic law together with its spectral data.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MonodromyReport {
    pub r: SmallMatrix,
    pub spectrum: Spectrum,
    pub spectral_radius: f64,
    pub det_r: f64,
    /// Determinant predicted by integrating the trace of the generators over
    /// one period; agreement with `det_r` cross-checks the propagators.
    pub jacobi_det: f64,
    /// Average log-norm growth per period measured over 50 periods; a
    /// secondary signal separating slow decay from a genuine orbit.
    pub norm_drift_per_period: f64,
    pub classification: Classification,
}

/// Ordered product of the segment propagators over one period of `law`.
pub fn monodromy(family: &SwitchedFamily, law: &SwitchingLaw) -> Result<MonodromyReport> {
    if !law.periodic() {
        return Err(Error::Input("monodromy requires a periodic law".into()));
    }
    if law.vertex_count() != family.vertex_count() {
        return Err(Error::Dimension(format!(
            "law has {} weights per segment, family has {} vertices",
            law.vertex_count(),
            family.vertex_count()
        )));
    }
    let n = family.dim();
    let mut r = SmallMatrix::identity(n)?;
    for seg in law.segments() {
        let m = family.hull_matrix(&seg.weights)?;
        let p = m.scale(seg.duration).expm()?;
        r = p.matmul(&r)?;
    }
    let spectrum = r.spectrum()?;
    let spectral_radius = spectrum.spectral_radius;
    let det_r = r.det()?;
    let jacobi_det = jacobi_determinant(family, law, law.total_duration())?;

    // 50-period drift of a near-dominant direction
    let norm_drift_per_period = {
        let mut v = vec![1.0; n];
        let nrm = crate::smallmat::norm2(&v);
        for x in v.iter_mut() {
            *x /= nrm;
        }
        for _ in 0..10 {
            v = r.matvec(&v)?;
            let nrm = crate::smallmat::norm2(&v);
            if nrm == 0.0 {
                break;
            }
            for x in v.iter_mut() {
                *x /= nrm;
            }
        }
        let start = crate::smallmat::norm2(&v);
        let mut w = v.clone();
        for _ in 0..50 {
            w = r.matvec(&w)?;
        }
        let end = crate::smallmat::norm2(&w);
        if start > 0.0 && end > 0.0 {
            (end / start).ln() / 50.0
        } else {
            f64::NEG_INFINITY
        }
    };

    let classification = if spectral_radius < 1.0 - DECAY_BAND {
        Classification::Decays
    } else if (spectral_radius - 1.0).abs() <= PERIODIC_BAND {
        // a periodic orbit needs a root of unity of order <= 2 in the
        // spectrum: some eigenvalue of R^2 within the band of 1
        let r2 = r.matmul(&r)?;
        let near_one = r2
            .spectrum()?
            .complex_eigenvalues()
            .iter()
            .any(|e| (e - num_complex::Complex64::new(1.0, 0.0)).norm() <= PERIODIC_BAND);
        if near_one {
            Classification::PeriodicOrbit
        } else {
            Classification::Inconclusive
        }
    } else {
        Classification::Inconclusive
    };

    Ok(MonodromyReport {
        r,
        spectrum,
        spectral_radius,
        det_r,
        jacobi_det,
        norm_drift_per_period,
        classification,
    })
}

/// Determinant of the propagator over `[0, t]` from the trace integral:
/// `det = exp( sum over traversed segments of duration * trace(M_seg) )`.
pub fn jacobi_determinant(family: &SwitchedFamily, law: &SwitchingLaw, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Input(format!("time must be nonnegative, got {t}")));
    }
    if law.vertex_count() != family.vertex_count() {
        return Err(Error::Dimension(format!(
            "law has {} weights per segment, family has {} vertices",
            law.vertex_count(),
            family.vertex_count()
        )));
    }
    if !law.periodic() && t > law.total_duration() * (1.0 + 1e-12) {
        return Err(Error::Input(format!(
            "time {t} exceeds the finite law span {}",
            law.total_duration()
        )));
    }
    let traces: Vec<f64> = law
        .segments()
        .iter()
        .map(|seg| family.hull_matrix(&seg.weights).and_then(|m| m.trace()))
        .collect::<Result<Vec<_>>>()?;
    let mut integral = 0.0f64;
    let mut remaining = t;
    // whole periods first to avoid walking millions of segments
    if law.periodic() {
        let period = law.total_duration();
        let per_period: f64 =
            law.segments().iter().zip(&traces).map(|(s, tr)| s.duration * tr).sum();
        let whole = (remaining / period).floor();
        integral += whole * per_period;
        remaining -= whole * period;
    }
    for (seg, tr) in law.segments().iter().zip(&traces) {
        if remaining <= 0.0 {
            break;
        }
        let dt = seg.duration.min(remaining);
        integral += dt * tr;
        remaining -= dt;
    }
    Ok(integral.exp())
}
