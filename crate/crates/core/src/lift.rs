//! Kronecker lift of a planar pair into a four-vertex 4x4 family.
//!
//! For a planar pair (a0, a1) and a time-scale ratio alpha, the four
//! generators are
//!
//! ```text
//! b[i + 2 j] = a_i (x) I + alpha * I (x) a_j        i, j in {0, 1}
//! ```
//!
//! so that y(t) = x(t) (x) z(alpha t) solves the lifted system whenever x
//! and z solve the planar one: the first index follows the law driving x,
//! the second the law driving z. The four generators satisfy the affine
//! identity b0 + b3 = b1 + b2, hence their convex hull is the image of the
//! unit square under (v0, v1) -> b0 + v0 (b1 - b0) + v1 (b2 - b0); the
//! square coordinates of a hull member are recovered by least squares
//! against the two (linearly independent) edge directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planar::PlanarPair;
use crate::simcore::SwitchedFamily;
use crate::smallmat::SmallMatrix;

/// Time-scale ratio used throughout: irrational, so the two bang clocks
/// never resynchronize.
pub const DEFAULT_ALPHA: f64 = std::f64::consts::SQRT_2;

/// Reconstruction residual above which a matrix is declared outside the
/// affine span of the family (scaled by max(1, |b|)).
pub const SPAN_RESIDUAL_TOL: f64 = 1e-10;

/// Slack allowed on the unit-square membership of hull coordinates.
pub const HULL_BOX_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLift", into = "RawLift")]
pub struct LiftedFamily {
    b: Vec<SmallMatrix>,
    alpha: f64,
    source: PlanarPair,
}

#[derive(Serialize, Deserialize)]
struct RawLift {
    b: Vec<SmallMatrix>,
    alpha: f64,
    source: PlanarPair,
}

impl TryFrom<RawLift> for LiftedFamily {
    type Error = Error;

    fn try_from(raw: RawLift) -> Result<Self> {
        let rebuilt = build_lift(&raw.source, raw.alpha)?;
        if raw.b.len() != 4 {
            return Err(Error::Input(format!("lift needs 4 generators, got {}", raw.b.len())));
        }
        for (stored, expected) in raw.b.iter().zip(rebuilt.b.iter()) {
            if stored.rows() != 4 || stored.cols() != 4 {
                return Err(Error::Dimension(format!(
                    "lift generators must be 4x4, got {}x{}",
                    stored.rows(),
                    stored.cols()
                )));
            }
            if stored.sub(expected)?.max_abs() > 1e-12 {
                return Err(Error::Input(
                    "stored generators do not match the lift of the stored source".into(),
                ));
            }
        }
        Ok(LiftedFamily { b: raw.b, alpha: raw.alpha, source: raw.source })
    }
}

impl From<LiftedFamily> for RawLift {
    fn from(l: LiftedFamily) -> Self {
        RawLift { b: l.b, alpha: l.alpha, source: l.source }
    }
}

impl LiftedFamily {
    pub fn b(&self) -> &[SmallMatrix] {
        &self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn source(&self) -> &PlanarPair {
        &self.source
    }

    pub fn family(&self) -> SwitchedFamily {
        SwitchedFamily::new(self.b.clone()).expect("four 4x4 generators form a family")
    }
}

pub fn build_lift(p: &PlanarPair, alpha: f64) -> Result<LiftedFamily> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Input(format!("alpha must be positive and finite, got {alpha}")));
    }
    let eye = SmallMatrix::identity(2)?;
    let pair = [p.a0().clone(), p.a1().clone()];
    let mut b = Vec::with_capacity(4);
    for j in 0..2 {
        for i in 0..2 {
            let m = pair[i].kron(&eye)?.add(&eye.kron(&pair[j])?.scale(alpha))?;
            b.push(m);
        }
    }
    Ok(LiftedFamily { b, alpha, source: p.clone() })
}

/// Coordinates of a hull member in the unit square spanned by the two edge
/// directions b1 - b0 and b2 - b0.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HullCoordinates {
    pub v0: f64,
    pub v1: f64,
    /// Operator norm of the least-squares reconstruction defect.
    pub residual: f64,
}

pub fn hull_decompose(l: &LiftedFamily, b: &SmallMatrix) -> Result<HullCoordinates> {
    if b.rows() != 4 || b.cols() != 4 {
        return Err(Error::Dimension(format!(
            "hull members are 4x4, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    let d1 = l.b[1].sub(&l.b[0])?;
    let d2 = l.b[2].sub(&l.b[0])?;
    let target = b.sub(&l.b[0])?;
    let dot = |x: &SmallMatrix, y: &SmallMatrix| -> f64 {
        x.data().iter().zip(y.data()).map(|(a, b)| a * b).sum()
    };
    let g11 = dot(&d1, &d1);
    let g12 = dot(&d1, &d2);
    let g22 = dot(&d2, &d2);
    let det = g11 * g22 - g12 * g12;
    if det <= 1e-12 * g11 * g22 {
        return Err(Error::Input("edge directions are numerically dependent".into()));
    }
    let r1 = dot(&d1, &target);
    let r2 = dot(&d2, &target);
    let v0 = (g22 * r1 - g12 * r2) / det;
    let v1 = (g11 * r2 - g12 * r1) / det;

    let defect = target.sub(&d1.scale(v0))?.sub(&d2.scale(v1))?;
    let residual = defect.operator_norm();
    if residual > SPAN_RESIDUAL_TOL * b.operator_norm().max(1.0) {
        return Err(Error::NotInAffineSpan(residual));
    }
    if !(-HULL_BOX_TOL..=1.0 + HULL_BOX_TOL).contains(&v0)
        || !(-HULL_BOX_TOL..=1.0 + HULL_BOX_TOL).contains(&v1)
    {
        return Err(Error::NotInHull(v0, v1));
    }
    Ok(HullCoordinates { v0, v1, residual })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndependenceReport {
    pub independent: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Numeric rank-2 test of the vectorized edge directions; a pair with
/// a1 - a0 proportional to the identity collapses the two directions onto
/// each other and fails.
///
/// The singular values of the 2x16 stack are taken from its row QR factor
/// rather than a Gram matrix: orthogonalizing the second row against the
/// first keeps a dependent row's residual at the rounding level (~1e-15)
/// instead of the Gram-squared floor (~1e-8), which the 1e-10 rank
/// threshold requires.
pub fn independence_check(l: &LiftedFamily) -> Result<IndependenceReport> {
    let d1 = l.b[1].sub(&l.b[0])?;
    let d2 = l.b[2].sub(&l.b[0])?;
    let r1 = d1.data();
    let r2 = d2.data();
    let n1 = r1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n2 = r2.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return Ok(IndependenceReport {
            independent: false,
            sigma_min: 0.0,
            sigma_max: n1.max(n2),
        });
    }
    // component of r2 along r1, and the orthogonal remainder
    let along = r1.iter().zip(r2).map(|(a, b)| a * b).sum::<f64>() / n1;
    let resid = r1
        .iter()
        .zip(r2)
        .map(|(a, b)| b - along * a / n1)
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    // the stack equals [[n1, 0], [along, resid]] times an orthonormal basis
    let lower = SmallMatrix::from_rows(&[&[n1, 0.0], &[along, resid]])?;
    let sigma_max = lower.operator_norm();
    let sigma_min = (n1 * resid / sigma_max).abs();
    Ok(IndependenceReport {
        independent: sigma_min > 1e-10 * sigma_max,
        sigma_min,
        sigma_max,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HullSpectralReport {
    pub samples: usize,
    /// Largest eigenvalue real part seen over the sampled hull members.
    pub max_real_part: f64,
    /// Square coordinates of the worst sample.
    pub worst_v0: f64,
    pub worst_v1: f64,
    pub hurwitz: bool,
}

/// Samples the convex hull of the four generators (corners first, then
/// uniform simplex draws) and records the largest eigenvalue real part.
pub fn hull_spectral_sample(l: &LiftedFamily, samples: usize, seed: u64) -> Result<HullSpectralReport> {
    use rand::{Rng, SeedableRng};

    if samples < 4 {
        return Err(Error::Input(format!("need at least 4 samples to cover corners, got {samples}")));
    }
    let family = l.family();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_real_part = f64::NEG_INFINITY;
    let mut worst = (0.0, 0.0);
    for k in 0..samples {
        let weights = if k < 4 {
            let mut w = vec![0.0; 4];
            w[k] = 1.0;
            w
        } else {
            let raw: Vec<f64> = (0..4).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        };
        let m = family.hull_matrix(&weights)?;
        let re = m.spectrum()?.max_real_part();
        if re > max_real_part {
            max_real_part = re;
            let c = hull_decompose(l, &m)?;
            worst = (c.v0, c.v1);
        }
    }
    Ok(HullSpectralReport {
        samples,
        max_real_part,
        worst_v0: worst.0,
        worst_v1: worst.1,
        hurwitz: max_real_part < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::planar::{build_simple_pair, build_tau_pair, PlanarPair};

    fn tau_lift() -> LiftedFamily {
        build_lift(&build_tau_pair().unwrap(), DEFAULT_ALPHA).unwrap()
    }

    #[test]
    fn corner_entries_match_closed_forms() {
        let l = tau_lift();
        let tau = l.source().tau().unwrap();
        let root2 = 2.0_f64.sqrt();
        // b0 = a0 (x) I + sqrt2 I (x) a0: top-left diagonal entry stacks the
        // two a0[0][0] entries; bottom-right stacks the two a0[1][1].
        assert!((l.b()[0][(0, 0)] - (-1.0 - root2)).abs() <= 1e-15);
        assert!((l.b()[0][(3, 3)] - (-tau - root2 * tau)).abs() <= 1e-15);
        assert!((l.b()[3][(0, 0)] - (-tau - root2 * tau)).abs() <= 1e-15);
        assert!((l.b()[3][(3, 3)] - (-1.0 - root2)).abs() <= 1e-15);
        // mixed generators pair a1 with a0 and vice versa
        assert!((l.b()[1][(0, 0)] - (-tau - root2)).abs() <= 1e-15);
        assert!((l.b()[2][(0, 0)] - (-1.0 - root2 * tau)).abs() <= 1e-15);
    }

    #[test]
    fn affine_identity_holds_exactly() {
        for l in [tau_lift(), build_lift(&build_simple_pair().unwrap(), DEFAULT_ALPHA).unwrap()]
        {
            let lhs = l.b()[0].add(&l.b()[3]).unwrap();
            let rhs = l.b()[1].add(&l.b()[2]).unwrap();
            assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-14);
        }
    }

    #[test]
    fn vertices_decompose_to_square_corners() {
        let l = tau_lift();
        let expected = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        for (k, (v0, v1)) in expected.iter().enumerate() {
            let c = hull_decompose(&l, &l.b()[k]).unwrap();
            assert!((c.v0 - v0).abs() <= 1e-12 && (c.v1 - v1).abs() <= 1e-12, "vertex {k}");
            assert!(c.residual <= 1e-12);
        }
        let mid = l.b()[0].add(&l.b()[3]).unwrap().scale(0.5);
        let c = hull_decompose(&l, &mid).unwrap();
        assert!((c.v0 - 0.5).abs() <= 1e-12 && (c.v1 - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn random_hull_members_roundtrip_through_coordinates() {
        use rand::{Rng, SeedableRng};
        let l = tau_lift();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (v0, v1) = (rng.gen::<f64>(), rng.gen::<f64>());
            // convex combination with square coordinates (v0, v1)
            let m = l.b()[0]
                .scale((1.0 - v0) * (1.0 - v1))
                .add(&l.b()[1].scale(v0 * (1.0 - v1)))
                .unwrap()
                .add(&l.b()[2].scale((1.0 - v0) * v1))
                .unwrap()
                .add(&l.b()[3].scale(v0 * v1))
                .unwrap();
            let c = hull_decompose(&l, &m).unwrap();
            assert!((c.v0 - v0).abs() <= 1e-10 && (c.v1 - v1).abs() <= 1e-10);
        }
    }

    #[test]
    fn off_span_and_off_hull_inputs_are_rejected() {
        let l = tau_lift();
        let mut off_span = l.b()[0].clone();
        off_span[(0, 1)] += 0.3; // generic bump leaves the 2D affine slice
        match hull_decompose(&l, &off_span) {
            Err(Error::NotInAffineSpan(r)) => assert!(r > 1e-6),
            other => panic!("expected span rejection, got {other:?}"),
        }
        // along an edge but far outside the square
        let outside = l.b()[0].add(&l.b()[1].sub(&l.b()[0]).unwrap().scale(2.0)).unwrap();
        match hull_decompose(&l, &outside) {
            Err(Error::NotInHull(v0, _)) => assert!((v0 - 2.0).abs() <= 1e-10),
            other => panic!("expected hull rejection, got {other:?}"),
        }
    }

    #[test]
    fn independence_fails_exactly_for_identity_shifts() {
        assert!(independence_check(&tau_lift()).unwrap().independent);
        let simple = build_lift(&build_simple_pair().unwrap(), DEFAULT_ALPHA).unwrap();
        assert!(independence_check(&simple).unwrap().independent);

        let a0 = SmallMatrix::from_rows(&[&[-1.0, 0.5], &[0.0, -2.0]]).unwrap();
        let a1 = a0.add(&SmallMatrix::identity(2).unwrap()).unwrap();
        let shifted = PlanarPair::new(a0, a1, None).unwrap();
        let l = build_lift(&shifted, DEFAULT_ALPHA).unwrap();
        let rep = independence_check(&l).unwrap();
        assert!(!rep.independent, "{rep:?}");
    }

    #[test]
    fn serde_rejects_tampered_generators() {
        let l = tau_lift();
        let json = serde_json::to_string(&l).unwrap();
        let back: LiftedFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(l, back);

        let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
        value["b"][0]["data"][0] = serde_json::json!(3.5);
        assert!(serde_json::from_value::<LiftedFamily>(value).is_err());

        assert!(build_lift(&build_tau_pair().unwrap(), -1.0).is_err());
    }

    #[test]
    fn sampled_hull_spectra_stay_strictly_stable() {
        let rep = hull_spectral_sample(&tau_lift(), 500, 5).unwrap();
        assert!(rep.hurwitz, "{rep:?}");
        assert!(rep.max_real_part < -1.0, "{rep:?}");
        // the worst sample still lies in the square
        assert!((-1e-9..=1.0 + 1e-9).contains(&rep.worst_v0));
        assert!((-1e-9..=1.0 + 1e-9).contains(&rep.worst_v1));
        // repeated runs with the same seed agree exactly
        let again = hull_spectral_sample(&tau_lift(), 500, 5).unwrap();
        assert_eq!(rep.max_real_part, again.max_real_part);
        assert!(hull_spectral_sample(&tau_lift(), 3, 5).is_err());
    }
}
