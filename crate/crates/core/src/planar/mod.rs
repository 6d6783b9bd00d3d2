//! Planar (2x2) switched pairs.
//!
//! The central object is a pair (a0, a1) of Hurwitz matrices, conjugate to
//! each other by a quarter-turn rotation, built so that the switching law
//! that holds `a0` while the two coordinates share a sign and `a1` otherwise
//! preserves a norm-like quantity exactly: trajectories under that law are
//! periodic, while every other periodic law strictly decays. The scalar
//! parameter `tau` of the construction is the unique root in (0, 1) of
//!
//! ```text
//! tau = exp( pi (tau + 1) / (2 (tau - 1)) )
//! ```
//!
//! which is exactly the condition that the two closed-form branches of the
//! associated non-strict Lyapunov function agree on the coordinate axes.

mod condition;
mod lyapunov;
mod worst_case;

pub use condition::{check_condition, ConditionReport, TGrid};
pub use lyapunov::{
    certificate_monotonicity_check, gradient_condition_check, GradientConditionReport,
    LyapunovCertificate, MonotonicityReport,
};
pub use worst_case::{growth_rate, worst_case_law_and_period, WorstCaseLaw, WorstCaseOrbit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simcore::SwitchedFamily;
use crate::smallmat::SmallMatrix;

/// Residual bound guaranteed by `solve_tau`.
pub const TAU_RESIDUAL_TOL: f64 = 1e-13;

/// A pair of 2x2 generators with an optional construction parameter.
/// `tau` is `Some` only for pairs produced by `build_tau_pair`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair", into = "RawPair")]
pub struct PlanarPair {
    a0: SmallMatrix,
    a1: SmallMatrix,
    tau: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPair {
    a0: SmallMatrix,
    a1: SmallMatrix,
    tau: Option<f64>,
}

impl TryFrom<RawPair> for PlanarPair {
    type Error = Error;

    fn try_from(raw: RawPair) -> Result<Self> {
        PlanarPair::new(raw.a0, raw.a1, raw.tau)
    }
}

impl From<PlanarPair> for RawPair {
    fn from(p: PlanarPair) -> Self {
        RawPair { a0: p.a0, a1: p.a1, tau: p.tau }
    }
}

impl PlanarPair {
    pub fn new(a0: SmallMatrix, a1: SmallMatrix, tau: Option<f64>) -> Result<Self> {
        for m in [&a0, &a1] {
            if m.rows() != 2 || m.cols() != 2 {
                return Err(Error::Dimension(format!(
                    "planar pair entries must be 2x2, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if let Some(t) = tau {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Input(format!("tau must lie in (0,1), got {t}")));
            }
        }
        Ok(PlanarPair { a0, a1, tau })
    }

    pub fn a0(&self) -> &SmallMatrix {
        &self.a0
    }

    pub fn a1(&self) -> &SmallMatrix {
        &self.a1
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    /// Two-vertex switched family (a0, a1).
    pub fn family(&self) -> SwitchedFamily {
        SwitchedFamily::new(vec![self.a0.clone(), self.a1.clone()])
            .expect("2x2 pair always forms a family")
    }

    /// True when {I, a0, a1} span a 3-dimensional subspace of the 2x2
    /// matrices; degenerate pairs (shifts or rescalings of one matrix plus
    /// the identity) fail this.
    pub fn independent(&self) -> bool {
        let rows: Vec<Vec<f64>> = vec![
            vec![1.0, 0.0, 0.0, 1.0],
            self.a0.data().to_vec(),
            self.a1.data().to_vec(),
        ];
        let stack =
            SmallMatrix::new(3, 4, rows.concat()).expect("3x4 stack within size limits");
        let smin = stack.smallest_singular_value();
        let smax = stack.operator_norm();
        smin > 1e-10 * smax.max(1.0)
    }
}

/// Defining equation residual for the construction parameter.
pub fn tau_equation_residual(t: f64) -> f64 {
    t - (std::f64::consts::PI * (t + 1.0) / (2.0 * (t - 1.0))).exp()
}

/// Unique root in (0, 1) of `t = exp(pi (t+1) / (2 (t-1)))`, found by
/// bisection on [1e-6, 1 - 1e-6]; the residual is at most `TAU_RESIDUAL_TOL`.
pub fn solve_tau() -> f64 {
    let mut lo = 1e-6_f64;
    let mut hi = 1.0 - 1e-6_f64;
    debug_assert!(tau_equation_residual(lo) < 0.0 && tau_equation_residual(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if tau_equation_residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The rotation-conjugate pair parameterized by `tau`:
///
/// ```text
/// a0 = [ -1                  sqrt(tau)(tau-1)/sqrt(2) ]      a1 = rot(pi/2) a0 rot(pi/2)^{-1}
///      [ (1-tau)/sqrt(2 tau)            -tau          ]
/// ```
pub fn build_tau_pair() -> Result<PlanarPair> {
    let tau = solve_tau();
    let b = tau.sqrt() * (tau - 1.0) / 2.0f64.sqrt();
    let c = (1.0 - tau) / (2.0 * tau).sqrt();
    let a0 = SmallMatrix::from_rows(&[&[-1.0, b], &[c, -tau]])?;
    let a1 = SmallMatrix::from_rows(&[&[-tau, -c], &[-b, -1.0]])?;
    PlanarPair::new(a0, a1, Some(tau))
}

/// Marginal pair with purely imaginary hull spectrum: every hull member has
/// eigenvalues +- i sqrt((1+g)(2-g)), so nothing in the hull is Hurwitz, yet
/// concatenating the two flows produces strict growth.
pub fn build_simple_pair() -> Result<PlanarPair> {
    let a0 = SmallMatrix::from_rows(&[&[0.0, 1.0], &[-2.0, 0.0]])?;
    let a1 = SmallMatrix::from_rows(&[&[0.0, 2.0], &[-1.0, 0.0]])?;
    PlanarPair::new(a0, a1, None)
}

/// Hurwitz test for the whole segment { (1-g) a0 + g a1 : g in [0,1] }.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HurwitzHullReport {
    /// Exact 2x2 criterion: max trace < 0 and min determinant > 0 over the
    /// segment (trace is affine, determinant quadratic, both closed-form).
    pub hurwitz: bool,
    pub max_trace: f64,
    pub min_det: f64,
    /// Grid cross-check data.
    pub grid_points: usize,
    pub grid_worst_real_part: f64,
    pub grid_worst_gamma: f64,
}

pub fn hurwitz_hull(p: &PlanarPair, grid_points: usize) -> Result<HurwitzHullReport> {
    if grid_points < 2 {
        return Err(Error::Input(format!("grid needs at least 2 points, got {grid_points}")));
    }
    let (a, d) = (p.a0(), p.a1());
    let tr0 = a.trace()?;
    let tr1 = d.trace()?;
    let max_trace = tr0.max(tr1);

    // det((1-g) a0 + g a1) = det(a0 + g D) with D = a1 - a0 is quadratic in g:
    // det(a0) + g * mix(a0, D) + g^2 * det(D), with the 2x2 polarization
    // mix(X, Y) = x11 y22 + y11 x22 - x12 y21 - y12 x21.
    let diff = d.sub(a)?;
    let c0 = a.det()?;
    let c1 = a[(0, 0)] * diff[(1, 1)] + diff[(0, 0)] * a[(1, 1)]
        - a[(0, 1)] * diff[(1, 0)]
        - diff[(0, 1)] * a[(1, 0)];
    let c2 = diff.det()?;
    let eval_det = |g: f64| c0 + g * (c1 + g * c2);
    let mut min_det = eval_det(0.0).min(eval_det(1.0));
    if c2 > 0.0 {
        let vertex = -c1 / (2.0 * c2);
        if vertex > 0.0 && vertex < 1.0 {
            min_det = min_det.min(eval_det(vertex));
        }
    }
    let hurwitz = max_trace < 0.0 && min_det > 0.0;

    let mut grid_worst_real_part = f64::NEG_INFINITY;
    let mut grid_worst_gamma = 0.0;
    for k in 0..grid_points {
        let g = k as f64 / (grid_points - 1) as f64;
        let m = a.scale(1.0 - g).add(&d.scale(g))?;
        let re = m.spectrum()?.max_real_part();
        if re > grid_worst_real_part {
            grid_worst_real_part = re;
            grid_worst_gamma = g;
        }
    }

    Ok(HurwitzHullReport {
        hurwitz,
        max_trace,
        min_det,
        grid_points,
        grid_worst_real_part,
        grid_worst_gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU_SEVEN_DIGITS: f64 = 0.1299992;

    #[test]
    fn tau_root_bracket_and_residual() {
        assert!(tau_equation_residual(0.01) * tau_equation_residual(0.5) < 0.0);
        let tau = solve_tau();
        assert!(tau_equation_residual(tau).abs() <= TAU_RESIDUAL_TOL);
        assert!((tau - TAU_SEVEN_DIGITS).abs() < 5e-8, "tau={tau}");
    }

    #[test]
    fn tau_solver_is_fast() {
        let start = std::time::Instant::now();
        let _ = solve_tau();
        assert!(start.elapsed().as_secs_f64() < 0.1);
    }

    #[test]
    fn tau_pair_matches_closed_form_entries() {
        let p = build_tau_pair().unwrap();
        let tau = p.tau().unwrap();
        let a0 = p.a0();
        let a1 = p.a1();
        assert_eq!(a0[(0, 0)], -1.0);
        assert_eq!(a0[(1, 1)], -tau);
        assert_eq!(a1[(0, 0)], -tau);
        assert_eq!(a1[(1, 1)], -1.0);
        assert!((a0[(0, 1)] - tau.sqrt() * (tau - 1.0) / 2.0f64.sqrt()).abs() < 1e-16);
        assert!((a0[(1, 0)] - (1.0 - tau) / (2.0 * tau).sqrt()).abs() < 1e-16);
        // both have trace -(1+tau)
        assert!((a0.trace().unwrap() + 1.0 + tau).abs() < 1e-15);
        assert!((a1.trace().unwrap() + 1.0 + tau).abs() < 1e-15);
    }

    #[test]
    fn tau_pair_is_quarter_turn_conjugate() {
        let p = build_tau_pair().unwrap();
        let rot = SmallMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let rot_inv = rot.transpose();
        let conj = rot.matmul(p.a0()).unwrap().matmul(&rot_inv).unwrap();
        assert!(conj.sub(p.a1()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn pairs_are_independent_but_degenerate_shift_is_not() {
        assert!(build_tau_pair().unwrap().independent());
        assert!(build_simple_pair().unwrap().independent());
        let a0 = SmallMatrix::from_rows(&[&[-1.0, 0.5], &[0.0, -2.0]]).unwrap();
        let a1 = a0.add(&SmallMatrix::identity(2).unwrap()).unwrap();
        let p = PlanarPair::new(a0, a1, None).unwrap();
        assert!(!p.independent());
    }

    #[test]
    fn simple_pair_hull_determinant_is_shifted_parabola() {
        // det((1-g) a0 + g a1) = (1+g)(2-g)
        let p = build_simple_pair().unwrap();
        for &g in &[0.0, 0.3, 0.5, 0.9, 1.0] {
            let m = p.a0().scale(1.0 - g).add(&p.a1().scale(g)).unwrap();
            assert!((m.det().unwrap() - (1.0 + g) * (2.0 - g)).abs() < 1e-14);
        }
    }

    #[test]
    fn hurwitz_hull_verdicts() {
        let tau_pair = build_tau_pair().unwrap();
        let rep = hurwitz_hull(&tau_pair, 1001).unwrap();
        assert!(rep.hurwitz);
        assert!(rep.max_trace < 0.0 && rep.min_det > 0.0);
        assert!(rep.grid_worst_real_part < 0.0);

        let simple = build_simple_pair().unwrap();
        let rep = hurwitz_hull(&simple, 1001).unwrap();
        assert!(!rep.hurwitz);
        assert!(rep.max_trace.abs() < 1e-15); // traceless
        assert!(rep.grid_worst_real_part.abs() < 1e-10);

        let minus_i = SmallMatrix::identity(2).unwrap().scale(-1.0);
        let p = PlanarPair::new(minus_i.clone(), minus_i, None).unwrap();
        let rep = hurwitz_hull(&p, 11).unwrap();
        assert!(rep.hurwitz);
        assert!((rep.grid_worst_real_part + 1.0).abs() < 1e-12);
    }

    #[test]
    fn serde_roundtrip_preserves_tau_exactly() {
        let p = build_tau_pair().unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: PlanarPair = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
        assert_eq!(p.tau(), back.tau());

        let bad = "{\"a0\":{\"rows\":2,\"cols\":2,\"data\":[1,0,0,1]},\"a1\":{\"rows\":2,\"cols\":2,\"data\":[1,0,0,1]},\"tau\":1.5}";
        assert!(serde_json::from_str::<PlanarPair>(bad).is_err());
    }
}
