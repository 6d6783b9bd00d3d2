//! Non-strict Lyapunov function for the tau-pair.
//!
//! The function is defined by one closed-form branch per pair of opposite
//! quadrants. Writing r = sqrt(2 tau) and k = 2 (1 + tau) / (1 - tau):
//!
//! ```text
//! x1 x2 >= 0:  f = (x1^2 + r x1 x2 + tau x2^2) exp(-k atan(x1 / (x1 + r x2)))
//! x1 x2 <= 0:  f = (tau x1^2 - r x1 x2 + x2^2) exp( k atan(x2 / (r x1 - x2)))
//! ```
//!
//! Both branches are quadratic forms times an exponential of the polar angle
//! only, so f is homogeneous of degree 2 and even. The defining equation of
//! tau is exactly what makes the two branches agree, with equal gradients, on
//! the coordinate axes. Along the flow of `a0` the same-sign branch is
//! constant; along `a1` it is strictly decreasing off the axes, and the
//! opposite-sign branch behaves symmetrically with the roles swapped.

use serde::{Deserialize, Serialize};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::smallmat::norm2;

use super::PlanarPair;

/// Max tolerated |grad f . (active vertex) x| on unit vectors.
pub const ACTIVE_DEFECT_TOL: f64 = 1e-9;

/// Max tolerated relative two-sided gap of f and grad f across the axes.
pub const AXIS_GAP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LyapunovCertificate {
    tau: f64,
    /// sqrt(2 tau)
    root: f64,
    /// 2 (1 + tau) / (1 - tau), the positive branch exponent
    expo: f64,
}

impl LyapunovCertificate {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Input(format!("tau must lie in (0,1), got {tau}")));
        }
        Ok(LyapunovCertificate {
            tau,
            root: (2.0 * tau).sqrt(),
            expo: 2.0 * (1.0 + tau) / (1.0 - tau),
        })
    }

    /// Certificate for a pair carrying its construction parameter.
    pub fn for_pair(p: &PlanarPair) -> Result<Self> {
        let tau = p
            .tau()
            .ok_or_else(|| Error::Input("pair carries no construction parameter".into()))?;
        Self::new(tau)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Branch formula valid on the closed region x1 x2 >= 0.
    pub fn value_same_sign(&self, x: [f64; 2]) -> f64 {
        let [x1, x2] = x;
        if x1 == 0.0 && x2 == 0.0 {
            return 0.0;
        }
        let q = x1 * x1 + self.root * x1 * x2 + self.tau * x2 * x2;
        let theta = (x1 / (x1 + self.root * x2)).atan();
        q * (-self.expo * theta).exp()
    }

    /// Branch formula valid on the closed region x1 x2 <= 0.
    pub fn value_opposite_sign(&self, x: [f64; 2]) -> f64 {
        let [x1, x2] = x;
        if x1 == 0.0 && x2 == 0.0 {
            return 0.0;
        }
        let q = self.tau * x1 * x1 - self.root * x1 * x2 + x2 * x2;
        let theta = (x2 / (self.root * x1 - x2)).atan();
        q * (self.expo * theta).exp()
    }

    /// Gradient of the same-sign branch. With Q the quadratic factor, the
    /// angle gradient is r (x2, -x1) / (2 Q), so Q cancels:
    /// grad f = e^{-k theta} (grad Q - (k r / 2) (x2, -x1)).
    pub fn gradient_same_sign(&self, x: [f64; 2]) -> [f64; 2] {
        let [x1, x2] = x;
        if x1 == 0.0 && x2 == 0.0 {
            return [0.0, 0.0];
        }
        let theta = (x1 / (x1 + self.root * x2)).atan();
        let scale = (-self.expo * theta).exp();
        let half_kr = 0.5 * self.expo * self.root;
        [
            scale * (2.0 * x1 + self.root * x2 - half_kr * x2),
            scale * (self.root * x1 + 2.0 * self.tau * x2 + half_kr * x1),
        ]
    }

    /// Gradient of the opposite-sign branch; here the angle gradient is
    /// r (-x2, x1) / (2 Q).
    pub fn gradient_opposite_sign(&self, x: [f64; 2]) -> [f64; 2] {
        let [x1, x2] = x;
        if x1 == 0.0 && x2 == 0.0 {
            return [0.0, 0.0];
        }
        let theta = (x2 / (self.root * x1 - x2)).atan();
        let scale = (self.expo * theta).exp();
        let half_kr = 0.5 * self.expo * self.root;
        [
            scale * (2.0 * self.tau * x1 - self.root * x2 - half_kr * x2),
            scale * (-self.root * x1 + 2.0 * x2 + half_kr * x1),
        ]
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        if x[0] * x[1] >= 0.0 {
            self.value_same_sign(x)
        } else {
            self.value_opposite_sign(x)
        }
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        if x[0] * x[1] >= 0.0 {
            self.gradient_same_sign(x)
        } else {
            self.gradient_opposite_sign(x)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GradientConditionReport {
    pub samples: usize,
    /// Largest |grad f . (A x)| seen for the vertex that should conserve f.
    pub worst_active_defect: f64,
    /// Largest (closest to zero) grad f . (A x) for the vertex that should
    /// strictly decrease f; negative iff every sample decreased.
    pub worst_inactive_margin: f64,
    /// Worst relative two-sided gap of f across the four half-axes.
    pub axis_value_gap: f64,
    /// Worst relative two-sided gap of grad f across the four half-axes.
    pub axis_gradient_gap: f64,
    pub pass: bool,
}

/// Samples random unit vectors and checks the sign structure of
/// grad f . (A_i x): zero for the vertex matching the quadrant, strictly
/// negative for the other one; also compares both branch formulas on the
/// axes where they must agree to first order.
pub fn gradient_condition_check(
    p: &PlanarPair,
    samples: usize,
    seed: u64,
) -> Result<GradientConditionReport> {
    let cert = LyapunovCertificate::for_pair(p)?;
    if samples == 0 {
        return Err(Error::Input("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_active_defect = 0.0_f64;
    let mut worst_inactive_margin = f64::NEG_INFINITY;
    for _ in 0..samples {
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = [phi.cos(), phi.sin()];
        let grad = cert.gradient(x);
        let d0 = dot2(grad, p.a0().matvec(&x)?);
        let d1 = dot2(grad, p.a1().matvec(&x)?);
        let (conserved, decreasing) = if x[0] * x[1] > 0.0 {
            (d0, d1)
        } else if x[0] * x[1] < 0.0 {
            (d1, d0)
        } else {
            // exactly on an axis both derivatives vanish
            worst_active_defect = worst_active_defect.max(d0.abs()).max(d1.abs());
            continue;
        };
        worst_active_defect = worst_active_defect.max(conserved.abs());
        worst_inactive_margin = worst_inactive_margin.max(decreasing);
    }

    let mut axis_value_gap = 0.0_f64;
    let mut axis_gradient_gap = 0.0_f64;
    for k in 0..13 {
        let m = 10.0_f64.powf(-3.0 + 0.5 * k as f64);
        for x in [[m, 0.0], [-m, 0.0], [0.0, m], [0.0, -m]] {
            let v_same = cert.value_same_sign(x);
            let v_opp = cert.value_opposite_sign(x);
            axis_value_gap = axis_value_gap.max((v_same - v_opp).abs() / v_same.abs());
            let g_same = cert.gradient_same_sign(x);
            let g_opp = cert.gradient_opposite_sign(x);
            let gap = norm2(&[g_same[0] - g_opp[0], g_same[1] - g_opp[1]]);
            axis_gradient_gap = axis_gradient_gap.max(gap / norm2(&g_same));
        }
    }

    let pass = worst_active_defect <= ACTIVE_DEFECT_TOL
        && worst_inactive_margin < 0.0
        && axis_value_gap <= AXIS_GAP_TOL
        && axis_gradient_gap <= AXIS_GAP_TOL;
    Ok(GradientConditionReport {
        samples,
        worst_active_defect,
        worst_inactive_margin,
        axis_value_gap,
        axis_gradient_gap,
        pass,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MonotonicityReport {
    pub laws: usize,
    /// Largest relative per-sample increase of f over all trajectories;
    /// nonpositive when f never increased at the sample resolution.
    pub worst_relative_increase: f64,
    /// Largest f(end) / f(start) over the trajectories.
    pub worst_end_ratio: f64,
    pub pass: bool,
}

/// Integrates random piecewise-constant hull laws (interior weights, not just
/// vertices) and checks that f is non-increasing along each trajectory within
/// `tol` relative slack, and strictly smaller at the end.
pub fn certificate_monotonicity_check(
    p: &PlanarPair,
    laws: usize,
    seed: u64,
    tol: f64,
) -> Result<MonotonicityReport> {
    use crate::simcore::{propagate, Segment, SwitchingLaw};

    if laws == 0 {
        return Err(Error::Input("need at least one law".into()));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Input(format!("tolerance must be positive, got {tol}")));
    }
    let cert = LyapunovCertificate::for_pair(p)?;
    let family = p.family();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_relative_increase = f64::NEG_INFINITY;
    let mut worst_end_ratio = 0.0_f64;
    for _ in 0..laws {
        let segments = (0..rng.gen_range(3..=8))
            .map(|_| {
                let w = rng.gen::<f64>();
                Segment { duration: rng.gen_range(0.1..2.0), weights: vec![w, 1.0 - w] }
            })
            .collect();
        let law = SwitchingLaw::new(segments, true)?;
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let radius = 10.0_f64.powf(rng.gen_range(-1.0..1.0));
        let x0 = [radius * phi.cos(), radius * phi.sin()];
        let traj = propagate(&family, &law, &x0, 25.0, 0.05)?;
        let mut prev = cert.value(x0);
        let start = prev;
        for s in traj.states() {
            let here = cert.value([s[0], s[1]]);
            worst_relative_increase = worst_relative_increase.max((here - prev) / prev);
            prev = here;
        }
        worst_end_ratio = worst_end_ratio.max(prev / start);
    }
    let pass = worst_relative_increase <= tol && worst_end_ratio < 1.0;
    Ok(MonotonicityReport { laws, worst_relative_increase, worst_end_ratio, pass })
}

fn dot2(a: [f64; 2], b: Vec<f64>) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::build_tau_pair;

    fn cert() -> (PlanarPair, LyapunovCertificate) {
        let p = build_tau_pair().unwrap();
        let c = LyapunovCertificate::for_pair(&p).unwrap();
        (p, c)
    }

    #[test]
    fn axis_values_equal_tau_from_both_branches() {
        let (_, c) = cert();
        let tau = c.tau();
        for x in [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]] {
            assert!((c.value_same_sign(x) - tau).abs() <= 1e-12, "same-sign at {x:?}");
            assert!((c.value_opposite_sign(x) - tau).abs() <= 1e-12, "opposite at {x:?}");
        }
        assert_eq!(c.value([0.0, 0.0]), 0.0);
        assert_eq!(c.gradient([0.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn homogeneous_of_degree_two_and_even() {
        let (_, c) = cert();
        let pts = [[0.3, 0.7], [1.2, -0.4], [-0.9, -0.1], [-0.2, 1.5]];
        for x in pts {
            let f = c.value(x);
            assert!(f > 0.0);
            for lambda in [0.5, 2.0, 7.25] {
                let scaled = c.value([lambda * x[0], lambda * x[1]]);
                assert!((scaled - lambda * lambda * f).abs() <= 1e-12 * scaled.abs());
            }
            let neg = c.value([-x[0], -x[1]]);
            assert!((neg - f).abs() <= 1e-14 * f.abs());
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (_, c) = cert();
        let h = 1e-6;
        for x in [[0.8, 0.5], [0.5, -0.8], [-1.1, -0.3], [-0.4, 0.9]] {
            let g = c.gradient(x);
            let fd = [
                (c.value([x[0] + h, x[1]]) - c.value([x[0] - h, x[1]])) / (2.0 * h),
                (c.value([x[0], x[1] + h]) - c.value([x[0], x[1] - h])) / (2.0 * h),
            ];
            for i in 0..2 {
                assert!(
                    (g[i] - fd[i]).abs() <= 1e-7 * (1.0 + g[i].abs()),
                    "at {x:?} component {i}: {g:?} vs {fd:?}"
                );
            }
        }
    }

    #[test]
    fn conserved_along_a0_in_same_sign_quadrants() {
        let (p, c) = cert();
        for k in 1..40 {
            let phi = k as f64 * std::f64::consts::FRAC_PI_2 / 40.0;
            for x in [[phi.cos(), phi.sin()], [-phi.cos(), -phi.sin()]] {
                let d = super::dot2(c.gradient(x), p.a0().matvec(&x).unwrap());
                assert!(d.abs() <= 1e-12, "defect {d} at {x:?}");
            }
        }
    }

    #[test]
    fn decrease_along_a1_matches_closed_form() {
        // In the same-sign region, grad f . (A1 x) reduces to
        // -2 e^{-k theta} (1 + tau)(1 + tau^2) x1 x2 / r.
        let (p, c) = cert();
        let (tau, r, k) = (c.tau, c.root, c.expo);
        for phi in [0.3_f64, 0.7, 1.2, 1.5] {
            let x = [phi.cos(), phi.sin()];
            let d = super::dot2(c.gradient(x), p.a1().matvec(&x).unwrap());
            let theta = (x[0] / (x[0] + r * x[1])).atan();
            let expected =
                -2.0 * (-k * theta).exp() * (1.0 + tau) * (1.0 + tau * tau) * x[0] * x[1] / r;
            assert!(d < 0.0);
            assert!((d - expected).abs() <= 1e-10 * expected.abs());
        }
    }

    #[test]
    fn certificate_report_passes_with_tight_margins() {
        let (p, _) = cert();
        let rep = gradient_condition_check(&p, 2000, 31).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.worst_active_defect <= 1e-12);
        assert!(rep.worst_inactive_margin < 0.0);
        assert!(rep.axis_value_gap <= 1e-11);
        assert!(rep.axis_gradient_gap <= 1e-11);
    }

    #[test]
    fn rejects_pair_without_parameter_and_zero_samples() {
        let p = crate::planar::build_simple_pair().unwrap();
        assert!(gradient_condition_check(&p, 10, 1).is_err());
        let tau_pair = build_tau_pair().unwrap();
        assert!(gradient_condition_check(&tau_pair, 0, 1).is_err());
    }

    #[test]
    fn monotone_along_random_interior_laws() {
        let (p, _) = cert();
        let rep = certificate_monotonicity_check(&p, 25, 91, 1e-8).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.worst_relative_increase <= 1e-10, "{rep:?}");
        assert!(rep.worst_end_ratio < 1e-3, "interior laws should decay fast: {rep:?}");
        assert!(certificate_monotonicity_check(&p, 0, 1, 1e-8).is_err());
        assert!(certificate_monotonicity_check(&p, 5, 1, -1.0).is_err());
    }
}
