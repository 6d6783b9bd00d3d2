//! Dynamics of the lifted family: hull spectra, determinant cross-checks,
//! classification dichotomy, and the tensor factorization at mid horizon.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use switched::lift::{build_lift, LiftedFamily, DEFAULT_ALPHA};
use switched::planar::{build_tau_pair, worst_case_law_and_period};
use switched::simcore::{
    counterexample_run, jacobi_determinant, monodromy, Classification, Segment, SwitchingLaw,
};

fn lifted() -> LiftedFamily {
    build_lift(&build_tau_pair().unwrap(), DEFAULT_ALPHA).unwrap()
}

fn simplex4(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..4).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

#[test]
fn sampled_hull_of_the_lift_is_uniformly_hurwitz() {
    let l = lifted();
    let family = l.family();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let m = family.hull_matrix(&simplex4(&mut rng)).unwrap();
        worst = worst.max(m.spectrum().unwrap().max_real_part());
    }
    assert!(worst < -1.0, "worst hull real part {worst}");
}

#[test]
fn determinant_of_monodromy_matches_trace_integral() {
    let l = lifted();
    let family = l.family();
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    for _ in 0..20 {
        let segments = (0..rng.gen_range(1..=6))
            .map(|_| Segment {
                duration: rng.gen_range(0.1..2.0),
                weights: simplex4(&mut rng),
            })
            .collect();
        let law = SwitchingLaw::new(segments, true).unwrap();
        let rep = monodromy(&family, &law).unwrap();
        let jac = jacobi_determinant(&family, &law, law.period().unwrap()).unwrap();
        assert!(
            (rep.det_r - jac).abs() <= 1e-10 * jac.abs().max(1e-30),
            "det {} vs integral {}",
            rep.det_r,
            jac
        );
        assert_eq!(rep.classification, Classification::Decays);
    }
}

#[test]
fn quasi_periodic_run_factors_at_mid_horizon() {
    let p = build_tau_pair().unwrap();
    let orbit = worst_case_law_and_period(&p, [1.0, 0.0]).unwrap();
    let l = build_lift(&p, DEFAULT_ALPHA).unwrap();
    let rep =
        counterexample_run(&l, orbit.law.first_bang, orbit.law.period, [1.0, 0.0], 30.0 * orbit.law.period)
            .unwrap();
    assert!(rep.tensor_mismatch <= 1e-9, "mismatch {}", rep.tensor_mismatch);
    assert!(rep.inf_norm > 0.0);
    assert!(rep.inf_norm < rep.sup_norm);
    // the band never collapses toward the origin over the run
    assert!(rep.inf_norm > 0.5 * rep.initial_norm);
}

#[test]
fn lifted_periodic_two_clock_law_still_decays() {
    // a periodic law on the lift, even one built from the planar worst-case
    // bangs on both clocks with a rational ratio, is strictly contracting
    let p = build_tau_pair().unwrap();
    let orbit = worst_case_law_and_period(&p, [1.0, 0.0]).unwrap();
    let l = build_lift(&p, DEFAULT_ALPHA).unwrap();
    let family = l.family();
    let t0 = orbit.law.first_bang;
    // vertex index i + 2j with both clocks running the same bang pattern at
    // ratio 2 (second clock twice as fast): enumerate one period's segments
    let segments = vec![
        // first half of bang 0 on clock 1, clock 2 runs bang 0 then bang 1
        Segment { duration: t0 / 2.0, weights: vec![1.0, 0.0, 0.0, 0.0] },
        Segment { duration: t0 / 2.0, weights: vec![0.0, 0.0, 1.0, 0.0] },
        Segment { duration: t0 / 2.0, weights: vec![0.0, 1.0, 0.0, 0.0] },
        Segment { duration: t0 / 2.0, weights: vec![0.0, 0.0, 0.0, 1.0] },
    ];
    let law = SwitchingLaw::new(segments, true).unwrap();
    let rep = monodromy(&family, &law).unwrap();
    assert_eq!(rep.classification, Classification::Decays);
    assert!(rep.spectral_radius < 1.0 - 1e-9);
}
