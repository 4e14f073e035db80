mod common;

use common::{golden_lift, golden_pair, GOLDEN};
use proptest::prelude::*;
use renorm_core::circle_maps::{
    extract_affine_pair, extract_pair, return_offsets, rotation_number, tune_omega, CircleLift, ExtractOptions,
    RigidRotation, MAX_BISECTIONS,
};
use renorm_core::combinatorics::{gauss, CfWord};
use renorm_core::renorm::{renorm_orbit, OrbitOptions};
use renorm_core::Error;

#[test]
fn tuned_lift_reproduces_the_golden_mean() {
    let t = tune_omega(0.0, &CfWord::periodic(vec![1]), 1e-11).unwrap();
    assert!(t.bisections <= MAX_BISECTIONS);
    // independent measurement after tuning
    let rho = rotation_number(&CircleLift::new(t.omega, 0.0).unwrap(), 1e-12).unwrap();
    assert!((rho - GOLDEN).abs() < 1e-10, "{rho}");
}

#[test]
fn silver_target_in_second_family() {
    let word = CfWord::periodic(vec![2]);
    let t = tune_omega(0.5, &word, 1e-11).unwrap();
    let lift = CircleLift::new(t.omega, 0.5).unwrap();
    let rho = rotation_number(&lift, 1e-12).unwrap();
    assert!((rho - (2f64.sqrt() - 1.0)).abs() < 1e-10);
    let pair = extract_pair(&lift, &ExtractOptions::default()).unwrap();
    let orbit = renorm_orbit(&pair, 6, &OrbitOptions::default());
    assert_eq!(orbit.heights(), vec![2; 6]);
}

#[test]
fn tuning_errors() {
    let rational: CfWord = "1,2".parse().unwrap();
    assert!(matches!(tune_omega(0.0, &rational, 1e-11), Err(Error::RationalTarget(_))));
    assert!(matches!(tune_omega(0.0, &CfWord::periodic(vec![1]), 1e-13), Err(Error::Tolerance(_))));
    assert!(CircleLift::new(0.3, 0.95).is_err());
}

#[test]
fn extracted_golden_pair_has_golden_glued_rotation() {
    // the glued circle of a pair with translation parameter s turns by 1/(1+s), and s = golden here
    let r = golden_pair().glued_rotation_number(1_000_000).unwrap();
    assert!((r.value - GOLDEN).abs() < 1e-8, "{r:?}");
}

#[test]
fn closest_returns_shrink_geometrically() {
    let offsets = return_offsets(&golden_lift(0.0), &CfWord::periodic(vec![1]), 20).unwrap();
    for w in offsets.windows(2).skip(2) {
        assert!(w[1].abs() < w[0].abs());
        assert!(w[0] * w[1] < 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn rigid_rotation_number(theta in 0.01..0.99f64) {
        let r = rotation_number(&RigidRotation { theta }, 1e-12).unwrap();
        prop_assert!((r - theta).abs() < 1e-12);
    }

    #[test]
    fn rigid_extraction_is_the_gauss_image(theta in 0.1..0.9f64) {
        let p = extract_affine_pair(&RigidRotation { theta }, &ExtractOptions::default()).unwrap();
        let m = (1.0 / theta).floor();
        prop_assume!((1.0 / theta - m).abs() > 1e-9);
        prop_assert!(p.is_affine() && p.normalized);
        prop_assert!((p.s() - (1.0 - m * theta) / theta).abs() < 1e-14 / theta);
        prop_assert!((p.s() - gauss(theta).unwrap()).abs() < 1e-13 / theta);
    }

    #[test]
    fn lift_commutes_with_integer_shifts(k in -(1i64 << 20)..(1i64 << 20), c in -0.85..0.85f64, omega in 0.0..1.0f64) {
        let f = CircleLift::new(omega, c).unwrap();
        let x = k as f64 / (1u64 << 18) as f64;
        let (y, y1) = (f.eval(x), f.eval(x + 1.0));
        // exact in the reduced orbit representation; one rounding of n + F(t) here
        prop_assert!((y1 - y - 1.0).abs() <= f64::EPSILON * (y.abs() + 1.0) * 2.0);
    }

    #[test]
    fn rotation_number_is_monotone_in_omega(omega in 0.05..0.9f64, c in -0.5..0.8f64) {
        let lo = rotation_number(&CircleLift::new(omega, c).unwrap(), 1e-9).unwrap();
        let hi = rotation_number(&CircleLift::new(omega + 0.01, c).unwrap(), 1e-9).unwrap();
        prop_assert!(lo >= 0.0 && hi <= 1.0 && lo <= hi + 1e-9);
    }

    #[test]
    fn sine_family_at_zero_shape(x in -1.0..1.0f64, omega in 0.0..1.0f64) {
        let f = CircleLift::new(omega, 0.0).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        prop_assert!((f.eval(x) - (x + omega - (two_pi * x).sin() / two_pi)).abs() < 1e-15);
    }
}
