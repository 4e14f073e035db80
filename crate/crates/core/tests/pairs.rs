mod common;

use common::{branch_gap, golden_pair, golden_pair_half, GOLDEN};
use proptest::prelude::*;
use renorm_core::chebapprox::ChebSeries;
use renorm_core::pairs::{padded_domains, CubicMap, PairMeta};
use renorm_core::renorm::height;
use renorm_core::{CommutingPair, Error};

#[test]
fn affine_validation_and_normalization() {
    let p = CommutingPair::affine(-0.8, 2.0).unwrap();
    let r = p.validate();
    assert!(r.is_valid() && r.residual == 0.0);
    let n = p.normalize().unwrap();
    assert!(n.normalized);
    assert_eq!((n.a(), n.b()), (-0.4, 1.0));
    assert_eq!(n.normalize().unwrap(), n);
    assert_eq!(n.commutation_residual().unwrap(), p.commutation_residual().unwrap() / 2.0);
    assert!(matches!(CommutingPair::affine(0.3, 1.0), Err(Error::InvalidPair(_))));
}

#[test]
fn extracted_cubic_pair_commutes() {
    let p = golden_pair();
    assert!(!p.is_affine() && p.normalized);
    let r = p.validate();
    assert!(r.is_valid(), "{r:?}");
    assert!(r.residual < 1e-10, "{}", r.residual);
}

#[test]
fn normalizing_a_rescaled_cubic_pair() {
    let p = golden_pair();
    let raw = p.conjugate_linear(GOLDEN).unwrap();
    assert!(!raw.normalized);
    assert!((raw.b() - GOLDEN).abs() < 1e-14);
    let n = raw.normalize().unwrap();
    assert!((n.b() - 1.0).abs() < 1e-14);
    assert_eq!(height(&raw, 20).unwrap(), height(&n, 20).unwrap());
    assert!(branch_gap(&n, p, 200) < 1e-12);
}

#[test]
fn mismatched_branches_do_not_commute() {
    let (p, q) = (golden_pair(), golden_pair_half());
    let eta = p.eta.as_cubic().unwrap().clone();
    let xi = q.xi.as_cubic().unwrap().clone();
    let mixed = CommutingPair::cubic(eta, xi, PairMeta::default()).unwrap();
    let residual = mixed.commutation_residual().unwrap();
    // measured 1.03e-1 on the golden pairs of the families c = 0 and c = 0.5
    assert!(residual > 1e-3, "{residual}");
    assert!(!mixed.validate().is_valid());
}

#[test]
fn decreasing_inner_factor_fails_monotonicity() {
    let p = golden_pair();
    let xi = p.xi.as_cubic().unwrap().clone();
    let eta = p.eta.as_cubic().unwrap();
    // a bump that drives inner' negative near the right end of the domain
    let (lo, hi) = (eta.inner.lo(), eta.inner.hi());
    let bumped = ChebSeries::fit(
        |x: f64| eta.inner.eval(x).unwrap() - 0.2 * (-((x - 0.8) / 0.03).powi(2)).exp(),
        lo,
        hi,
        64,
    )
    .unwrap();
    let bumped = bumped.shifted(-bumped.eval(0.0).unwrap());
    let broken = CubicMap { outer: eta.outer.clone(), inner: bumped };
    let q = CommutingPair::cubic(broken, xi, PairMeta::default()).unwrap();
    assert!(!q.validate().monotone_ok);
}

#[test]
fn glued_rotation_numbers_of_translations() {
    let p = CommutingPair::translation(0.4).unwrap();
    let r = p.glued_rotation_number(100_000).unwrap();
    assert!((r.value - 1.0 / 1.4).abs() < 1e-9);
    let g = CommutingPair::translation(GOLDEN).unwrap();
    let r = g.glued_rotation_number(100_000).unwrap();
    assert!((r.value - GOLDEN).abs() < 1e-9);
    assert!(g.glued_rotation_number(0).is_err());
}

#[test]
fn cubic_pair_json_round_trip() {
    let p = golden_pair();
    let back = CommutingPair::from_json(&p.to_json().unwrap()).unwrap();
    assert_eq!(&back, p);
    let v: serde_json::Value = serde_json::from_str(&p.to_json().unwrap()).unwrap();
    assert_eq!(v["kind"], "cubic");
    assert!(v["eta"]["outer"]["coeffs"][0].is_string());
    assert!(branch_gap(&back, p, 100) <= 1e-15);
}

#[test]
fn branch_domains_are_padded() {
    let ((e0, e1), (x0, x1)) = padded_domains(-0.5, 1.0);
    assert_eq!((e0, e1), (-0.05, 1.05));
    assert_eq!((x0, x1), (-0.55, 0.05));
}

proptest! {
    #[test]
    fn translation_rotation_number(s in 0.1..0.9f64) {
        let r = CommutingPair::translation(s).unwrap().glued_rotation_number(100_000).unwrap();
        prop_assert!((r.value - 1.0 / (1.0 + s)).abs() < 1e-8);
        prop_assert!(r.lower <= r.value && r.value <= r.upper);
    }

    #[test]
    fn rescaling_then_normalizing_is_identity(lambda in 0.2..5.0f64, s in 0.1..0.9f64) {
        let p = CommutingPair::translation(s).unwrap();
        let back = p.conjugate_linear(lambda).unwrap().normalize().unwrap();
        prop_assert!((back.a() - p.a()).abs() < 1e-12);
        let cubic = golden_pair();
        let back = cubic.conjugate_linear(lambda).unwrap().normalize().unwrap();
        prop_assert!(branch_gap(&back, cubic, 64) < 1e-12);
    }

    #[test]
    fn affine_json_round_trip(a in -3.0..-0.01f64, b in 0.01..3.0f64) {
        let p = CommutingPair::affine(a, b).unwrap();
        let back = CommutingPair::from_json(&p.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn affine_residual_scales_under_normalization(a in -3.0..-0.01f64, b in 0.01..3.0f64) {
        let p = CommutingPair::affine(a, b).unwrap();
        let n = p.normalize().unwrap();
        prop_assert!((n.commutation_residual().unwrap() - p.commutation_residual().unwrap() / b).abs() < 1e-12);
        prop_assert!((n.s() - p.s()).abs() < 1e-14);
    }
}
