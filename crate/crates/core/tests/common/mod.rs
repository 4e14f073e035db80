#![allow(dead_code)]

use std::sync::OnceLock;

use renorm_core::circle_maps::{extract_pair, tune_omega, CircleLift, ExtractOptions};
use renorm_core::combinatorics::CfWord;
use renorm_core::CommutingPair;

pub const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Lift of family `c` tuned to the golden mean.
pub fn golden_lift(c: f64) -> CircleLift {
    let t = tune_omega(c, &CfWord::periodic(vec![1]), 1e-11).unwrap();
    CircleLift::new(t.omega, c).unwrap()
}

fn extracted(c: f64) -> CommutingPair {
    extract_pair(&golden_lift(c), &ExtractOptions::default()).unwrap()
}

/// Golden pair of the sine family.
pub fn golden_pair() -> &'static CommutingPair {
    static PAIR: OnceLock<CommutingPair> = OnceLock::new();
    PAIR.get_or_init(|| extracted(0.0))
}

/// Golden pair of the `c = 0.5` family.
pub fn golden_pair_half() -> &'static CommutingPair {
    static PAIR: OnceLock<CommutingPair> = OnceLock::new();
    PAIR.get_or_init(|| extracted(0.5))
}

/// Largest branch difference at `n` probes of each operative interval.
pub fn branch_gap(p: &CommutingPair, q: &CommutingPair, n: usize) -> f64 {
    let a = p.a().max(q.a());
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let (x, y) = (t, a * t);
        worst = worst.max((p.eta.eval(x).unwrap() - q.eta.eval(x).unwrap()).abs());
        worst = worst.max((p.xi.eval(y).unwrap() - q.xi.eval(y).unwrap()).abs());
    }
    worst
}
