//! Critical circle maps and the commuting pairs they generate.
//!
//! The family used throughout is
//!
//! ```text
//! F(x) = x + omega + [(c - 1) sin(2 pi x)/(2 pi) - (c/2) sin(4 pi x)/(4 pi)] / (1 - c/2)
//! F'(x) = (1 - cos 2 pi x)(1 + c cos 2 pi x) / (1 - c/2)
//! ```
//!
//! which has a cubic critical point at the integers for every `c` in
//! `(-0.9, 0.9)`; `c = 0` is the classical sine family.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chebapprox::{TryMap, DEFAULT_DEGREE};
use crate::combinatorics::{convergents, CfWord};
use crate::error::{Error, Result};
use crate::pairs::{padded_domains, CommutingPair, CubicMap, PairMeta};

/// Iteration budget for rotation numbers.
pub const ITERATION_BUDGET: u64 = 10_000_000;

/// Largest bisection count for [`tune_omega`].
pub const MAX_BISECTIONS: usize = 60;

/// Default bound `N_max` on heights.
pub const DEFAULT_N_MAX: usize = 20;

/// `|x|` below which `u(x) = (F(x) - omega)/x^3` uses its Taylor series.
const SERIES_SWITCH: f64 = 1e-2;

const TWO_PI: f64 = 2.0 * PI;

/// Lift of a degree-one circle map.
pub trait Lift {
    fn lift(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleLift {
    pub omega: f64,
    pub c: f64,
}

impl CircleLift {
    pub fn new(omega: f64, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::Config(format!("omega = {omega} must lie in [0, 1]")));
        }
        if !(c > -0.9 && c < 0.9) {
            return Err(Error::Config(format!("c = {c} must lie in (-0.9, 0.9)")));
        }
        Ok(CircleLift { omega, c })
    }

    /// `F(x) - x - omega`, the periodic part.
    pub fn periodic_part(&self, x: f64) -> f64 {
        let (s, co) = (TWO_PI * x).sin_cos();
        // sin(4 pi x) = 2 sin cos
        let s2 = 2.0 * s * co;
        ((self.c - 1.0) * s / TWO_PI - 0.5 * self.c * s2 / (2.0 * TWO_PI)) / (1.0 - 0.5 * self.c)
    }

    /// `F(x)`, computed as `n + F(t)` with `x = n + t`, `t in [0, 1)`, so integer shifts commute exactly.
    pub fn eval(&self, x: f64) -> f64 {
        let n = x.floor();
        let t = x - n;
        n + (t + self.omega + self.periodic_part(t))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let co = (TWO_PI * x).cos();
        (1.0 - co) * (1.0 + self.c * co) / (1.0 - 0.5 * self.c)
    }

    /// Taylor coefficients of `u(x) = (F(x) - omega)/x^3 = sum_j u_j x^{2j}`, `j = 0..7`.
    fn u_series(&self) -> [f64; 7] {
        let c = self.c;
        let mut out = [0.0; 7];
        let mut fact = 1.0; // (2j+1)!
        for (i, slot) in out.iter_mut().enumerate() {
            let j = i + 1;
            fact *= (2 * j) as f64 * (2 * j + 1) as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let k1 = TWO_PI.powi(2 * j as i32);
            let k2 = (2.0 * TWO_PI).powi(2 * j as i32);
            *slot = sign * ((c - 1.0) * k1 - 0.5 * c * k2) / fact / (1.0 - 0.5 * c);
        }
        out
    }

    fn u_taylor(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.u_series().iter().rev().fold(0.0, |acc, &u| acc * x2 + u)
    }

    /// `u(x) = (F(x) - omega)/x^3`, positive on `(-1, 1)`.
    pub fn cubic_factor(&self, x: f64) -> f64 {
        if x.abs() < SERIES_SWITCH {
            self.u_taylor(x)
        } else {
            (x + self.periodic_part(x)) / (x * x * x)
        }
    }
}

impl Lift for CircleLift {
    fn lift(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

/// Rigid rotation `x -> x + theta`, the exact oracle for the critical family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidRotation {
    pub theta: f64,
}

impl Lift for RigidRotation {
    fn lift(&self, x: f64) -> f64 {
        x + self.theta
    }
}

/// Orbit of 0 kept as `turns + position` with `position in [0, 1)`.
struct ReducedOrbit<'a, L: Lift + ?Sized> {
    map: &'a L,
    turns: i64,
    position: f64,
}

impl<'a, L: Lift + ?Sized> ReducedOrbit<'a, L> {
    fn new(map: &'a L) -> Self {
        ReducedOrbit { map, turns: 0, position: 0.0 }
    }

    fn step(&mut self) -> Result<()> {
        let y = self.map.lift(self.position);
        if !y.is_finite() {
            return Err(Error::OrbitDomain(format!("non-finite iterate from {}", self.position)));
        }
        let k = y.floor();
        self.turns += k as i64;
        self.position = y - k;
        Ok(())
    }

    /// `F^n(0) - p` for the current `n`.
    fn offset_from(&self, p: i64) -> f64 {
        (self.turns - p) as f64 + self.position
    }
}

/// Rotation number with the bracket `[lower, upper]` certified by orbit signs.
///
/// `F^n(0) >= p` forces `rho >= p/n` and `F^n(0) <= p` forces `rho <= p/n`;
/// iteration stops once the bracket is narrower than `tol`, or once the
/// estimates at two successive closest returns to 0 agree within `tol`.
pub fn rotation_number(map: &dyn Lift, tol: f64) -> Result<f64> {
    rotation_bracket(map, tol).map(|(v, _, _)| v)
}

/// As [`rotation_number`], also returning the bracket.
pub fn rotation_bracket(map: &dyn Lift, tol: f64) -> Result<(f64, f64, f64)> {
    if !(tol >= 1e-12) || !tol.is_finite() {
        return Err(Error::Tolerance(tol));
    }
    let mut orbit = ReducedOrbit::new(map);
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut estimate = f64::NAN;
    // closest returns of the orbit to 0 happen at convergent denominators
    let mut closest = f64::INFINITY;
    let mut at_closest = f64::NAN;
    for n in 1..=ITERATION_BUDGET {
        orbit.step()?;
        let nf = n as f64;
        if orbit.position == 0.0 {
            let exact = orbit.turns as f64 / nf;
            return Ok((exact, exact, exact));
        }
        lower = lower.max(orbit.turns as f64 / nf);
        upper = upper.min((orbit.turns + 1) as f64 / nf);
        estimate = ((orbit.turns as f64 + orbit.position) / nf).clamp(lower, upper);
        if upper - lower < tol {
            return Ok((estimate, lower, upper));
        }
        let gap = orbit.position.min(1.0 - orbit.position);
        if gap < closest {
            closest = gap;
            if (estimate - at_closest).abs() < tol {
                return Ok((estimate, lower, upper));
            }
            at_closest = estimate;
        }
        if n >= 1024 && n.is_power_of_two() {
            if let Some(r) = locked_rational(map, estimate, lower, upper, orbit.position) {
                return Ok((r, r, r));
            }
        }
    }
    Err(Error::ToleranceNotReached { tol, iterations: ITERATION_BUDGET, estimate })
}

/// Convergents `p/q` of `x` with `q <= q_max`.
fn float_convergents(x: f64, q_max: i64) -> Vec<(i64, i64)> {
    let (mut h0, mut k0, mut h1, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    let mut out = Vec::new();
    for _ in 0..40 {
        let a = r.floor();
        let (h, k) = (a as i64 * h1 + h0, a as i64 * k1 + k0);
        if k > q_max {
            break;
        }
        out.push((h, k));
        (h0, k0, h1, k1) = (h1, k1, h, k);
        let frac = r - a;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

/// `p/q` inside the bracket whose displacement `F^q(x) - x - p` changes sign,
/// which forces a periodic orbit of that type.
fn locked_rational(map: &dyn Lift, estimate: f64, lower: f64, upper: f64, near: f64) -> Option<f64> {
    const Q_MAX: i64 = 4096;
    const GRID: usize = 64;
    for (p, q) in float_convergents(estimate, Q_MAX).into_iter().rev().take(3) {
        let r = p as f64 / q as f64;
        if r < lower || r > upper {
            continue;
        }
        let displacement = |x: f64| {
            let y = (0..q).fold(x, |v, _| map.lift(v));
            y - x - p as f64
        };
        let probes = (0..GRID)
            .map(|i| i as f64 / GRID as f64)
            .chain([near - 1e-6, near + 1e-6]);
        let (mut pos, mut neg) = (false, false);
        for x in probes {
            let d = displacement(x);
            if !d.is_finite() {
                return None;
            }
            pos |= d >= 0.0;
            neg |= d <= 0.0;
        }
        if pos && neg {
            return Some(r);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Below,
    Above,
    Undecided,
}

/// Compares `rho(F)` with the target through the signs of `F^{q_k}(0) - p_k`.
fn compare_with_target(map: &dyn Lift, conv: &[(u64, u64)]) -> Result<Side> {
    let mut orbit = ReducedOrbit::new(map);
    let mut n = 0u64;
    for (k, &(p, q)) in conv.iter().enumerate().skip(1) {
        while n < q {
            orbit.step()?;
            n += 1;
        }
        let d = orbit.offset_from(p as i64);
        // p_k/q_k lies above the target for odd k, below it for even k
        if k % 2 == 1 {
            if d >= 0.0 {
                return Ok(Side::Above);
            }
        } else if d <= 0.0 {
            return Ok(Side::Below);
        }
    }
    Ok(Side::Undecided)
}

/// Convergents of `word` deep enough that `1/(q_{k-1} q_k) < tol / 16`.
fn target_convergents(word: &CfWord, tol: f64) -> Vec<(u64, u64)> {
    let all = convergents(word.entries(), 64);
    let mut out = Vec::new();
    for (i, &pq) in all.iter().enumerate() {
        out.push(pq);
        if i >= 1 {
            let prev = all[i - 1].1 as f64;
            if 1.0 / (prev * pq.1 as f64) < tol / 16.0 || pq.1 > ITERATION_BUDGET / 4 {
                break;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub omega: f64,
    pub bisections: usize,
}

/// Finds `omega` with `|rho(F_{omega,c}) - target| < tol` by bisection.
///
/// Convergent `k` of the target (numbered from `0/1`) lies above the target
/// for odd `k` and below it for even `k`; the first level where the orbit of
/// 0 disagrees tells which side of the target `rho` lies on.
pub fn tune_omega(c: f64, target: &CfWord, tol: f64) -> Result<TuneResult> {
    if target.is_rational() {
        return Err(Error::RationalTarget(target.to_string()));
    }
    target.check(u32::MAX)?;
    if !(tol >= 1e-11) || !tol.is_finite() {
        return Err(Error::Tolerance(tol));
    }
    let conv = target_convergents(target, tol);
    let side = |omega: f64| -> Result<Side> { compare_with_target(&CircleLift::new(omega, c)?, &conv) };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if side(lo)? != Side::Below || side(hi)? != Side::Above {
        return Err(Error::Tuning(format!("target {target} is not bracketed by omega in [0, 1]")));
    }
    for step in 1..=MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        match side(mid)? {
            Side::Undecided => return Ok(TuneResult { omega: mid, bisections: step }),
            Side::Below => lo = mid,
            Side::Above => hi = mid,
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(Error::Tuning(format!(
        "bracket collapsed to [{lo}, {hi}] without reaching the target {target}"
    )))
}

/// Distances `F^{q_k}(0) - p_k` along the convergents of `target`, `k = 0..depth`.
pub fn return_offsets(map: &dyn Lift, target: &CfWord, depth: usize) -> Result<Vec<f64>> {
    let conv = convergents(target.entries(), depth);
    let mut orbit = ReducedOrbit::new(map);
    let mut n = 0u64;
    let mut out = Vec::with_capacity(conv.len());
    for &(p, q) in &conv {
        if q > ITERATION_BUDGET {
            break;
        }
        while n < q {
            orbit.step()?;
            n += 1;
        }
        out.push(orbit.offset_from(p as i64));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub degree: usize,
    pub n_max: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { degree: DEFAULT_DEGREE, n_max: DEFAULT_N_MAX }
    }
}

/// `m = max{k >= 1 : F^k(0) < 1}`, i.e. `F^m(0) - 1` is the first iterate in `[F^{-1}(0), 0)`.
fn pair_level(map: &dyn Lift, n_max: usize) -> Result<(usize, f64)> {
    let mut x = map.lift(0.0);
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Combinatorics(format!("F(0) = {x} is not in (0, 1)")));
    }
    for m in 1..=n_max + 1 {
        let next = map.lift(x);
        if next >= 1.0 {
            return Ok((m, x));
        }
        x = next;
    }
    Err(Error::Combinatorics(format!("pair level exceeds N_max + 1 = {}", n_max + 1)))
}

/// The translation pair of a rigid rotation, normalized.
pub fn extract_affine_pair(rot: &RigidRotation, opts: &ExtractOptions) -> Result<CommutingPair> {
    let theta = rot.theta;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Combinatorics(format!("theta = {theta} is not in (0, 1)")));
    }
    let (m, fm) = pair_level(rot, opts.n_max)?;
    let a = fm - 1.0;
    let mut p = CommutingPair::affine(a / theta, 1.0)?;
    p.meta = PairMeta { heights: Vec::new(), source: format!("rotation theta={theta} m={m}") };
    Ok(p)
}

/// Normalized cubic pair `(F^m - 1, F)` of a tuned critical lift.
///
/// `xi = F` on `[eta(0), 0]` and `eta = F^m - 1` on `[0, F(0)]`, both written
/// as `outer(inner(x)^3)` with `inner(x) = x u(x)^{1/3}`.
pub fn extract_pair(lift: &CircleLift, opts: &ExtractOptions) -> Result<CommutingPair> {
    let (m, fm) = pair_level(lift, opts.n_max)?;
    let omega = lift.omega;
    let (a, b) = (fm - 1.0, omega);
    let (eta_dom, xi_dom) = padded_domains(a, b);
    let inner = TryMap(|x: f64| {
        let u = lift.cubic_factor(x);
        if !(u > 0.0) {
            return Err(Error::Representation(format!("u({x}) = {u} is not positive")));
        }
        Ok(x * u.cbrt())
    });
    let xi_outer = move |y: f64| omega + y;
    let eta_outer = move |y: f64| {
        let mut x = omega + y;
        for _ in 1..m {
            x = lift.eval(x);
        }
        x - 1.0
    };
    let eta = CubicMap::fit(&inner, &eta_outer, eta_dom, b, opts.degree)?;
    let xi = CubicMap::fit(&inner, &xi_outer, xi_dom, a, opts.degree)?;
    let meta = PairMeta {
        heights: Vec::new(),
        source: format!("circle lift omega={omega} c={} m={m}", lift.c),
    };
    CommutingPair::cubic(eta, xi, meta)?.normalize()
}
