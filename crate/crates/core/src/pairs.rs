//! Critical commuting pairs.
//!
//! A pair `(eta, xi)` consists of two increasing maps sharing the critical
//! point 0: `eta` acts on `[0, b]` with `b = xi(0) > 0`, `xi` acts on `[a, 0]`
//! with `a = eta(0) < 0`, and the two commute near 0.
//!
//! Branches are either translations (the exact oracle path) or cubic
//! "sandwich" maps `outer(inner(x)^3)` with increasing `inner`, `outer` and
//! `inner(0) = 0`. Renormalization only post-composes by diffeomorphisms and
//! conjugates by linear maps, so the cubic form is preserved exactly.

use serde::{Deserialize, Serialize};

use crate::chebapprox::{decimal, ChebSeries, DecayRate, RealMap};
use crate::error::{Error, Result};

/// Padding of the operative intervals, as a fraction of `max(b, |a|)`.
pub const KAPPA: f64 = 0.05;

/// Probe count for the commutation residual.
pub const RESIDUAL_PROBES: usize = 129;

/// Probe count for the monotonicity checks.
pub const MONOTONE_PROBES: usize = 64;

/// Largest commutation residual accepted by [`ValidationReport::is_valid`].
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Default number of grid points for pair metrics.
pub const DEFAULT_GRID: usize = 257;

/// Cubic branch `x -> outer(inner(x)^3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicMap {
    pub outer: ChebSeries,
    pub inner: ChebSeries,
}

impl CubicMap {
    /// Builds a branch from raw inner/outer maps on `domain`.
    ///
    /// `inner` is fitted and shifted so that `inner(0) = 0` holds exactly, then
    /// rescaled so that `inner(anchor) = anchor`; `outer` is fitted on the
    /// padded range of `inner^3`, with the rescaling folded in.
    pub fn fit(
        inner: &dyn RealMap,
        outer: &dyn RealMap,
        domain: (f64, f64),
        anchor: f64,
        degree: usize,
    ) -> Result<CubicMap> {
        let raw = ChebSeries::fit_map(inner, domain.0, domain.1, degree)?;
        let raw = raw.shifted(-raw.eval(0.0)?);
        let at_anchor = raw.eval(anchor)?;
        if !(at_anchor / anchor > 0.0) {
            return Err(Error::Representation(format!(
                "inner factor is not increasing through 0 (inner({anchor}) = {at_anchor})"
            )));
        }
        let gauge = anchor / at_anchor;
        let inner = raw.scaled(gauge);
        let g3 = gauge * gauge * gauge;
        let y_lo = inner.eval(domain.0)?.powi(3);
        let y_hi = inner.eval(domain.1)?.powi(3);
        if !(y_hi > y_lo) {
            return Err(Error::Representation("inner factor is not monotone".into()));
        }
        let pad = 0.05 * (y_hi - y_lo);
        let outer_fn = crate::chebapprox::TryMap(|y: f64| outer.apply(y / g3));
        let outer = ChebSeries::fit_map(&outer_fn, y_lo - pad, y_hi + pad, degree)?;
        Ok(CubicMap { outer, inner })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let i = self.inner.eval(x)?;
        self.outer.eval(i * i * i)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.inner.lo(), self.inner.hi())
    }

    /// `x -> lambda * f(x / lambda)` for `lambda > 0`; exact on coefficients.
    fn conjugated(&self, lambda: f64) -> Result<CubicMap> {
        Ok(CubicMap {
            outer: self.outer.scaled(lambda),
            inner: self.inner.precompose_linear(1.0 / lambda)?,
        })
    }

    /// Smallest coefficient decay rate of the two factors.
    pub fn decay(&self) -> f64 {
        let rate = |s: &ChebSeries| s.decay_rate().map(|d: DecayRate| d.rate).unwrap_or(f64::INFINITY);
        rate(&self.inner).min(rate(&self.outer))
    }

    fn monotone(&self) -> bool {
        positive_on_probes(&self.inner.derivative()) && positive_on_probes(&self.outer.derivative())
    }

    fn critical(&self) -> bool {
        let scale = self.inner.max_abs_coeff().max(f64::MIN_POSITIVE);
        let at0 = self.inner.eval(0.0).unwrap_or(f64::NAN);
        let d_inner = self.inner.derivative().eval(0.0).unwrap_or(f64::NAN);
        let d_outer = self.outer.derivative().eval(0.0).unwrap_or(f64::NAN);
        at0.abs() <= 1e-12 * scale && d_inner > 0.0 && d_outer > 0.0
    }
}

fn positive_on_probes(d: &ChebSeries) -> bool {
    let (lo, hi) = (d.lo(), d.hi());
    (0..MONOTONE_PROBES).all(|i| {
        let x = lo + (hi - lo) * i as f64 / (MONOTONE_PROBES - 1) as f64;
        d.eval_unchecked(x) > 0.0
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    /// `x -> x + offset`
    Affine { offset: f64 },
    Cubic(CubicMap),
}

/// One branch of a pair together with its padded domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalMap {
    pub kind: MapKind,
    pub domain: (f64, f64),
}

impl CriticalMap {
    pub fn affine(offset: f64, domain: (f64, f64)) -> Self {
        CriticalMap { kind: MapKind::Affine { offset }, domain }
    }

    pub fn cubic(map: CubicMap) -> Self {
        let domain = map.domain();
        CriticalMap { kind: MapKind::Cubic(map), domain }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match &self.kind {
            MapKind::Affine { offset } => Ok(x + offset),
            MapKind::Cubic(m) => m.eval(x),
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, MapKind::Affine { .. })
    }

    pub fn as_cubic(&self) -> Option<&CubicMap> {
        match &self.kind {
            MapKind::Cubic(m) => Some(m),
            MapKind::Affine { .. } => None,
        }
    }

    /// Chebyshev series of the branch itself on `[lo, hi]`.
    pub fn series(&self, lo: f64, hi: f64, degree: usize) -> Result<ChebSeries> {
        match &self.kind {
            MapKind::Affine { offset } => ChebSeries::identity(lo, hi).map(|s| s.shifted(*offset)),
            MapKind::Cubic(m) => {
                let f = crate::chebapprox::TryMap(|x: f64| m.eval(x));
                ChebSeries::fit_map(&f, lo, hi, degree)
            }
        }
    }

    fn conjugated(&self, lambda: f64) -> Result<CriticalMap> {
        let domain = (self.domain.0 * lambda, self.domain.1 * lambda);
        Ok(match &self.kind {
            MapKind::Affine { offset } => CriticalMap::affine(offset * lambda, domain),
            MapKind::Cubic(m) => CriticalMap::cubic(m.conjugated(lambda)?),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub heights: Vec<u32>,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutingPair {
    pub eta: CriticalMap,
    pub xi: CriticalMap,
    pub normalized: bool,
    pub meta: PairMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub residual: f64,
    pub monotone_ok: bool,
    pub critical_ok: bool,
    /// `a < 0 < b` and both branches of the same kind.
    pub structure_ok: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.structure_ok && self.monotone_ok && self.critical_ok && self.residual < RESIDUAL_TOL
    }
}

/// Rotation number estimate with a rigorous bracket from the orbit signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub value: f64,
    pub accuracy: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Padded operative intervals for a pair with `a = eta(0)`, `b = xi(0)`.
pub fn padded_domains(a: f64, b: f64) -> ((f64, f64), (f64, f64)) {
    let pad = KAPPA * b.max(-a);
    ((-pad, b + pad), (a - pad, pad))
}

impl CommutingPair {
    /// Translation pair `eta(x) = x + a`, `xi(x) = x + b`.
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if !(a < 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidPair(format!("need a < 0 < b, got a = {a}, b = {b}")));
        }
        let (de, dx) = padded_domains(a, b);
        Ok(CommutingPair {
            eta: CriticalMap::affine(a, de),
            xi: CriticalMap::affine(b, dx),
            normalized: b == 1.0,
            meta: PairMeta { heights: Vec::new(), source: "affine".into() },
        })
    }

    /// Normalized translation pair `eta(x) = x - s`, `xi(x) = x + 1`.
    pub fn translation(s: f64) -> Result<Self> {
        Self::affine(-s, 1.0)
    }

    pub fn cubic(eta: CubicMap, xi: CubicMap, meta: PairMeta) -> Result<Self> {
        let mut p = CommutingPair {
            eta: CriticalMap::cubic(eta),
            xi: CriticalMap::cubic(xi),
            normalized: false,
            meta,
        };
        let (a, b) = (p.a(), p.b());
        if !(a < 0.0 && b > 0.0) {
            return Err(Error::InvalidPair(format!("need a < 0 < b, got a = {a}, b = {b}")));
        }
        p.normalized = (b - 1.0).abs() <= 4.0 * f64::EPSILON;
        Ok(p)
    }

    pub fn is_affine(&self) -> bool {
        self.eta.is_affine() && self.xi.is_affine()
    }

    /// `eta(0)`.
    pub fn a(&self) -> f64 {
        self.eta.eval(0.0).unwrap_or(f64::NAN)
    }

    /// `xi(0)`.
    pub fn b(&self) -> f64 {
        self.xi.eval(0.0).unwrap_or(f64::NAN)
    }

    /// `s = -eta(0)/xi(0)`, the translation parameter of a normalized affine pair.
    pub fn s(&self) -> f64 {
        -self.a() / self.b()
    }

    /// `x -> lambda * f(x / lambda)` on both branches, `lambda > 0`.
    pub fn conjugate_linear(&self, lambda: f64) -> Result<CommutingPair> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidPair(format!("conjugation factor {lambda} must be positive")));
        }
        let mut p = CommutingPair {
            eta: self.eta.conjugated(lambda)?,
            xi: self.xi.conjugated(lambda)?,
            normalized: false,
            meta: self.meta.clone(),
        };
        p.normalized = (p.b() - 1.0).abs() <= 4.0 * f64::EPSILON;
        Ok(p)
    }

    /// Absorbs the last-bit rounding of `xi(0)` into the outer constant term of a cubic `xi`.
    pub(crate) fn pin_unit_xi(&mut self) {
        if let MapKind::Cubic(m) = &mut self.xi.kind {
            for _ in 0..4 {
                let d = 1.0 - m.eval(0.0).unwrap_or(1.0);
                if d == 0.0 {
                    break;
                }
                m.outer = m.outer.shifted(d);
            }
        }
    }

    /// Conjugates by `x -> b x` so that `xi(0) = 1`.
    pub fn normalize(&self) -> Result<CommutingPair> {
        let b = self.b();
        if !(b > 0.0) {
            return Err(Error::InvalidPair(format!("xi(0) = {b} must be positive")));
        }
        if b == 1.0 {
            let mut p = self.clone();
            p.normalized = true;
            return Ok(p);
        }
        let mut p = self.conjugate_linear(1.0 / b)?;
        let affine = p.is_affine();
        if let (MapKind::Affine { offset }, true) = (&mut p.xi.kind, affine) {
            *offset = 1.0;
        }
        p.pin_unit_xi();
        p.normalized = true;
        Ok(p)
    }

    /// Sup of `|eta(xi(x)) - xi(eta(x))|` over the padded overlap `[kappa a, kappa b]`.
    pub fn commutation_residual(&self) -> Result<f64> {
        if self.is_affine() {
            // translations commute exactly
            return Ok(0.0);
        }
        let (a, b) = (self.a(), self.b());
        let (lo, hi) = (KAPPA * a, KAPPA * b);
        let mut worst: f64 = 0.0;
        for i in 0..RESIDUAL_PROBES {
            let x = lo + (hi - lo) * i as f64 / (RESIDUAL_PROBES - 1) as f64;
            let ex = self.xi.eval(x).and_then(|y| self.eta.eval(y));
            let xe = self.eta.eval(x).and_then(|y| self.xi.eval(y));
            match (ex, xe) {
                (Ok(u), Ok(v)) => worst = worst.max((u - v).abs()),
                _ => return Err(Error::CompositionDomain { link: 1, node: x, value: x }),
            }
        }
        Ok(worst)
    }

    pub fn validate(&self) -> ValidationReport {
        let (a, b) = (self.a(), self.b());
        let same_kind = self.is_affine() || (self.eta.as_cubic().is_some() && self.xi.as_cubic().is_some());
        let structure_ok = same_kind && a < 0.0 && b > 0.0;
        let residual = self.commutation_residual().unwrap_or(f64::INFINITY);
        let (monotone_ok, critical_ok) = match (self.eta.as_cubic(), self.xi.as_cubic()) {
            (Some(e), Some(x)) => (e.monotone() && x.monotone(), e.critical() && x.critical()),
            _ => (true, true),
        };
        ValidationReport { residual, monotone_ok, critical_ok, structure_ok }
    }

    /// Smallest coefficient decay rate over all factors (infinite for affine pairs).
    pub fn decay(&self) -> f64 {
        match (self.eta.as_cubic(), self.xi.as_cubic()) {
            (Some(e), Some(x)) => e.decay().min(x.decay()),
            _ => f64::INFINITY,
        }
    }

    /// Rotation number of the circle obtained by gluing `[a, b]` via `xi(a) = eta(b)`.
    ///
    /// Iterates `T = xi` on `[a, 0)` and `T = eta` on `[0, b)`, each `eta` step
    /// being one turn. Each iterate bounds the rotation number from one side;
    /// the returned value is the orbit average clipped into that bracket.
    pub fn glued_rotation_number(&self, iterations: u64) -> Result<RotationEstimate> {
        if iterations < 1000 {
            return Err(Error::OrbitDomain(format!("{iterations} iterations requested, need at least 1000")));
        }
        let (a, b) = (self.a(), self.b());
        let len = b - a;
        let x0 = 0.0;
        let mut x = x0;
        let mut turns: i64 = 0;
        let mut lower: f64 = 0.0;
        let mut upper: f64 = 1.0;
        for n in 1..=iterations {
            let y = if x < 0.0 {
                self.xi.eval(x)
            } else {
                turns += 1;
                self.eta.eval(x)
            };
            let mut y = y.map_err(|e| Error::OrbitDomain(format!("step {n}: {e}")))?;
            if !y.is_finite() || y < a - KAPPA * len || y > b + KAPPA * len {
                return Err(Error::OrbitDomain(format!("step {n}: orbit left [a, b] at {y}")));
            }
            if y >= b {
                y -= len;
                turns += 1;
            } else if y < a {
                y += len;
                turns -= 1;
            }
            x = y;
            let frac = turns as f64 / n as f64;
            if x > x0 {
                lower = lower.max(frac);
            } else if x < x0 {
                upper = upper.min(frac);
            } else {
                return Ok(RotationEstimate { value: frac, accuracy: 0.0, lower: frac, upper: frac });
            }
        }
        let n = iterations as f64;
        let average = (turns as f64 * len + (x - x0)) / (n * len);
        let value = average.clamp(lower, upper);
        Ok(RotationEstimate { value, accuracy: upper - lower, lower, upper })
    }

    /// Chebyshev series of `eta` on `[0, 1]` and `xi` on `[a_common, 0]`.
    pub fn branch_series(&self, a_common: f64, degree: usize) -> Result<(ChebSeries, ChebSeries)> {
        let eta = self.eta.series(0.0, self.b(), degree)?;
        let xi = self.xi.series(a_common, 0.0, degree)?;
        Ok((eta, xi))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PairRepr::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<CommutingPair> {
        let r: PairRepr = serde_json::from_str(text)?;
        r.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BranchRepr {
    Cubic { outer: ChebSeries, inner: ChebSeries },
    Affine { offset: String, domain: [String; 2] },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairRepr {
    kind: String,
    eta: BranchRepr,
    xi: BranchRepr,
    normalized: bool,
    meta: PairMeta,
}

impl From<&CriticalMap> for BranchRepr {
    fn from(m: &CriticalMap) -> Self {
        match &m.kind {
            MapKind::Affine { offset } => BranchRepr::Affine {
                offset: decimal(*offset),
                domain: [decimal(m.domain.0), decimal(m.domain.1)],
            },
            MapKind::Cubic(c) => BranchRepr::Cubic { outer: c.outer.clone(), inner: c.inner.clone() },
        }
    }
}

impl From<&CommutingPair> for PairRepr {
    fn from(p: &CommutingPair) -> Self {
        PairRepr {
            kind: if p.is_affine() { "affine" } else { "cubic" }.into(),
            eta: (&p.eta).into(),
            xi: (&p.xi).into(),
            normalized: p.normalized,
            meta: p.meta.clone(),
        }
    }
}

fn parse_decimal(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Serde(format!("bad decimal {s:?}: {e}")))
}

impl TryFrom<BranchRepr> for CriticalMap {
    type Error = Error;

    fn try_from(r: BranchRepr) -> Result<CriticalMap> {
        Ok(match r {
            BranchRepr::Affine { offset, domain } => {
                CriticalMap::affine(parse_decimal(&offset)?, (parse_decimal(&domain[0])?, parse_decimal(&domain[1])?))
            }
            BranchRepr::Cubic { outer, inner } => CriticalMap::cubic(CubicMap { outer, inner }),
        })
    }
}

impl TryFrom<PairRepr> for CommutingPair {
    type Error = Error;

    fn try_from(r: PairRepr) -> Result<CommutingPair> {
        let eta: CriticalMap = r.eta.try_into()?;
        let xi: CriticalMap = r.xi.try_into()?;
        let kind_ok = match r.kind.as_str() {
            "affine" => eta.is_affine() && xi.is_affine(),
            "cubic" => eta.as_cubic().is_some() && xi.as_cubic().is_some(),
            _ => false,
        };
        if !kind_ok {
            return Err(Error::InvalidPair(format!("kind {:?} does not match the branches", r.kind)));
        }
        Ok(CommutingPair { eta, xi, normalized: r.normalized, meta: r.meta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_cubic_pair() -> CommutingPair {
        // eta = F - 1 on [0, b], xi = F on [a, 0] for the lift F(x) = x + w - sin(2 pi x)/(2 pi)
        let w = 0.61;
        let f = move |x: f64| x + w - (2.0 * std::f64::consts::PI * x).sin() / (2.0 * std::f64::consts::PI);
        let u = |x: f64| -> f64 {
            if x.abs() < 1e-3 {
                let t = 2.0 * std::f64::consts::PI * x;
                (2.0 * std::f64::consts::PI).powi(2) / 6.0 * (1.0 - t * t / 20.0)
            } else {
                (f(x) - w) / (x * x * x)
            }
        };
        let inner = move |x: f64| x * u(x).cbrt();
        let (a, b) = (f(0.0) - 1.0, w);
        let (de, dx) = padded_domains(a, b);
        let eta_outer = move |y: f64| w + y - 1.0;
        let xi_outer = move |y: f64| w + y;
        let eta = CubicMap::fit(&inner, &eta_outer, de, b, 48).unwrap();
        let xi = CubicMap::fit(&inner, &xi_outer, dx, a, 48).unwrap();
        CommutingPair::cubic(eta, xi, PairMeta::default()).unwrap()
    }

    #[test]
    fn affine_pair_is_valid() {
        let p = CommutingPair::affine(-0.4, 1.0).unwrap();
        let r = p.validate();
        assert_eq!(r.residual, 0.0);
        assert!(r.is_valid());
        assert!(p.normalized);
        assert!(CommutingPair::affine(0.4, 1.0).is_err());
    }

    #[test]
    fn normalize_affine() {
        let p = CommutingPair::affine(-0.8, 2.0).unwrap();
        let n = p.normalize().unwrap();
        assert_eq!(n.b(), 1.0);
        assert!((n.a() + 0.4).abs() < 1e-16);
        let again = n.normalize().unwrap();
        assert_eq!(again, n);
    }

    #[test]
    fn cubic_pair_commutes_and_normalizes() {
        let p = toy_cubic_pair();
        let r = p.validate();
        assert!(r.monotone_ok && r.critical_ok && r.structure_ok, "{r:?}");
        assert!(r.residual < 1e-10, "{r:?}");
        let n = p.normalize().unwrap();
        assert!((n.b() - 1.0).abs() < 1e-14);
        let scaled_residual = n.commutation_residual().unwrap();
        assert!(scaled_residual < 1e-10);
        assert_eq!(n.normalize().unwrap(), n);
    }

    #[test]
    fn broken_monotonicity_is_reported() {
        let mut p = toy_cubic_pair();
        if let MapKind::Cubic(m) = &mut p.eta.kind {
            // a large T_3 component makes inner' negative somewhere
            let mut c = m.inner.coeffs().to_vec();
            c[3] -= 2.0;
            m.inner = ChebSeries::new(m.inner.lo(), m.inner.hi(), c).unwrap();
        }
        assert!(!p.validate().monotone_ok);
    }

    #[test]
    fn glued_rotation_of_translations() {
        let p = CommutingPair::translation(0.4).unwrap();
        let r = p.glued_rotation_number(100_000).unwrap();
        assert!((r.value - 1.0 / 1.4).abs() < 1e-9, "{r:?}");
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let p = CommutingPair::translation(g).unwrap();
        let r = p.glued_rotation_number(100_000).unwrap();
        assert!((r.value - 1.0 / (1.0 + g)).abs() < 1e-9, "{r:?}");
        assert!(r.lower <= r.value && r.value <= r.upper);
        assert!(p.glued_rotation_number(0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = toy_cubic_pair().normalize().unwrap();
        let text = p.to_json().unwrap();
        let back = CommutingPair::from_json(&text).unwrap();
        assert_eq!(p, back);
        let a = CommutingPair::translation(0.3).unwrap();
        assert_eq!(CommutingPair::from_json(&a.to_json().unwrap()).unwrap(), a);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["kind"], "cubic");
    }
}
