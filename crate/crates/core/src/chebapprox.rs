//! Chebyshev series on arbitrary real intervals.
//!
//! A [`ChebSeries`] stores coefficients `c_0..c_m` of
//! `f(x) = sum c_k T_k(t)`, where `t = (2x - lo - hi) / (hi - lo)` pulls
//! `[lo, hi]` back to `[-1, 1]`. Fits interpolate at the Chebyshev-Lobatto
//! points, so the interval endpoints are always nodes.
//!
//! Besides evaluation and differentiation the series carries two
//! diagnostics used throughout the renormalization code: the tail magnitude
//! (is the fit resolved?) and the geometric decay rate of the coefficients,
//! which bounds the Bernstein ellipse on which the series is a trustworthy
//! analytic continuation.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the interval width by which evaluation may leave `[lo, hi]`.
pub const PADDING: f64 = 0.05;

/// Degree used for pair branches.
pub const DEFAULT_DEGREE: usize = 64;

/// Relative tail tolerance for a fit to count as resolved.
pub const TAIL_TOL: f64 = 1e-11;

/// Coefficients below `NOISE_FLOOR * max|c_k|` are rounding noise.
pub const NOISE_FLOOR: f64 = 1e-14;

/// Smallest degree for which a decay slope is meaningful.
pub const MIN_DECAY_DEGREE: usize = 8;

/// Anything that maps reals to reals, possibly failing outside its domain.
pub trait RealMap {
    fn apply(&self, x: f64) -> Result<f64>;
}

impl<F: Fn(f64) -> f64> RealMap for F {
    fn apply(&self, x: f64) -> Result<f64> {
        Ok(self(x))
    }
}

/// Adapter for fallible closures.
pub struct TryMap<F>(pub F);

impl<F: Fn(f64) -> Result<f64>> RealMap for TryMap<F> {
    fn apply(&self, x: f64) -> Result<f64> {
        (self.0)(x)
    }
}

impl RealMap for ChebSeries {
    fn apply(&self, x: f64) -> Result<f64> {
        self.eval(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

/// Value of the analytic continuation together with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexValue {
    pub value: Complex64,
    pub error: f64,
}

/// Geometric decay estimate `|c_k| ~ C rate^{-k}`.
///
/// `rate` is `f64::INFINITY` when the series is a resolved polynomial or
/// identically zero; `sentinel` flags that case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRate {
    pub rate: f64,
    pub sentinel: bool,
}

impl DecayRate {
    pub fn certifies(&self, rho: f64) -> bool {
        rho < self.rate
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::Domain { lo, hi });
    }
    Ok(())
}

/// Chebyshev-Lobatto nodes of `[lo, hi]`, ordered from `hi` down to `lo`.
pub fn lobatto_nodes(lo: f64, hi: f64, degree: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..=degree)
        .map(|j| {
            if j == 0 {
                hi
            } else if j == degree {
                lo
            } else {
                // sin form keeps the nodes symmetric to the last bit
                let t = (PI * (degree as f64 - 2.0 * j as f64) / (2.0 * degree as f64)).sin();
                mid + half * t
            }
        })
        .collect()
}

/// Bernstein ellipse parameter of `t` relative to `[-1, 1]`.
pub fn ellipse_parameter(t: Complex64) -> f64 {
    let w = (t * t - 1.0).sqrt();
    (t + w).norm().max((t - w).norm())
}

impl ChebSeries {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Result<Self> {
        check_interval(lo, hi)?;
        if coeffs.is_empty() {
            return Err(Error::Degree(0));
        }
        Ok(ChebSeries { lo, hi, coeffs })
    }

    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Self> {
        Self::new(lo, hi, vec![value])
    }

    pub fn identity(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, vec![0.5 * (lo + hi), 0.5 * (hi - lo)])
    }

    /// Interpolates `f` at the `degree + 1` Chebyshev-Lobatto points of `[lo, hi]`.
    pub fn fit<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, degree: usize) -> Result<Self> {
        Self::fit_map(&f, lo, hi, degree)
    }

    /// Like [`ChebSeries::fit`] for any [`RealMap`]; errors from the map propagate.
    pub fn fit_map(f: &dyn RealMap, lo: f64, hi: f64, degree: usize) -> Result<Self> {
        check_interval(lo, hi)?;
        if degree == 0 {
            return Err(Error::Degree(0));
        }
        let nodes = lobatto_nodes(lo, hi, degree);
        let mut values = Vec::with_capacity(nodes.len());
        for &x in &nodes {
            let v = f.apply(x)?;
            if !v.is_finite() {
                return Err(Error::Fit { node: x, value: v });
            }
            values.push(v);
        }
        Ok(Self::from_lobatto_values(lo, hi, &values))
    }

    /// Coefficients from values at the Lobatto nodes (DCT-I).
    pub fn from_lobatto_values(lo: f64, hi: f64, values: &[f64]) -> Self {
        let n = values.len() - 1;
        if n == 0 {
            return ChebSeries { lo, hi, coeffs: vec![values[0]] };
        }
        let period = 2 * n;
        let cos_table: Vec<f64> = (0..period).map(|i| (PI * i as f64 / n as f64).cos()).collect();
        let mut coeffs = vec![0.0; n + 1];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &v) in values.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                acc += w * v * cos_table[(j * k) % period];
            }
            let scale = if k == 0 || k == n { 1.0 / n as f64 } else { 2.0 / n as f64 };
            *ck = acc * scale;
        }
        ChebSeries { lo, hi, coeffs }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// The interval enlarged by [`PADDING`] on both sides.
    pub fn padded_bounds(&self) -> (f64, f64) {
        let w = PADDING * (self.hi - self.lo);
        (self.lo - w, self.hi + w)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// `max(|c_{m-1}|, |c_m|)`.
    pub fn tail(&self) -> f64 {
        let m = self.coeffs.len();
        let last = self.coeffs[m - 1].abs();
        if m >= 2 {
            last.max(self.coeffs[m - 2].abs())
        } else {
            last
        }
    }

    /// Tail relative to the largest coefficient is below `tol`.
    pub fn is_resolved(&self, tol: f64) -> bool {
        let scale = self.max_abs_coeff();
        scale == 0.0 || self.tail() <= tol * scale
    }

    /// Clenshaw evaluation; errors beyond the padded interval.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (plo, phi) = self.padded_bounds();
        if !(x >= plo && x <= phi) {
            return Err(Error::Extrapolation { x, lo: self.lo, hi: self.hi });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Clenshaw evaluation without the domain check.
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        let t = self.to_unit(x);
        let two_t = 2.0 * t;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = c + two_t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + t * b1 - b2
    }


    /// Bernstein parameter of `z` relative to this series' interval.
    pub fn ellipse_parameter_of(&self, z: Complex64) -> f64 {
        let t = (2.0 * z - (self.lo + self.hi)) / (self.hi - self.lo);
        ellipse_parameter(t)
    }

    /// Largest ellipse parameter on which complex evaluation is trusted.
    pub fn certified_parameter(&self) -> f64 {
        match self.decay_rate() {
            Ok(d) => d.rate,
            // a low-degree series is its own polynomial, entire
            Err(_) => f64::INFINITY,
        }
    }

    /// Evaluates the analytic continuation at `z`.
    pub fn eval_complex(&self, z: Complex64) -> Result<ComplexValue> {
        let t = (2.0 * z - (self.lo + self.hi)) / (self.hi - self.lo);
        let rho = ellipse_parameter(t);
        let certified = self.certified_parameter();
        let on_interval = z.im == 0.0 && {
            let (plo, phi) = self.padded_bounds();
            z.re >= plo && z.re <= phi
        };
        if !on_interval && rho >= certified {
            return Err(Error::AnalyticDomain { re: z.re, im: z.im, rho, certified });
        }
        // off the interval rho^k amplifies rounding noise, so trailing coefficients
        // below the noise floor are dropped and charged to the error estimate
        let floor = NOISE_FLOOR * self.max_abs_coeff();
        let kept = if rho > 1.0 {
            self.coeffs.iter().rposition(|c| c.abs() > floor).map_or(1, |k| k + 1)
        } else {
            self.coeffs.len()
        };
        let value = clenshaw_complex(&self.coeffs[..kept], t);
        let m = self.degree() as i32;
        let mut error = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let w = rho.powi(k as i32);
            if k < kept {
                error += f64::EPSILON * c.abs() * w;
            } else {
                error += c.abs() * w;
            }
        }
        if certified.is_finite() {
            let q = rho / certified;
            error += self.tail() * rho.powi(m) * q / (1.0 - q).max(f64::EPSILON);
        }
        Ok(ComplexValue { value, error })
    }

    /// Exact derivative, including the interval chain-rule factor.
    pub fn derivative(&self) -> ChebSeries {
        let n = self.degree();
        if n == 0 {
            return ChebSeries { lo: self.lo, hi: self.hi, coeffs: vec![0.0] };
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..=n).rev() {
            let next = if k < n { d[k + 1] } else { 0.0 };
            d[k - 1] = next + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n);
        let factor = 2.0 / (self.hi - self.lo);
        for c in d.iter_mut() {
            *c *= factor;
        }
        ChebSeries { lo: self.lo, hi: self.hi, coeffs: d }
    }

    /// Least-squares decay rate of `|c_k|` above the noise floor.
    pub fn decay_rate(&self) -> Result<DecayRate> {
        let m = self.degree();
        if m < MIN_DECAY_DEGREE {
            return Err(Error::Degree(m));
        }
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return Ok(DecayRate { rate: f64::INFINITY, sentinel: true });
        }
        let floor = NOISE_FLOOR * scale;
        let significant: Vec<usize> = (1..=m).filter(|&k| self.coeffs[k].abs() > floor).collect();
        let last = match significant.last() {
            Some(&k) => k,
            None => return Ok(DecayRate { rate: f64::INFINITY, sentinel: true }),
        };
        // a series that stops far above the floor is a polynomial, not a geometric tail
        if last < m && self.coeffs[last].abs() > 1e3 * floor {
            return Ok(DecayRate { rate: f64::INFINITY, sentinel: true });
        }
        if significant.len() < 2 {
            return Ok(DecayRate { rate: f64::INFINITY, sentinel: true });
        }
        let n = significant.len() as f64;
        let (sx, sy) = significant
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &k| (sx + k as f64, sy + self.coeffs[k].abs().ln()));
        let (mx, my) = (sx / n, sy / n);
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &k in &significant {
            let dx = k as f64 - mx;
            sxy += dx * (self.coeffs[k].abs().ln() - my);
            sxx += dx * dx;
        }
        let slope = sxy / sxx;
        Ok(DecayRate { rate: (-slope).exp().max(1.0), sentinel: false })
    }

    /// Series for `x -> scale * f(x)`.
    pub fn scaled(&self, scale: f64) -> ChebSeries {
        ChebSeries {
            lo: self.lo,
            hi: self.hi,
            coeffs: self.coeffs.iter().map(|c| c * scale).collect(),
        }
    }

    /// Series for `x -> f(x) + shift`.
    pub fn shifted(&self, shift: f64) -> ChebSeries {
        let mut s = self.clone();
        s.coeffs[0] += shift;
        s
    }

    /// Series for `x -> f(lambda * x)`; exact, since `T_k(-t) = (-1)^k T_k(t)`.
    pub fn precompose_linear(&self, lambda: f64) -> Result<ChebSeries> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::Domain { lo: self.lo / lambda, hi: self.hi / lambda });
        }
        if lambda > 0.0 {
            return ChebSeries::new(self.lo / lambda, self.hi / lambda, self.coeffs.clone());
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
            .collect();
        ChebSeries::new(self.hi / lambda, self.lo / lambda, coeffs)
    }

    /// Refit on a new interval at the same degree (must lie inside the padded interval).
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<ChebSeries> {
        compose_refit(&[self], lo, hi, self.degree().max(1))
    }
}

impl fmt::Display for ChebSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChebSeries[{}, {}; degree {}]", self.lo, self.hi, self.degree())
    }
}

/// Fits the composition `chain[n-1] o ... o chain[0]` on `[lo, hi]`.
pub fn compose_refit(chain: &[&dyn RealMap], lo: f64, hi: f64, degree: usize) -> Result<ChebSeries> {
    let composite = TryMap(|x: f64| {
        let mut v = x;
        for (link, map) in chain.iter().enumerate() {
            let out = map
                .apply(v)
                .map_err(|_| Error::CompositionDomain { link, node: x, value: v })?;
            if !out.is_finite() {
                return Err(Error::CompositionDomain { link, node: x, value: v });
            }
            v = out;
        }
        Ok(v)
    });
    ChebSeries::fit_map(&composite, lo, hi, degree)
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    lo: String,
    hi: String,
    coeffs: Vec<String>,
}

fn clenshaw_complex(coeffs: &[f64], t: Complex64) -> Complex64 {
    let two_t = 2.0 * t;
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for &c in coeffs[1..].iter().rev() {
        let b0 = two_t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + coeffs[0]
}

/// Shortest round-trip decimal form, with an exponent for very large or small magnitudes.
pub fn decimal(x: f64) -> String {
    format!("{x:?}")
}

fn parse_decimal<E: de::Error>(s: &str) -> std::result::Result<f64, E> {
    s.parse::<f64>().map_err(|e| E::custom(format!("bad decimal {s:?}: {e}")))
}

impl Serialize for ChebSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            lo: decimal(self.lo),
            hi: decimal(self.hi),
            coeffs: self.coeffs.iter().map(|&c| decimal(c)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChebSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SeriesRepr::deserialize(d)?;
        let lo = parse_decimal(&r.lo)?;
        let hi = parse_decimal(&r.hi)?;
        let coeffs = r.coeffs.iter().map(|c| parse_decimal(c)).collect::<std::result::Result<Vec<_>, _>>()?;
        ChebSeries::new(lo, hi, coeffs).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_sin(x: f64) -> f64 {
        // alternating series, plenty of terms for |x| <= 1
        let mut term = x;
        let mut sum = x;
        for n in 1..30 {
            term *= -x * x / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
        }
        sum
    }

    fn taylor_exp(z: Complex64) -> Complex64 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..60 {
            term = term * z / n as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn fit_square_gives_t0_t2() {
        let s = ChebSeries::fit(|x| x * x, -1.0, 1.0, 4).unwrap();
        let expect = [0.5, 0.0, 0.5, 0.0, 0.0];
        for (c, e) in s.coeffs().iter().zip(expect) {
            assert!((c - e).abs() < 1e-15, "{:?}", s.coeffs());
        }
        assert!((s.eval(0.5).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn fit_affine_is_exact() {
        let s = ChebSeries::fit(|x| x, 0.0, 2.0, 1).unwrap();
        for i in 0..=100 {
            let x = 2.0 * i as f64 / 100.0;
            assert!((s.eval(x).unwrap() - x).abs() < 1e-15);
        }
    }

    #[test]
    fn runge_tail_resolved_at_degree_80() {
        let f = |x: f64| 1.0 / (1.0 + 25.0 * x * x);
        let s = ChebSeries::fit(f, -1.0, 1.0, 80).unwrap();
        assert!(s.tail() < 1e-6, "tail {}", s.tail());
        // dense direct evaluation
        let err = (0..=2000)
            .map(|i| -1.0 + 2.0 * i as f64 / 2000.0)
            .map(|x| (s.eval(x).unwrap() - f(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "err {err}");
    }

    #[test]
    fn endpoints_are_nodes() {
        let f = |x: f64| (3.0 * x).exp() - x;
        let s = ChebSeries::fit(f, -0.3, 1.7, 40).unwrap();
        assert!((s.eval(-0.3).unwrap() - f(-0.3)).abs() < 1e-13 * f(-0.3).abs().max(1.0));
        assert!((s.eval(1.7).unwrap() - f(1.7)).abs() < 1e-12 * f(1.7).abs());
    }

    #[test]
    fn sin_matches_taylor_oracle() {
        let s = ChebSeries::fit(f64::sin, 0.0, 1.0, 30).unwrap();
        assert!((s.eval(0.3).unwrap() - taylor_sin(0.3)).abs() < 1e-13);
    }

    #[test]
    fn errors_on_bad_input() {
        assert!(matches!(ChebSeries::fit(|x| x, 1.0, 1.0, 4), Err(Error::Domain { .. })));
        assert!(matches!(ChebSeries::fit(|x| 1.0 / x, 0.0, 1.0, 4), Err(Error::Fit { .. })));
        let s = ChebSeries::fit(|x| x, 0.0, 1.0, 2).unwrap();
        assert!(s.eval(1.049).is_ok());
        assert!(matches!(s.eval(1.06), Err(Error::Extrapolation { .. })));
        assert!(s.eval(f64::NAN).is_err());
    }

    #[test]
    fn complex_evaluation() {
        let sq = ChebSeries::fit(|x| x * x, -1.0, 1.0, 4).unwrap();
        let v = sq.eval_complex(Complex64::new(0.0, 1.0)).unwrap();
        assert!((v.value - Complex64::new(-1.0, 0.0)).norm() < 1e-12);

        let e = ChebSeries::fit(f64::exp, -1.0, 1.0, 30).unwrap();
        let z = Complex64::new(0.5, 0.5);
        let v = e.eval_complex(z).unwrap();
        assert!((v.value - taylor_exp(z)).norm() < 1e-10);
        assert!((v.value - taylor_exp(z)).norm() <= v.error && v.error < 1e-8);

        for i in 0..=50 {
            let x = -1.0 + i as f64 / 25.0;
            let c = e.eval_complex(Complex64::new(x, 0.0)).unwrap().value;
            assert!((c.re - e.eval(x).unwrap()).abs() < 1e-13 && c.im == 0.0);
        }
    }

    #[test]
    fn complex_evaluation_rejects_far_points() {
        let f = ChebSeries::fit(|x| 1.0 / (x - 2.0), -1.0, 1.0, 64).unwrap();
        // pole at 2 has ellipse parameter 2 + sqrt(3)
        assert!(f.eval_complex(Complex64::new(0.0, 0.3)).is_ok());
        assert!(matches!(
            f.eval_complex(Complex64::new(0.0, 3.0)),
            Err(Error::AnalyticDomain { .. })
        ));
    }

    #[test]
    fn derivative_of_t2_and_constant() {
        let t2 = ChebSeries::new(-1.0, 1.0, vec![0.0, 0.0, 1.0]).unwrap();
        let d = t2.derivative();
        assert!((d.eval(0.7).unwrap() - 2.8).abs() < 1e-15);
        assert_eq!(d.coeffs(), &[0.0, 4.0]);
        let c = ChebSeries::constant(0.0, 3.0, 2.5).unwrap().derivative();
        assert_eq!(c.coeffs(), &[0.0]);
    }

    #[test]
    fn derivative_matches_cos_and_finite_differences() {
        let s = ChebSeries::fit(f64::sin, 0.0, 1.0, 30).unwrap();
        let d = s.derivative().eval(0.3).unwrap();
        assert!((d - 0.3f64.cos()).abs() < 1e-10);
        let h = 1e-5;
        let fd = (s.eval(0.3 + h).unwrap() - s.eval(0.3 - h).unwrap()) / (2.0 * h);
        assert!((d - fd).abs() < 1e-9);
    }

    #[test]
    fn compose_refit_examples() {
        let plus_one = |x: f64| x + 1.0;
        let double = |x: f64| 2.0 * x;
        let s = compose_refit(&[&plus_one, &double], 0.0, 1.0, 3).unwrap();
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert!((s.eval(x).unwrap() - (2.0 * x + 2.0)).abs() < 1e-15);
        }
        let id = |x: f64| x;
        let s = compose_refit(&[&id], -2.0, 3.0, 7).unwrap();
        assert!((s.eval(1.234).unwrap() - 1.234).abs() < 1e-15);

        let sin = |x: f64| x.sin();
        let s = compose_refit(&[&sin, &sin], 0.0, 1.0, 40).unwrap();
        assert!((s.eval(0.3).unwrap() - 0.3f64.sin().sin()).abs() < 1e-12);
    }

    #[test]
    fn compose_refit_reports_escaping_link() {
        let inner = ChebSeries::fit(|x| x, 0.0, 1.0, 2).unwrap();
        let grow = |x: f64| 3.0 * x;
        let err = compose_refit(&[&grow, &inner], 0.0, 1.0, 4).unwrap_err();
        match err {
            Error::CompositionDomain { link, value, .. } => {
                assert_eq!(link, 1);
                assert!(value > 1.05);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn decay_rate_examples() {
        let geometric: Vec<f64> = (0..=40).map(|k| 3f64.powi(-k)).collect();
        let s = ChebSeries::new(-1.0, 1.0, geometric).unwrap();
        let d = s.decay_rate().unwrap();
        assert!((d.rate - 3.0).abs() < 0.05 && !d.sentinel);

        let mut poly = vec![1.0, -0.5, 0.25, 2.0];
        poly.resize(20, 0.0);
        let d = ChebSeries::new(-1.0, 1.0, poly).unwrap().decay_rate().unwrap();
        assert!(d.sentinel && d.rate.is_infinite());

        let zero = ChebSeries::new(0.0, 1.0, vec![0.0; 12]).unwrap().decay_rate().unwrap();
        assert!(zero.sentinel);

        let pole = ChebSeries::fit(|x| 1.0 / (x - 2.0), -1.0, 1.0, 64).unwrap();
        let rho = 2.0 + 3f64.sqrt();
        let d = pole.decay_rate().unwrap();
        assert!((d.rate - rho).abs() < 0.05 * rho, "{}", d.rate);

        let low = ChebSeries::fit(|x| x, 0.0, 1.0, 4).unwrap();
        assert!(matches!(low.decay_rate(), Err(Error::Degree(4))));
    }

    #[test]
    fn linear_precomposition_is_exact() {
        let f = |x: f64| (x + 0.3).exp() * x;
        let s = ChebSeries::fit(f, -0.5, 1.5, 40).unwrap();
        for lambda in [2.0, 0.37, -0.8, -3.0] {
            let g = s.precompose_linear(lambda).unwrap();
            assert!(g.lo() < g.hi());
            for i in 0..=20 {
                let y = -0.5 + 2.0 * i as f64 / 20.0;
                let x = y / lambda;
                assert!((g.eval(x).unwrap() - s.eval(y).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let s = ChebSeries::fit(|x| (1.0 + x).ln(), 0.1, 0.9, 25).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: ChebSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["lo"].is_string() && v["coeffs"][0].is_string());
    }
}
