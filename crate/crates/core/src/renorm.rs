//! Heights and the renormalization operator.
//!
//! For a pair `(eta, xi)` with `a = eta(0) < 0 < b = xi(0)` the height is
//! `h = max{r : eta^r(b) > 0}`. With `L(x) = a x` (orientation reversing),
//!
//! ```text
//! R eta = L^{-1} o eta^h o xi o L    on [0, 1]
//! R xi  = L^{-1} o eta o L           on [R eta(0), 0]
//! ```
//!
//! so `R xi(0) = 1` and the image is normalized. On translation pairs with
//! `eta(x) = x - s` this is the Gauss map `s -> 1/s - floor(1/s)`.

use serde::{Deserialize, Serialize};

use crate::chebapprox::{TryMap, DEFAULT_DEGREE};
use crate::circle_maps::DEFAULT_N_MAX;
use crate::error::{Error, Result};
use crate::pairs::{padded_domains, CommutingPair, CriticalMap, CubicMap};

/// Orbit length cap in binary64.
pub const MAX_ORBIT_STEPS: usize = 12;

/// Orbit length cap for an extended-precision build.
pub const MAX_ORBIT_STEPS_EXTENDED: usize = 30;

/// Residual above which an orbit is considered lost in rounding noise.
pub const NOISE_FLOOR_RESIDUAL: f64 = 1e-6;

/// Coefficient decay below which the analytic margin has collapsed.
pub const MIN_DECAY: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormOptions {
    pub degree: usize,
    pub n_max: usize,
}

impl Default for RenormOptions {
    fn default() -> Self {
        RenormOptions { degree: DEFAULT_DEGREE, n_max: DEFAULT_N_MAX }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormStep {
    pub height: usize,
    /// Rescaling factor `eta(0)` of the input pair.
    pub scale: f64,
    pub residual_after: f64,
    pub decay_after: f64,
    pub eta0_after: f64,
}

const ZERO_LANDING: &str = "eta^r(xi(0)) landed exactly on 0";

/// `max{r >= 0 : eta^r(xi(0)) > 0}`; must be at least 1.
pub fn height(p: &CommutingPair, n_max: usize) -> Result<usize> {
    let mut x = p.b();
    for r in 0..=n_max {
        let y = p.eta.eval(x)?;
        if y == 0.0 {
            return Err(Error::NotRenormalizable(ZERO_LANDING.into()));
        }
        if y < 0.0 {
            if r == 0 {
                return Err(Error::NotRenormalizable(format!("eta(xi(0)) = {y} <= 0")));
            }
            return Ok(r);
        }
        x = y;
    }
    Err(Error::UnboundedType(n_max))
}

fn eta_power(eta: &CriticalMap, h: usize, x: f64) -> Result<f64> {
    (0..h).try_fold(x, |v, _| eta.eval(v))
}

pub fn renormalize(p: &CommutingPair) -> Result<(CommutingPair, RenormStep)> {
    renormalize_with(p, &RenormOptions::default())
}

pub fn renormalize_with(p: &CommutingPair, opts: &RenormOptions) -> Result<(CommutingPair, RenormStep)> {
    let h = height(p, opts.n_max)?;
    let (a, b) = (p.a(), p.b());
    let mut out = if p.is_affine() {
        let s = -a;
        CommutingPair::affine(-(b / s - h as f64), 1.0)?
    } else {
        renormalize_cubic(p, h, a, b, opts.degree)?
    };
    out.meta = p.meta.clone();
    out.meta.heights.push(h as u32);
    out.normalized = true;
    let report = out.validate();
    if !report.is_valid() {
        return Err(Error::Validation(format!("{report:?}")));
    }
    let step = RenormStep {
        height: h,
        scale: a,
        residual_after: report.residual,
        decay_after: out.decay(),
        eta0_after: out.a(),
    };
    Ok((out, step))
}

fn renormalize_cubic(p: &CommutingPair, h: usize, a: f64, b: f64, degree: usize) -> Result<CommutingPair> {
    let (eta, xi) = match (p.eta.as_cubic(), p.xi.as_cubic()) {
        (Some(e), Some(x)) => (e, x),
        _ => return Err(Error::InvalidPair("mixed affine and cubic branches".into())),
    };
    let new_a = eta_power(&p.eta, h, b)? / a;
    let (eta_dom, xi_dom) = padded_domains(new_a, 1.0);

    // L^{-1} eta^h xi L: the critical factor comes from xi, eta^h joins the outer diffeomorphism
    let eta_inner = TryMap(|x: f64| xi.inner.eval(a * x).map(|v| -v));
    let eta_outer = TryMap(|y: f64| {
        let v = xi.outer.eval(-y)?;
        Ok(eta_power(&p.eta, h, v)? / a)
    });
    let new_eta = CubicMap::fit(&eta_inner, &eta_outer, eta_dom, 1.0, degree)?;

    let xi_inner = TryMap(|x: f64| eta.inner.eval(a * x).map(|v| -v));
    let xi_outer = TryMap(|y: f64| Ok(eta.outer.eval(-y)? / a));
    let new_xi = CubicMap::fit(&xi_inner, &xi_outer, xi_dom, new_a, degree)?;

    let mut out = CommutingPair::cubic(new_eta, new_xi, p.meta.clone())?;
    out.pin_unit_xi();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    StepCap { cap: usize },
    RationalExhaustion,
    NoiseFloor { residual: f64 },
    DecayCollapse { decay: f64 },
    Error { kind: String, message: String },
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::Completed => "completed",
            StopReason::StepCap { .. } => "step_cap",
            StopReason::RationalExhaustion => "rational_exhaustion",
            StopReason::NoiseFloor { .. } => "noise_floor",
            StopReason::DecayCollapse { .. } => "decay_collapse",
            StopReason::Error { .. } => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    pub renorm: RenormOptions,
    pub max_steps: usize,
    pub noise_floor: f64,
    pub min_decay: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            renorm: RenormOptions::default(),
            max_steps: MAX_ORBIT_STEPS,
            noise_floor: NOISE_FLOOR_RESIDUAL,
            min_decay: MIN_DECAY,
        }
    }
}

/// `pairs[0]` is the initial pair and `pairs[k + 1] = R pairs[k]` with `steps[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    pub pairs: Vec<CommutingPair>,
    pub steps: Vec<RenormStep>,
    pub stop: StopReason,
}

impl OrbitRecord {
    pub fn heights(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.height).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

pub fn renorm_orbit(p: &CommutingPair, n: usize, opts: &OrbitOptions) -> OrbitRecord {
    let mut pairs = vec![p.clone()];
    let mut steps = Vec::new();
    let target = n.min(opts.max_steps);
    let mut stop = StopReason::Completed;
    for _ in 0..target {
        let current = pairs.last().expect("orbit starts with a pair");
        match renormalize_with(current, &opts.renorm) {
            Ok((next, step)) => {
                if step.residual_after > opts.noise_floor {
                    stop = StopReason::NoiseFloor { residual: step.residual_after };
                    break;
                }
                if step.decay_after < opts.min_decay {
                    stop = StopReason::DecayCollapse { decay: step.decay_after };
                    break;
                }
                pairs.push(next);
                steps.push(step);
            }
            Err(Error::NotRenormalizable(msg)) if msg == ZERO_LANDING => {
                stop = StopReason::RationalExhaustion;
                break;
            }
            Err(e) => {
                stop = StopReason::Error { kind: e.kind().into(), message: e.to_string() };
                break;
            }
        }
    }
    if stop == StopReason::Completed && n > opts.max_steps {
        stop = StopReason::StepCap { cap: opts.max_steps };
    }
    OrbitRecord { pairs, steps, stop }
}

/// `|eta_k(0)|` along the orbit.
pub fn scaling_ratios(rec: &OrbitRecord) -> Result<Vec<f64>> {
    if rec.pairs.len() < 2 {
        return Err(Error::InvalidPair(format!("orbit of length {} has no ratios", rec.pairs.len())));
    }
    Ok(rec.pairs.iter().map(|p| p.a().abs()).collect())
}
