//! Distances between normalized pairs, contraction fits and the experiment suite.
//!
//! All metrics compare `eta` on `[0, 1]` and `xi` on `[max(a_p, a_q), 0]`,
//! sampled on Chebyshev-Lobatto grids. Derivatives and complex values come
//! from refit branch series, so `dist_ck` and `dist_analytic` see exactly the
//! same functions as `dist_c0`.

use std::f64::consts::PI;
use std::thread;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chebapprox::{lobatto_nodes, ChebSeries, DEFAULT_DEGREE};
use crate::circle_maps::{
    extract_affine_pair, extract_pair, return_offsets, tune_omega, CircleLift, ExtractOptions, RigidRotation,
    DEFAULT_N_MAX,
};
use crate::combinatorics::{CfWord, SymbolWord};
use crate::error::{Error, Result};
use crate::pairs::CommutingPair;
use crate::renorm::{renorm_orbit, OrbitOptions, OrbitRecord, RenormOptions, StopReason, MAX_ORBIT_STEPS};

/// Grid size shared by all sampled metrics.
pub const DEFAULT_GRID: usize = 257;

pub const DEFAULT_ELLIPSE: f64 = 1.15;

/// Sample points per branch on the Bernstein ellipse.
pub const ELLIPSE_SAMPLES: usize = 64;

/// Highest derivative order supported by [`dist_ck`].
pub const MAX_ORDER: usize = 3;

/// Minimum fit quality for a contraction rate to be reported.
pub const MIN_R2: f64 = 0.9;

/// Golden-mean rotation number, the rigid scaling baseline.
pub const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn require_normalized(p: &CommutingPair) -> Result<()> {
    if !p.normalized {
        return Err(Error::Normalization(p.b()));
    }
    Ok(())
}

/// Branch series of two pairs over their common domains.
struct Sampled {
    eta: [ChebSeries; 2],
    xi: [ChebSeries; 2],
}

impl Sampled {
    fn new(p: &CommutingPair, q: &CommutingPair, degree: usize) -> Result<Self> {
        require_normalized(p)?;
        require_normalized(q)?;
        let a = p.a().max(q.a());
        let (ep, xp) = p.branch_series(a, degree)?;
        let (eq, xq) = q.branch_series(a, degree)?;
        Ok(Sampled { eta: [ep, eq], xi: [xp, xq] })
    }

    fn branches(&self) -> [&[ChebSeries; 2]; 2] {
        [&self.eta, &self.xi]
    }

    fn dist_ck(&self, k: usize, grid: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for [f, g] in self.branches() {
            let nodes = lobatto_nodes(f.lo(), f.hi(), grid.max(2) - 1);
            let (mut df, mut dg) = (f.clone(), g.clone());
            for order in 0..=k {
                if order > 0 {
                    df = df.derivative();
                    dg = dg.derivative();
                }
                for &x in &nodes {
                    worst = worst.max((df.eval(x)? - dg.eval(x)?).abs());
                }
            }
        }
        Ok(worst)
    }

    fn dist_analytic(&self, ellipse: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for [f, g] in self.branches() {
            for s in [f, g] {
                let certified = s.certified_parameter();
                if !(ellipse < certified) {
                    return Err(Error::AnalyticDomain { re: s.lo(), im: 0.0, rho: ellipse, certified });
                }
            }
            let (mid, half) = (0.5 * (f.lo() + f.hi()), 0.5 * (f.hi() - f.lo()));
            for j in 0..ELLIPSE_SAMPLES {
                let w = Complex64::from_polar(ellipse, 2.0 * PI * j as f64 / ELLIPSE_SAMPLES as f64);
                let t = 0.5 * (w + 1.0 / w);
                let z = mid + half * t;
                let d = f.eval_complex(z)?.value - g.eval_complex(z)?.value;
                worst = worst.max(d.norm());
            }
        }
        Ok(worst)
    }
}

/// Sup distance of both branches on the default grid.
pub fn dist_c0(p: &CommutingPair, q: &CommutingPair) -> Result<f64> {
    dist_ck(p, q, 0)
}

/// Largest difference of derivatives of order `0..=k` on the default grid.
pub fn dist_ck(p: &CommutingPair, q: &CommutingPair, k: usize) -> Result<f64> {
    if k > MAX_ORDER {
        return Err(Error::Degree(k));
    }
    Sampled::new(p, q, DEFAULT_DEGREE)?.dist_ck(k, DEFAULT_GRID)
}

/// Largest modulus difference over the Bernstein ellipse `ellipse` of each branch interval.
pub fn dist_analytic(p: &CommutingPair, q: &CommutingPair, ellipse: f64) -> Result<f64> {
    if !(ellipse > 1.0) {
        return Err(Error::AnalyticDomain { re: 0.0, im: 0.0, rho: ellipse, certified: f64::NAN });
    }
    Sampled::new(p, q, DEFAULT_DEGREE)?.dist_analytic(ellipse)
}

/// Least-squares fit `d_n ~ C lambda^n` over the positive entries, returning `(lambda, r2)`.
pub fn fit_contraction_rate(d: &[f64]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = d
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(n, &v)| (n as f64, v.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Regression(format!("{} positive entries, need at least 4", pts.len())));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy <= 1e-300 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Ok((slope.exp(), r2))
}

/// Knobs shared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tune_tol: f64,
    pub degree: usize,
    pub n_max: usize,
    pub grid: usize,
    pub ellipse: f64,
    pub max_steps: usize,
    /// Added to each tuned `omega`; nonzero only in noise-injection runs.
    pub perturbation: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tune_tol: 1e-11,
            degree: DEFAULT_DEGREE,
            n_max: DEFAULT_N_MAX,
            grid: DEFAULT_GRID,
            ellipse: DEFAULT_ELLIPSE,
            max_steps: MAX_ORBIT_STEPS,
            perturbation: 0.0,
        }
    }
}

impl Settings {
    pub fn orbit_options(&self) -> OrbitOptions {
        OrbitOptions {
            renorm: RenormOptions { degree: self.degree, n_max: self.n_max },
            max_steps: self.max_steps,
            ..OrbitOptions::default()
        }
    }

    pub fn extract_options(&self) -> ExtractOptions {
        ExtractOptions { degree: self.degree, n_max: self.n_max }
    }
}

/// A lift tuned to a target together with its extracted pair's orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRun {
    pub c: f64,
    pub omega: f64,
    pub bisections: usize,
    pub orbit: OrbitRecord,
}

impl FamilyRun {
    pub fn lift(&self) -> CircleLift {
        CircleLift { omega: self.omega, c: self.c }
    }
}

pub fn family_run(c: f64, word: &CfWord, steps: usize, settings: &Settings) -> Result<FamilyRun> {
    let tuned = tune_omega(c, word, settings.tune_tol)?;
    let omega = tuned.omega + settings.perturbation;
    let lift = CircleLift::new(omega, c)?;
    let pair = extract_pair(&lift, &settings.extract_options())?;
    let orbit = renorm_orbit(&pair, steps, &settings.orbit_options());
    Ok(FamilyRun { c, omega, bisections: tuned.bisections, orbit })
}

fn family_runs(cs: [f64; 2], word: &CfWord, steps: usize, settings: &Settings) -> Result<[FamilyRun; 2]> {
    let [ra, rb] = thread::scope(|s| {
        let ha = s.spawn(|| family_run(cs[0], word, steps, settings));
        let rb = family_run(cs[1], word, steps, settings);
        [ha.join().expect("family worker panicked"), rb]
    });
    Ok([ra?, rb?])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDistances {
    pub k: usize,
    pub c0: f64,
    pub c3: f64,
    /// `None` where the ellipse is not certified for one of the branches.
    pub analytic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub steps: Vec<StepDistances>,
    pub heights_a: Vec<usize>,
    pub heights_b: Vec<usize>,
    /// Present only when the fit has `r2 >= 0.9`.
    pub lambda: Option<f64>,
    pub r2: Option<f64>,
    pub stop_a: StopReason,
    pub stop_b: StopReason,
}

impl ConvergenceReport {
    pub fn c0(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.c0).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalityReport {
    pub runs: [FamilyRun; 2],
    pub report: ConvergenceReport,
}

pub fn step_distances(p: &CommutingPair, q: &CommutingPair, k: usize, settings: &Settings) -> Result<StepDistances> {
    let s = Sampled::new(p, q, settings.degree)?;
    Ok(StepDistances {
        k,
        c0: s.dist_ck(0, settings.grid)?,
        c3: s.dist_ck(MAX_ORDER, settings.grid)?,
        analytic: s.dist_analytic(settings.ellipse).ok(),
    })
}

/// `(lambda, r2)` over steps `2..`, with `lambda` withheld below [`MIN_R2`].
fn contraction_of(c0: &[f64]) -> (Option<f64>, Option<f64>) {
    match fit_contraction_rate(c0.get(2..).unwrap_or(&[])) {
        Ok((l, r2)) => ((r2 >= MIN_R2).then_some(l), Some(r2)),
        Err(_) => (None, None),
    }
}

/// Two families tuned to the same target; distances between their orbits step by step.
pub fn universality_experiment(
    c_a: f64,
    c_b: f64,
    word: &CfWord,
    steps: usize,
    settings: &Settings,
) -> Result<UniversalityReport> {
    let runs = family_runs([c_a, c_b], word, steps, settings)?;
    let (pa, pb) = (&runs[0].orbit.pairs, &runs[1].orbit.pairs);
    let dists = thread::scope(|s| {
        let handles: Vec<_> = pa
            .iter()
            .zip(pb)
            .enumerate()
            .map(|(k, (p, q))| s.spawn(move || step_distances(p, q, k, settings)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("metric worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    let c0: Vec<f64> = dists.iter().map(|d| d.c0).collect();
    let (lambda, r2) = contraction_of(&c0);
    let report = ConvergenceReport {
        steps: dists,
        heights_a: runs[0].orbit.heights(),
        heights_b: runs[1].orbit.heights(),
        lambda,
        r2,
        stop_a: runs[0].orbit.stop.clone(),
        stop_b: runs[1].orbit.stop.clone(),
    };
    Ok(UniversalityReport { runs, report })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftReport {
    pub word: SymbolWord,
    /// Tuning target; its period is `word` rotated right by one, absorbing the extraction shift.
    pub target: CfWord,
    pub run: FamilyRun,
    pub expected_heights: Vec<usize>,
    pub heights_match: bool,
    /// `d_c0(zeta_k, zeta_{k+p})` for `p = |word|`.
    pub periodic_distances: Vec<f64>,
}

/// Runs the orbit realizing a periodic symbol word as its height sequence.
pub fn shift_experiment(c: f64, word: &SymbolWord, steps: usize, settings: &Settings) -> Result<ShiftReport> {
    let p = word.len();
    let target = CfWord::periodic(word.rotated(p - 1).symbols().to_vec());
    let run = family_run(c, &target, steps, settings)?;
    let heights = run.orbit.heights();
    let expected: Vec<usize> = (0..heights.len()).map(|k| word.symbols()[k % p] as usize).collect();
    let pairs = &run.orbit.pairs;
    let periodic_distances = (0..pairs.len().saturating_sub(p))
        .map(|k| {
            let s = Sampled::new(&pairs[k], &pairs[k + p], settings.degree)?;
            s.dist_ck(0, settings.grid)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShiftReport {
        word: word.clone(),
        target,
        heights_match: heights == expected,
        expected_heights: expected,
        run,
        periodic_distances,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub c: [f64; 2],
    pub omega: [f64; 2],
    /// `|eta_k(0)|` along each orbit.
    pub eta0: [Vec<f64>; 2],
    pub limits: [f64; 2],
    pub common_limit: f64,
    /// `|F^{q_{k+1}}(0) - p_{k+1}| / |F^{q_k}(0) - p_k|` for the first family's tuned lift.
    pub direct_ratios: Vec<f64>,
    pub direct_limit: f64,
    pub rigid_baseline: f64,
    pub stops: [StopReason; 2],
}

/// Closest returns used by the direct ratio oracle.
pub const DIRECT_DEPTH: usize = 24;

/// Mean of the last two entries; the orbits approach their limit from alternating sides.
fn tail_limit(v: &[f64]) -> f64 {
    match v {
        [.., x, y] => 0.5 * (x + y),
        [x] => *x,
        [] => f64::NAN,
    }
}

/// Scaling of the golden-mean renormalization orbit for two families against two oracles.
pub fn scaling_study(c_a: f64, c_b: f64, steps: usize, settings: &Settings) -> Result<ScalingReport> {
    let word = CfWord::periodic(vec![1]);
    let runs = family_runs([c_a, c_b], &word, steps, settings)?;
    let eta0 = [0, 1].map(|i| runs[i].orbit.pairs.iter().map(|p| p.a().abs()).collect::<Vec<_>>());
    let limits = [tail_limit(&eta0[0]), tail_limit(&eta0[1])];

    let offsets = return_offsets(&runs[0].lift(), &word, DIRECT_DEPTH)?;
    let direct_ratios: Vec<f64> = offsets.windows(2).skip(1).map(|w| (w[1] / w[0]).abs()).collect();

    let rigid = extract_affine_pair(&RigidRotation { theta: GOLDEN }, &settings.extract_options())?;
    let rigid_orbit = renorm_orbit(&rigid, 4, &settings.orbit_options());
    let rigid_baseline = tail_limit(&rigid_orbit.pairs.iter().map(|p| p.a().abs()).collect::<Vec<_>>());

    Ok(ScalingReport {
        c: [c_a, c_b],
        omega: [runs[0].omega, runs[1].omega],
        common_limit: 0.5 * (limits[0] + limits[1]),
        limits,
        direct_limit: tail_limit(&direct_ratios),
        direct_ratios,
        rigid_baseline,
        stops: [runs[0].orbit.stop.clone(), runs[1].orbit.stop.clone()],
        eta0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine(s: f64) -> CommutingPair {
        CommutingPair::translation(s).unwrap()
    }

    #[test]
    fn affine_distances() {
        let (p, q) = (affine(0.4), affine(0.5));
        assert!((dist_c0(&p, &q).unwrap() - 0.1).abs() < 1e-14);
        assert!((dist_ck(&p, &q, 3).unwrap() - 0.1).abs() < 1e-14);
        assert!((dist_analytic(&p, &q, 1.2).unwrap() - 0.1).abs() < 1e-13);
        assert_eq!(dist_c0(&p, &p).unwrap(), 0.0);
        assert_eq!(dist_ck(&p, &p, 3).unwrap(), 0.0);
        assert_eq!(dist_analytic(&p, &p, 1.2).unwrap(), 0.0);
    }

    #[test]
    fn metric_errors() {
        let raw = CommutingPair::affine(-0.8, 2.0).unwrap();
        assert!(matches!(dist_c0(&raw, &affine(0.4)), Err(Error::Normalization(_))));
        assert!(matches!(dist_ck(&affine(0.4), &affine(0.5), 4), Err(Error::Degree(4))));
    }

    #[test]
    fn contraction_fits() {
        let d: Vec<f64> = (0..10).map(|n| 0.5f64.powi(n)).collect();
        let (l, r2) = fit_contraction_rate(&d).unwrap();
        assert!((l - 0.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        let (l, r2) = fit_contraction_rate(&[2.0; 6]).unwrap();
        assert!((l - 1.0).abs() < 1e-15 && r2 == 1.0);
        assert!(fit_contraction_rate(&[1.0, 0.0, -1.0, 0.5, 0.2]).is_err());
    }

    #[test]
    fn tail_limit_averages_last_pair() {
        assert_eq!(tail_limit(&[1.0, 2.0, 4.0]), 3.0);
        assert_eq!(tail_limit(&[1.0]), 1.0);
        assert!(tail_limit(&[]).is_nan());
    }
}
