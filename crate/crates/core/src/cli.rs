//! Configuration and the experiment runner behind `renorm-lab`.
//!
//! Every run collects its artifacts in memory, writes them under the output
//! directory and reports a SHA-256 over their names and contents. Timestamps
//! only go to `run.log`, so reruns of a config produce identical artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    scaling_study, shift_experiment, step_distances, universality_experiment, Settings, DEFAULT_ELLIPSE, DEFAULT_GRID,
};
use crate::chebapprox::{decimal, DEFAULT_DEGREE};
use crate::circle_maps::{extract_pair, rotation_number, tune_omega, CircleLift, DEFAULT_N_MAX};
use crate::combinatorics::{CfWord, SymbolWord};
use crate::error::{Error, Result};
use crate::pairs::CommutingPair;
use crate::renorm::{renorm_orbit, OrbitRecord, MAX_ORBIT_STEPS, MAX_ORBIT_STEPS_EXTENDED};

/// Exit code for any failed run.
pub const FAILURE_EXIT: u8 = 2;

/// Fewest sample points accepted for a distance grid.
pub const MIN_GRID: usize = 33;

pub const DEFAULT_OUT: &str = "renorm-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

impl Precision {
    pub fn label(self) -> &'static str {
        match self {
            Precision::Double => "double",
            Precision::Extended => "extended",
        }
    }

    pub fn step_cap(self) -> usize {
        match self {
            Precision::Double => MAX_ORBIT_STEPS,
            Precision::Extended => MAX_ORBIT_STEPS_EXTENDED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub c: f64,
    pub c_prime: f64,
    pub cf: String,
    /// Symbol word for `shift-demo`, e.g. `"1,2"`.
    pub word: Option<String>,
    pub steps: usize,
    pub tune_tol: f64,
    pub degree: usize,
    pub n_max: usize,
    pub grid: usize,
    pub ellipse: f64,
    pub precision: Precision,
    pub pair: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Amplitude of the seeded perturbation of `omega`.
    pub noise: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            c: 0.0,
            c_prime: 0.5,
            cf: "(1)".into(),
            word: None,
            steps: 8,
            tune_tol: 1e-11,
            degree: DEFAULT_DEGREE,
            n_max: DEFAULT_N_MAX,
            grid: DEFAULT_GRID,
            ellipse: DEFAULT_ELLIPSE,
            precision: Precision::Double,
            pair: None,
            out: None,
            noise: 1e-13,
        }
    }
}

fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| l.trim_start().strip_prefix(key).is_some_and(|r| r.trim_start().starts_with('=')))
        .map(|i| i + 1)
}

/// Parses and validates a TOML config; errors name the offending line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate().map_err(|(key, e)| {
        let msg = match e {
            Error::Config(m) => m,
            other => other.to_string(),
        };
        match line_of(text, key) {
            Some(n) => Error::Config(format!("line {n}: {msg}")),
            None => Error::Config(msg),
        }
    })?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Checks invariants, returning the offending key on failure.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, Error)> {
        let cfg_err = |key: &'static str, msg: String| (key, Error::Config(format!("{key}: {msg}")));
        for (key, v) in [("tune_tol", self.tune_tol), ("noise", self.noise)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(cfg_err(key, format!("tolerance {v} must be positive")));
            }
        }
        if self.tune_tol < 1e-11 {
            return Err(cfg_err("tune_tol", format!("{} is below the tuning floor 1e-11", self.tune_tol)));
        }
        if !(self.ellipse > 1.0) {
            return Err(cfg_err("ellipse", format!("parameter {} must exceed 1", self.ellipse)));
        }
        if self.degree < 8 {
            return Err(cfg_err("degree", format!("{} is below the minimum 8", self.degree)));
        }
        if self.grid < MIN_GRID {
            return Err(cfg_err("grid", format!("{} points are fewer than {MIN_GRID}", self.grid)));
        }
        for (key, c) in [("c", self.c), ("c_prime", self.c_prime)] {
            if !(c > -0.9 && c < 0.9) {
                return Err(cfg_err(key, format!("family parameter {c} outside (-0.9, 0.9)")));
            }
        }
        let cap = self.precision.step_cap();
        if self.steps > cap {
            return Err(cfg_err(
                "steps",
                format!("{} exceeds the cap {cap} for {} precision", self.steps, self.precision.label()),
            ));
        }
        self.cf_word().map_err(|e| ("cf", e))?;
        self.symbol_word().map_err(|e| ("word", e))?;
        Ok(())
    }

    pub fn cf_word(&self) -> Result<CfWord> {
        let w: CfWord = self.cf.parse()?;
        w.check(self.n_max as u32)?;
        Ok(w)
    }

    pub fn symbol_word(&self) -> Result<Option<SymbolWord>> {
        let Some(text) = &self.word else { return Ok(None) };
        let symbols = text
            .split(',')
            .map(|s| s.trim().parse::<u32>().map_err(|e| Error::Alphabet(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        SymbolWord::new(symbols, self.n_max as u32).map(Some)
    }

    pub fn settings(&self) -> Settings {
        Settings {
            tune_tol: self.tune_tol,
            degree: self.degree,
            n_max: self.n_max,
            grid: self.grid,
            ellipse: self.ellipse,
            max_steps: self.precision.step_cap(),
            perturbation: 0.0,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "renorm-lab", version, about = "Renormalization experiments on critical commuting pairs")]
pub struct Cli {
    /// TOML experiment config; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, or a `.csv` path for `renorm-orbit`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub precision: Option<Precision>,
    /// Seed for the omega perturbation used by noise-injection runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tune omega so the lift has the target rotation number.
    Tune(Overrides),
    /// Tune, then extract the normalized commuting pair.
    ExtractPair(Overrides),
    /// Renormalization orbit of a stored or freshly extracted pair.
    RenormOrbit(Overrides),
    /// Orbits of two families with the same target and their distances.
    Universality(Overrides),
    /// Orbit whose heights realize a periodic symbol word.
    ShiftDemo(Overrides),
    /// Scaling ratios of golden orbits against direct and rigid oracles.
    Scaling(Overrides),
    /// Validate a stored pair.
    ValidatePair(Overrides),
}

impl Command {
    fn parts(&self) -> (&'static str, &Overrides) {
        match self {
            Command::Tune(o) => ("tune", o),
            Command::ExtractPair(o) => ("extract-pair", o),
            Command::RenormOrbit(o) => ("renorm-orbit", o),
            Command::Universality(o) => ("universality", o),
            Command::ShiftDemo(o) => ("shift-demo", o),
            Command::Scaling(o) => ("scaling", o),
            Command::ValidatePair(o) => ("validate-pair", o),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c_prime: Option<f64>,
    /// Continued fraction target, e.g. "(1)" or "(1,2)".
    #[arg(long)]
    pub cf: Option<String>,
    /// Symbol word for shift-demo, e.g. "1,2".
    #[arg(long)]
    pub word: Option<String>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub degree: Option<usize>,
    /// Pair JSON for renorm-orbit and validate-pair.
    #[arg(long)]
    pub pair: Option<PathBuf>,
}

/// Artifacts of one run, keyed by relative path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), body.into());
    }

    fn add_json(&mut self, name: &str, v: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    /// SHA-256 over `name NUL contents NUL` in name order.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for (name, body) in &self.files {
            h.update(name.as_bytes());
            h.update([0]);
            h.update(body);
            h.update([0]);
        }
        h.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (name, body) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, body)?;
        }
        Ok(())
    }
}

fn num(x: f64) -> Value {
    Value::String(decimal(x))
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub command: String,
    pub config: ExperimentConfig,
    pub seed: Option<u64>,
    /// Explicit CSV target for `renorm-orbit`.
    pub csv_path: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Job {
    pub fn from_cli(cli: &Cli) -> Result<Job> {
        let (command, o) = cli.command.parts();
        let (mut cfg, text) = match &cli.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                (parse_config(&text)?, Some(text))
            }
            None => (ExperimentConfig::default(), None),
        };
        if let Some(c) = cfg.command.as_deref().filter(|c| *c != command) {
            return Err(Error::Config(format!("config is for `{c}`, not `{command}`")));
        }
        if let Some(v) = o.c {
            cfg.c = v;
        }
        if let Some(v) = o.c_prime {
            cfg.c_prime = v;
        }
        if let Some(v) = &o.cf {
            cfg.cf = v.clone();
        }
        if let Some(v) = &o.word {
            cfg.word = Some(v.clone());
        }
        if let Some(v) = o.steps {
            cfg.steps = v;
        }
        if let Some(v) = o.tol {
            cfg.tune_tol = v;
        }
        if let Some(v) = o.degree {
            cfg.degree = v;
        }
        if let Some(v) = &o.pair {
            cfg.pair = Some(v.clone());
        }
        if let Some(p) = cli.precision {
            cfg.precision = p;
        }
        if let Some(p) = &cli.out {
            cfg.out = Some(p.clone());
        }
        cfg.validate().map_err(|(key, e)| match text.as_deref().and_then(|t| line_of(t, key)) {
            Some(n) => Error::Config(format!("line {n}: {e}")),
            None => e,
        })?;
        let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let is_csv = out.extension().is_some_and(|e| e == "csv");
        let (csv_path, out_dir) = if is_csv && command == "renorm-orbit" {
            let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
            (Some(out), dir)
        } else {
            (None, out)
        };
        Ok(Job { command: command.into(), config: cfg, seed: cli.seed, csv_path, out_dir })
    }

    fn settings(&self) -> Settings {
        let mut s = self.config.settings();
        if let Some(seed) = self.seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            s.perturbation = rng.random_range(-self.config.noise..=self.config.noise);
        }
        s
    }

    /// Computes all artifacts without touching the disk.
    pub fn execute(&self) -> Result<Artifacts> {
        if self.config.precision == Precision::Extended {
            return Err(Error::Config("extended precision is not available in this binary64 build".into()));
        }
        let settings = self.settings();
        let cfg = &self.config;
        let mut art = Artifacts::default();
        match self.command.as_str() {
            "tune" => {
                let word = cfg.cf_word()?;
                let t = tune_omega(cfg.c, &word, cfg.tune_tol)?;
                let omega = t.omega + settings.perturbation;
                let rho = rotation_number(&CircleLift::new(omega, cfg.c)?, cfg.tune_tol)?;
                art.add_json(
                    "tune.json",
                    &json!({
                        "c": num(cfg.c),
                        "cf": word.to_string(),
                        "target": num(word.value()?),
                        "omega": num(omega),
                        "bisections": t.bisections,
                        "rho_check": num(rho),
                    }),
                )?;
            }
            "extract-pair" => {
                let pair = self.tuned_pair(&settings)?;
                art.add("pair.json", pair.to_json()? + "\n");
                art.add_json("validation.json", &validation_json(&pair))?;
            }
            "renorm-orbit" => {
                let pair = match &cfg.pair {
                    Some(path) => load_pair(path)?,
                    None => self.tuned_pair(&settings)?,
                };
                let rec = renorm_orbit(&pair, cfg.steps, &settings.orbit_options());
                let (csv, c0) = orbit_csv(&rec, &settings)?;
                let csv_name = self
                    .csv_path
                    .as_ref()
                    .and_then(|p| p.file_name())
                    .map_or("orbit.csv".to_string(), |n| n.to_string_lossy().into_owned());
                art.add(csv_name, csv);
                add_pairs(&mut art, "pairs", &rec)?;
                let fit = crate::analysis::fit_contraction_rate(&c0[1..]).ok();
                art.add_json(
                    "summary.json",
                    &json!({
                        "command": "renorm-orbit",
                        "lambda": opt_num(fit.map(|f| f.0)),
                        "r2": opt_num(fit.map(|f| f.1)),
                        "stop_reason": rec.stop.label(),
                        "heights": rec.heights(),
                        "limits": { "eta0": num(rec.pairs.last().map_or(f64::NAN, |p| p.a())) },
                    }),
                )?;
            }
            "universality" => {
                let word = cfg.cf_word()?;
                let u = universality_experiment(cfg.c, cfg.c_prime, &word, cfg.steps, &settings)?;
                for (name, run) in [("a", &u.runs[0]), ("b", &u.runs[1])] {
                    art.add(format!("orbit_{name}.csv"), orbit_csv(&run.orbit, &settings)?.0);
                    add_pairs(&mut art, &format!("pairs_{name}"), &run.orbit)?;
                }
                let mut csv = String::from("k,d_c0,d_c3,d_analytic\n");
                for d in &u.report.steps {
                    let an = d.analytic.map_or(String::new(), decimal);
                    let _ = writeln!(csv, "{},{},{},{}", d.k, decimal(d.c0), decimal(d.c3), an);
                }
                art.add("distances.csv", csv);
                let last = u.report.steps.last();
                art.add_json(
                    "summary.json",
                    &json!({
                        "command": "universality",
                        "c": [num(cfg.c), num(cfg.c_prime)],
                        "cf": word.to_string(),
                        "omega": [num(u.runs[0].omega), num(u.runs[1].omega)],
                        "lambda": opt_num(u.report.lambda),
                        "r2": opt_num(u.report.r2),
                        "stop_reason": { "a": u.report.stop_a.label(), "b": u.report.stop_b.label() },
                        "limits": {
                            "d_c0": opt_num(last.map(|d| d.c0)),
                            "d_c3": opt_num(last.map(|d| d.c3)),
                            "d_analytic": opt_num(last.and_then(|d| d.analytic)),
                        },
                    }),
                )?;
            }
            "shift-demo" => {
                let word = cfg
                    .symbol_word()?
                    .ok_or_else(|| Error::Config("shift-demo needs a symbol word (key `word`)".into()))?;
                let r = shift_experiment(cfg.c, &word, cfg.steps, &settings)?;
                art.add("orbit.csv", orbit_csv(&r.run.orbit, &settings)?.0);
                let mut csv = String::from("k,d_c0_period\n");
                for (k, d) in r.periodic_distances.iter().enumerate() {
                    let _ = writeln!(csv, "{k},{}", decimal(*d));
                }
                art.add("periodic.csv", csv);
                let fit = crate::analysis::fit_contraction_rate(&r.periodic_distances).ok();
                art.add_json(
                    "summary.json",
                    &json!({
                        "command": "shift-demo",
                        "word": word.symbols(),
                        "target": r.target.to_string(),
                        "omega": num(r.run.omega),
                        "heights": r.run.orbit.heights(),
                        "heights_match": r.heights_match,
                        "lambda": opt_num(fit.map(|f| f.0)),
                        "r2": opt_num(fit.map(|f| f.1)),
                        "stop_reason": r.run.orbit.stop.label(),
                        "limits": { "d_c0_period": opt_num(r.periodic_distances.last().copied()) },
                    }),
                )?;
            }
            "scaling" => {
                let s = scaling_study(cfg.c, cfg.c_prime, cfg.steps, &settings)?;
                let mut csv = String::from("k,eta0_a,eta0_b,direct_ratio\n");
                let n = s.eta0[0].len().max(s.eta0[1].len()).max(s.direct_ratios.len());
                let cell = |v: &[f64], k: usize| v.get(k).map_or(String::new(), |x| decimal(*x));
                for k in 0..n {
                    let _ = writeln!(
                        csv,
                        "{k},{},{},{}",
                        cell(&s.eta0[0], k),
                        cell(&s.eta0[1], k),
                        cell(&s.direct_ratios, k)
                    );
                }
                art.add("scaling.csv", csv);
                art.add_json(
                    "summary.json",
                    &json!({
                        "command": "scaling",
                        "c": [num(s.c[0]), num(s.c[1])],
                        "omega": [num(s.omega[0]), num(s.omega[1])],
                        "lambda": Value::Null,
                        "r2": Value::Null,
                        "stop_reason": { "a": s.stops[0].label(), "b": s.stops[1].label() },
                        "limits": {
                            "a": num(s.limits[0]),
                            "b": num(s.limits[1]),
                            "common": num(s.common_limit),
                            "direct": num(s.direct_limit),
                            "rigid": num(s.rigid_baseline),
                        },
                    }),
                )?;
            }
            "validate-pair" => {
                let path = cfg.pair.as_ref().ok_or_else(|| Error::Config("validate-pair needs --pair".into()))?;
                let pair = load_pair(path)?;
                let report = pair.validate();
                art.add_json("validation.json", &validation_json(&pair))?;
                if !report.is_valid() {
                    art.write_to(&self.out_dir)?;
                    return Err(Error::Validation(format!("{report:?}")));
                }
            }
            other => return Err(Error::Config(format!("unknown command {other}"))),
        }
        Ok(art)
    }

    fn tuned_pair(&self, settings: &Settings) -> Result<CommutingPair> {
        let word = self.config.cf_word()?;
        let t = tune_omega(self.config.c, &word, settings.tune_tol)?;
        let lift = CircleLift::new(t.omega + settings.perturbation, self.config.c)?;
        extract_pair(&lift, &settings.extract_options())
    }
}

fn load_pair(path: &Path) -> Result<CommutingPair> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    CommutingPair::from_json(&text)
}

fn validation_json(p: &CommutingPair) -> Value {
    let r = p.validate();
    json!({
        "valid": r.is_valid(),
        "residual": num(r.residual),
        "monotone_ok": r.monotone_ok,
        "critical_ok": r.critical_ok,
        "structure_ok": r.structure_ok,
        "decay": num(p.decay()),
        "a": num(p.a()),
        "b": num(p.b()),
    })
}

fn add_pairs(art: &mut Artifacts, dir: &str, rec: &OrbitRecord) -> Result<()> {
    for (k, p) in rec.pairs.iter().enumerate() {
        art.add(format!("{dir}/zeta_{k:02}.json"), p.to_json()? + "\n");
    }
    Ok(())
}

/// One row per stored pair: `k, height, eta0, residual, decay, d_c0_prev, d_c3_prev`.
///
/// `height` is the height of `zeta_k` (blank for the last pair), the
/// distances compare `zeta_k` with `zeta_{k-1}`. Also returns the `d_c0_prev`
/// column with `NaN` in row 0.
pub fn orbit_csv(rec: &OrbitRecord, settings: &Settings) -> Result<(String, Vec<f64>)> {
    let mut csv = String::from("k,height,eta0,residual,decay,d_c0_prev,d_c3_prev\n");
    let mut c0 = Vec::with_capacity(rec.pairs.len());
    for (k, p) in rec.pairs.iter().enumerate() {
        let height = rec.steps.get(k).map_or(String::new(), |s| s.height.to_string());
        let residual = match rec.steps.get(k.wrapping_sub(1)) {
            Some(s) if k > 0 => s.residual_after,
            _ => p.commutation_residual()?,
        };
        let (d0, d3) = if k == 0 {
            (String::new(), String::new())
        } else {
            let d = step_distances(&rec.pairs[k - 1], p, k, settings)?;
            c0.push(d.c0);
            (decimal(d.c0), decimal(d.c3))
        };
        if k == 0 {
            c0.push(f64::NAN);
        }
        let _ = writeln!(csv, "{k},{height},{},{},{},{d0},{d3}", decimal(p.a()), decimal(residual), decimal(p.decay()));
    }
    Ok((csv, c0))
}

/// Machine-readable error record.
pub fn error_json(e: &Error) -> Value {
    json!({ "error": e.kind(), "message": e.to_string() })
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Runs a job end to end: artifacts, `run.log`, hash on stdout.
pub fn run(job: &Job) -> Result<String> {
    let art = job.execute()?;
    art.write_to(&job.out_dir)?;
    if let Some(csv) = &job.csv_path {
        let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if let Some(body) = art.files.get(&name) {
            fs::write(csv, body)?;
        }
    }
    let hash = art.content_hash();
    let log = format!(
        "timestamp={}\ncommand={}\nseed={}\nfiles={}\nsha256={hash}\n",
        timestamp(),
        job.command,
        job.seed.map_or("none".into(), |s| s.to_string()),
        art.files.len(),
    );
    fs::write(job.out_dir.join("run.log"), log)?;
    Ok(hash)
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(FAILURE_EXIT) } else { ExitCode::SUCCESS };
        }
    };
    let result = Job::from_cli(&cli).inspect_err(|e| {
        if let Some(dir) = cli.out.as_ref().filter(|p| p.extension().is_none_or(|e| e != "csv")) {
            if fs::create_dir_all(dir).is_ok() {
                let _ = fs::write(dir.join("error.json"), error_json(e).to_string() + "\n");
            }
        }
    });
    let result = result.and_then(|job| {
        fs::create_dir_all(&job.out_dir)?;
        match run(&job) {
            Ok(hash) => Ok((job, hash)),
            Err(e) => {
                let _ = fs::write(job.out_dir.join("error.json"), error_json(&e).to_string() + "\n");
                Err(e)
            }
        }
    });
    match result {
        Ok((job, hash)) => {
            println!("{}", json!({ "command": job.command, "out": job.out_dir.display().to_string(), "sha256": hash }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(FAILURE_EXIT)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("cf = \"(1)\"\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn config_errors_carry_lines() {
        let e = parse_config("steps = 4\ncf = \"(0,2)\"\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_config("steps = 50\n").unwrap_err();
        assert!(e.to_string().contains("line 1") && e.to_string().contains("double precision"), "{e}");
        assert!(parse_config("steps = 20\nprecision = \"extended\"\n").is_ok());
        let e = parse_config("bogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        assert!(parse_config("cf = \"1,2\"\n").is_err());
    }

    #[test]
    fn symbol_words_parse() {
        let cfg = ExperimentConfig { word: Some("1, 2".into()), ..Default::default() };
        assert_eq!(cfg.symbol_word().unwrap().unwrap().symbols(), &[1, 2]);
        let bad = ExperimentConfig { word: Some("0,2".into()), ..Default::default() };
        assert!(matches!(bad.symbol_word(), Err(Error::Alphabet(_))));
    }

    #[test]
    fn hash_depends_on_names_and_contents() {
        let mut a = Artifacts::default();
        a.add("x", "1");
        let mut b = Artifacts::default();
        b.add("y", "1");
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash(), a.clone().content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }
}
