//! Monte Carlo harness: replicated BEKK scenarios, the `(a, b)` grid, and
//! CSV output.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::bekk::{simulate, BekkParams, ReturnsPanel, SimConfig};
use crate::error::{Error, Result};
use crate::garch::{fit_garch_pooled, GarchOptions};
use crate::io::{fmt_f64, write_spectrum_csv};
use crate::linalg::{eig_sym, SymMatrix};
use crate::metrics::{eig_rms_distance, frobenius_error, EsdSample};
use crate::mplaw::{forward_esd, DiscreteSpectrum, MpModel, QuestOptions};
use crate::rng::{stream, Purpose};
use crate::shrinkage::{nls_estimate, TruncationRule};
use crate::tvadjust::{default_mp, tv_adjust, TvAdjPanel, TvAdjustConfig};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "BEKKSHRINK_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagRule {
    Auto,
    Fixed(usize),
}

impl LagRule {
    pub fn resolve(&self, p: usize) -> usize {
        match *self {
            LagRule::Auto => default_mp(p),
            LagRule::Fixed(m) => m,
        }
    }
}

/// Where the first `M_p` lags of the adjustment come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagSource {
    /// The process returns just before the panel (kept from the burn-in).
    Presample,
    /// The first `M_p` panel returns, which are then left out of `S̃_n`.
    DropPrefix,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub p: usize,
    pub n: usize,
    pub rho: f64,
    pub a: f64,
    pub b: f64,
    pub replications: usize,
    pub seed: u64,
    pub m_p: LagRule,
    pub lag_source: LagSource,
    pub pool_k: usize,
    pub use_true_ab: bool,
    pub truncation: TruncationRule,
    pub burn_in: usize,
    pub garch: GarchOptions,
    pub quest: QuestOptions,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            p: 100,
            n: 125,
            rho: 0.4,
            a: 0.05,
            b: 0.9,
            replications: 100,
            seed: 20240601,
            m_p: LagRule::Auto,
            lag_source: LagSource::DropPrefix,
            pool_k: 10,
            use_true_ab: false,
            truncation: TruncationRule::Auto,
            burn_in: 1000,
            garch: GarchOptions::default(),
            quest: QuestOptions::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::InvalidParameter(format!("bad value {value:?} for {key}"))),
    }
}

impl ScenarioConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "p" => self.p = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "rho" => self.rho = parse(key, value)?,
            "a" => self.a = parse(key, value)?,
            "b" => self.b = parse(key, value)?,
            "replications" => self.replications = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "mp" => {
                self.m_p = if value == "auto" {
                    LagRule::Auto
                } else {
                    LagRule::Fixed(parse(key, value)?)
                }
            }
            "lags" => {
                self.lag_source = match value {
                    "presample" => LagSource::Presample,
                    "drop" => LagSource::DropPrefix,
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "lags must be presample or drop, got {value:?}"
                        )))
                    }
                }
            }
            "pool_k" => self.pool_k = parse(key, value)?,
            "use_true_ab" => self.use_true_ab = parse_bool(key, value)?,
            "truncation" => {
                self.truncation = if value == "auto" {
                    TruncationRule::Auto
                } else {
                    TruncationRule::Explicit(parse(key, value)?)
                }
            }
            "burn_in" => self.burn_in = parse(key, value)?,
            "garch_delta" => self.garch.delta = parse(key, value)?,
            "garch_cap" => {
                self.garch.cap_c = if value == "auto" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "quest_atoms" => {
                self.quest.atoms = if value == "auto" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "quest_free_weights" => self.quest.free_weights = parse_bool(key, value)?,
            other => return Err(Error::InvalidParameter(format!("unknown setting {other:?}"))),
        }
        Ok(())
    }

    /// Reads `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected key=value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 4 || self.n < 20 {
            return Err(Error::InvalidParameter(format!(
                "need p >= 4 and n >= 20, got p={} n={}",
                self.p, self.n
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho must lie in (-1, 1), got {}",
                self.rho
            )));
        }
        if self.pool_k == 0 || self.pool_k > self.p {
            return Err(Error::InvalidParameter(format!("pool_k must be in 1..={}", self.p)));
        }
        BekkParams::new(self.a, self.b, SymMatrix::identity(1)).map(|_| ())
    }

    pub fn scenario_id(&self) -> String {
        format!("p{}_n{}_a{}_b{}", self.p, self.n, self.a, self.b)
    }

    pub fn sigma_bar(&self) -> SymMatrix {
        SymMatrix::toeplitz(self.p, self.rho)
    }

    pub fn concentration(&self) -> f64 {
        self.p as f64 / self.n as f64
    }
}

/// Per-replication metrics. Eigenvalue distances are root-mean-square over
/// the `p` rank-matched eigenvalues; Frobenius errors are not normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub scenario: String,
    pub replication: u64,
    pub seed: u64,
    pub m_p: usize,
    pub a_hat: f64,
    pub b_hat: f64,
    pub raw_eig_dist: f64,
    pub tv_eig_dist: f64,
    pub raw_spec_err: f64,
    pub tv_spec_err: f64,
    pub raw_nls_frob: f64,
    pub tv_nls_frob: f64,
}

/// Stage timings in seconds, kept apart from the records so record files
/// stay reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes {
    pub simulate: f64,
    pub garch: f64,
    pub adjust: f64,
    pub shrink: f64,
}

pub const RECORD_HEADER: [&str; 12] = [
    "scenario",
    "replication",
    "seed",
    "m_p",
    "a_hat",
    "b_hat",
    "raw_eig_dist",
    "tv_eig_dist",
    "raw_spec_err",
    "tv_spec_err",
    "raw_nls_frob",
    "tv_nls_frob",
];

impl ReplicationRecord {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.replication.to_string(),
            self.seed.to_string(),
            self.m_p.to_string(),
            fmt_f64(self.a_hat),
            fmt_f64(self.b_hat),
            fmt_f64(self.raw_eig_dist),
            fmt_f64(self.tv_eig_dist),
            fmt_f64(self.raw_spec_err),
            fmt_f64(self.tv_spec_err),
            fmt_f64(self.raw_nls_frob),
            fmt_f64(self.tv_nls_frob),
        ]
    }

    pub fn metrics(&self) -> [f64; 6] {
        [
            self.raw_eig_dist,
            self.tv_eig_dist,
            self.raw_spec_err,
            self.tv_spec_err,
            self.raw_nls_frob,
            self.tv_nls_frob,
        ]
    }
}

/// Everything one replication produces before it is reduced to metrics.
#[derive(Debug, Clone)]
pub struct ReplicationOutput {
    pub panel: ReturnsPanel,
    pub raw: SymMatrix,
    pub iid: SymMatrix,
    pub adjusted: TvAdjPanel,
    pub a_hat: f64,
    pub b_hat: f64,
    pub m_p: usize,
}

/// Shared per-scenario inputs.
struct Context {
    params: BekkParams,
    truth: EsdSample,
}

impl Context {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let sigma = cfg.sigma_bar();
        let truth = EsdSample::of(&sigma)?;
        Ok(Self {
            params: BekkParams::new(cfg.a, cfg.b, sigma)?,
            truth,
        })
    }
}

fn simulate_and_adjust(
    cfg: &ScenarioConfig,
    ctx: &Context,
    replication: u64,
    times: &mut StageTimes,
) -> Result<ReplicationOutput> {
    let m_p = cfg.m_p.resolve(cfg.p);
    let clock = Instant::now();
    let mut sim = SimConfig::new(cfg.seed, cfg.n);
    sim.replication = replication;
    sim.burn_in = cfg.burn_in;
    sim.emit_paired_iid = true;
    if cfg.lag_source == LagSource::Presample {
        sim.presample = m_p.min(cfg.burn_in);
    }
    let panel = simulate(&ctx.params, &sim)?;
    let raw = SymMatrix::sample_covariance(&panel.returns)?;
    let iid = SymMatrix::sample_covariance(panel.paired_iid.as_ref().expect("paired panel requested"))?;
    times.simulate = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let (a_hat, b_hat) = if cfg.use_true_ab {
        (cfg.a, cfg.b)
    } else {
        let mut rng = stream(cfg.seed, replication, Purpose::Pooling);
        let fit = fit_garch_pooled(&panel, cfg.pool_k, &cfg.garch, &mut rng)?;
        (fit.a_hat, fit.b_hat)
    };
    times.garch = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let adjusted = tv_adjust(&panel, &TvAdjustConfig::new(m_p, a_hat, b_hat)?)?;
    times.adjust = clock.elapsed().as_secs_f64();
    Ok(ReplicationOutput {
        panel,
        raw,
        iid,
        adjusted,
        a_hat,
        b_hat,
        m_p,
    })
}

fn run_one(cfg: &ScenarioConfig, ctx: &Context, replication: u64) -> Result<(ReplicationRecord, StageTimes)> {
    let mut times = StageTimes::default();
    let out = simulate_and_adjust(cfg, ctx, replication, &mut times)?;
    let raw_esd = EsdSample::of(&out.raw)?;
    let tv_esd = EsdSample::of(&out.adjusted.covariance)?;
    let iid_esd = EsdSample::of(&out.iid)?;

    let clock = Instant::now();
    let sigma = &ctx.params.sigma_bar;
    let raw_nls = nls_estimate(&out.raw, cfg.concentration(), cfg.truncation, &cfg.quest)?;
    let y_tv = cfg.p as f64 / out.adjusted.effective_n() as f64;
    let tv_nls = nls_estimate(&out.adjusted.covariance, y_tv, cfg.truncation, &cfg.quest)?;
    // equal atoms merge in the spectrum, so expand back to p quantiles
    let spec_err = |est: &crate::shrinkage::NlsEstimate| -> Result<f64> {
        eig_rms_distance(&EsdSample::new(est.spectrum.midpoint_quantiles(cfg.p))?, &ctx.truth)
    };
    let record = ReplicationRecord {
        scenario: cfg.scenario_id(),
        replication,
        seed: cfg.seed,
        m_p: out.m_p,
        a_hat: out.a_hat,
        b_hat: out.b_hat,
        raw_eig_dist: eig_rms_distance(&raw_esd, &iid_esd)?,
        tv_eig_dist: eig_rms_distance(&tv_esd, &iid_esd)?,
        raw_spec_err: spec_err(&raw_nls)?,
        tv_spec_err: spec_err(&tv_nls)?,
        raw_nls_frob: frobenius_error(&raw_nls.shrinkage.estimate, sigma)?,
        tv_nls_frob: frobenius_error(&tv_nls.shrinkage.estimate, sigma)?,
    };
    times.shrink = clock.elapsed().as_secs_f64();
    Ok((record, times))
}

/// Simulation, GARCH fit and adjustment for one replication, without the
/// shrinkage stage.
pub fn replicate(cfg: &ScenarioConfig, replication: u64) -> Result<ReplicationOutput> {
    let ctx = Context::new(cfg)?;
    simulate_and_adjust(cfg, &ctx, replication, &mut StageTimes::default())
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&w| w > 0)
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub records: Vec<ReplicationRecord>,
    pub times: Vec<StageTimes>,
    /// `(replication, message)` for replications that failed.
    pub failures: Vec<(u64, String)>,
}

/// Runs every replication on a pool of `workers` threads (default: the
/// environment setting, else rayon's default). Records come back in
/// replication order; the run fails if more than 5% of replications fail.
pub fn run_scenario(cfg: &ScenarioConfig, workers: Option<usize>) -> Result<ScenarioRun> {
    let ctx = Context::new(cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers.or_else(workers_from_env) {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<(ReplicationRecord, StageTimes)>> = pool.install(|| {
        (0..cfg.replications as u64)
            .into_par_iter()
            .map(|r| run_one(cfg, &ctx, r))
            .collect()
    });
    let mut run = ScenarioRun {
        records: Vec::new(),
        times: Vec::new(),
        failures: Vec::new(),
    };
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok((rec, t)) => {
                run.records.push(rec);
                run.times.push(t);
            }
            Err(e) => run.failures.push((r as u64, e.to_string())),
        }
    }
    if run.failures.len() * 20 > cfg.replications {
        return Err(Error::InvalidParameter(format!(
            "{} of {} replications failed; first: {}",
            run.failures.len(),
            cfg.replications,
            run.failures[0].1
        )));
    }
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            sd: var.sqrt(),
            se: (var / n).sqrt(),
        }
    }
}

pub const METRIC_NAMES: [&str; 6] = [
    "raw_eig_dist",
    "tv_eig_dist",
    "raw_spec_err",
    "tv_spec_err",
    "raw_nls_frob",
    "tv_nls_frob",
];

/// Mean, sd and se of each metric, in [`METRIC_NAMES`] order.
pub fn summarize(records: &[ReplicationRecord]) -> [Moments; 6] {
    std::array::from_fn(|k| Moments::of(&records.iter().map(|r| r.metrics()[k]).collect::<Vec<_>>()))
}

pub fn records_csv(records: &[ReplicationRecord]) -> String {
    let mut out = RECORD_HEADER.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&r.fields().join(","));
        out.push('\n');
    }
    out
}

pub fn summary_csv(cfg: &ScenarioConfig, records: &[ReplicationRecord]) -> String {
    let mut out = String::from("scenario,metric,mean,sd,se,replications\n");
    for (name, m) in METRIC_NAMES.iter().zip(summarize(records)) {
        let _ = writeln!(
            out,
            "{},{name},{},{},{},{}",
            cfg.scenario_id(),
            fmt_f64(m.mean),
            fmt_f64(m.sd),
            fmt_f64(m.se),
            records.len()
        );
    }
    out
}

pub fn times_csv(run: &ScenarioRun) -> String {
    let mut out = String::from("replication,simulate_s,garch_s,adjust_s,shrink_s\n");
    for (r, t) in run.records.iter().zip(&run.times) {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6}",
            r.replication, t.simulate, t.garch, t.adjust, t.shrink
        );
    }
    out
}

/// Writes `records.csv`, `summary.csv` and `timings.csv` under `dir`.
pub fn write_scenario(dir: &Path, cfg: &ScenarioConfig, run: &ScenarioRun) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("records.csv"), records_csv(&run.records))?;
    std::fs::write(dir.join("summary.csv"), summary_csv(cfg, &run.records))?;
    std::fs::write(dir.join("timings.csv"), times_csv(run))?;
    Ok(())
}

/// `(a, b)` points on a lattice of the given step over
/// `0.05 <= a <= 0.5`, `0.05 <= b <= 0.9`, `a + b <= 0.95`.
pub fn grid_points(step: f64) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0) || step > 0.45 {
        return Err(Error::InvalidParameter(format!(
            "grid step must be in (0, 0.45], got {step}"
        )));
    }
    let ka = ((0.5 - 0.05) / step).round() as usize;
    let kb = ((0.9 - 0.05) / step).round() as usize;
    if ((0.45 / step) - ka as f64).abs() > 1e-9 || ((0.85 / step) - kb as f64).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "grid step {step} does not divide the region"
        )));
    }
    let mut pts = Vec::new();
    for i in 0..=ka {
        for j in 0..=kb {
            // keep the lattice values exact to the printed precision
            let a = ((0.05 + i as f64 * step) * 1e10).round() / 1e10;
            let b = ((0.05 + j as f64 * step) * 1e10).round() / 1e10;
            if a + b <= 0.95 + 1e-12 {
                pts.push((a, b));
            }
        }
    }
    Ok(pts)
}

#[derive(Debug, Clone)]
pub struct GridRow {
    pub a: f64,
    pub b: f64,
    pub means: [f64; 6],
    pub failures: usize,
}

pub fn run_grid(base: &ScenarioConfig, points: &[(f64, f64)], workers: Option<usize>) -> Result<Vec<GridRow>> {
    points
        .iter()
        .map(|&(a, b)| {
            let cfg = ScenarioConfig { a, b, ..base.clone() };
            let run = run_scenario(&cfg, workers)?;
            Ok(GridRow {
                a,
                b,
                means: summarize(&run.records).map(|m| m.mean),
                failures: run.failures.len(),
            })
        })
        .collect()
}

pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut out = String::from("a,b");
    for name in METRIC_NAMES {
        let _ = write!(out, ",{name}");
    }
    out.push_str(",failures\n");
    for r in rows {
        let _ = write!(out, "{},{}", fmt_f64(r.a), fmt_f64(r.b));
        for m in r.means {
            let _ = write!(out, ",{}", fmt_f64(m));
        }
        let _ = writeln!(out, ",{}", r.failures);
    }
    out
}

/// Writes sorted eigenvalues of `S_n`, `S̃_n` and `S⁰_n` (`esd.csv`, `p`
/// rows) and the discretized limiting law of the true spectrum at the
/// adjusted concentration (`mp_reference.csv`).
pub fn emit_esd_dump(dir: &Path, out: &ReplicationOutput, truth: &SymMatrix, grid_size: usize) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let raw = eig_sym(&out.raw)?.ascending();
    let tv = eig_sym(&out.adjusted.covariance)?.ascending();
    let iid = eig_sym(&out.iid)?.ascending();
    let mut text = String::from("index,raw,tv_adjusted,iid\n");
    for i in 0..raw.len() {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            i + 1,
            fmt_f64(raw[i]),
            fmt_f64(tv[i]),
            fmt_f64(iid[i])
        );
    }
    std::fs::write(dir.join("esd.csv"), text)?;
    let h = DiscreteSpectrum::from_samples(&eig_sym(truth)?.ascending())?;
    let y = out.panel.p() as f64 / out.adjusted.effective_n() as f64;
    let reference = forward_esd(&MpModel::new(y, h)?, grid_size)?;
    write_spectrum_csv(&dir.join("mp_reference.csv"), &reference)
}
