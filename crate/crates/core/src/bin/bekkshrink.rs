use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bekkshrink::bekk::{simulate, BekkParams, ReturnsPanel, SimConfig};
use bekkshrink::error::{Error, Result};
use bekkshrink::experiments::{
    emit_esd_dump, grid_csv, grid_points, replicate, run_grid, run_scenario, summarize, write_scenario, LagSource,
    ScenarioConfig, METRIC_NAMES,
};
use bekkshrink::garch::{fit_garch, fit_garch_pooled, GarchFit};
use bekkshrink::io;
use bekkshrink::linalg::SymMatrix;
use bekkshrink::rng::{stream, Purpose};
use bekkshrink::shrinkage::nls_estimate;
use bekkshrink::tvadjust::{tv_adjust, TvAdjustConfig};

#[derive(Parser)]
#[command(
    name = "bekkshrink",
    version,
    about = "Covariance and spectrum estimation under scalar-BEKK volatility"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key=value settings file, applied before flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra key=value setting (repeatable), applied after the file
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Output directory
    #[arg(long, default_value = "out", global = true)]
    out: PathBuf,
    /// Worker threads (default: BEKKSHRINK_WORKERS, else all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    p: Option<usize>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    rho: Option<f64>,
    #[arg(long, global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    b: Option<f64>,
    #[arg(long, global = true)]
    replications: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of lags in the adjustment: an integer or "auto"
    #[arg(long, global = true)]
    mp: Option<String>,
    /// Adjust with the simulation's (a, b) instead of the pooled fit
    #[arg(long, global = true)]
    use_true_ab: bool,
    /// Coordinates in the pooled GARCH fit
    #[arg(long, global = true)]
    pool_k: Option<usize>,
    /// GARCH feasibility margin δ
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// GARCH variance cap C (default 10 × sample variance)
    #[arg(long, global = true)]
    cap_c: Option<f64>,
    /// Eigenvalue cap before inversion: a number or "auto"
    #[arg(long, global = true)]
    truncation: Option<String>,
    /// Source of the first lags: "drop" (panel prefix) or "presample"
    #[arg(long, global = true)]
    lags: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one BEKK panel with its paired i.i.d. panel
    Simulate {
        #[arg(long, default_value_t = 0)]
        rep: u64,
        /// Also write the panels as CSV
        #[arg(long)]
        csv: bool,
    },
    /// Fit GARCH(1,1) to one coordinate or pooled over k coordinates
    FitGarch {
        #[command(flatten)]
        input: PanelInput,
        /// Fit this coordinate only
        #[arg(long)]
        coord: Option<usize>,
    },
    /// Write the raw and time-variation adjusted sample covariances
    TvAdjust {
        #[command(flatten)]
        input: PanelInput,
        /// Use this (â, b̂) instead of fitting
        #[arg(long, num_args = 2, value_names = ["A_HAT", "B_HAT"])]
        ab: Option<Vec<f64>>,
    },
    /// Nonlinear shrinkage and spectrum estimate from a covariance matrix
    Estimate {
        /// Symmetric matrix CSV
        #[arg(long)]
        cov: PathBuf,
        /// Sample size behind the matrix (y = p / n)
        #[arg(long = "obs")]
        obs: usize,
    },
    /// Replicated Monte Carlo run of one (a, b) setting
    Scenario,
    /// Scenario means over the (a, b) grid
    Grid {
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Restrict to these points, e.g. "0.15:0.25,0.05:0.9"
        #[arg(long)]
        points: Option<String>,
    },
    /// Sorted eigenvalues of one replication plus the limiting law
    EsdDump {
        #[arg(long, default_value_t = 0)]
        rep: u64,
        #[arg(long, default_value_t = 400)]
        grid_size: usize,
    },
}

#[derive(Args)]
struct PanelInput {
    /// Panel file (.bin or .csv); simulated from the settings if absent
    #[arg(long)]
    panel: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    rep: u64,
}

fn scenario_config(c: &Common) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    if let Some(path) = &c.config {
        cfg.apply_kv(&std::fs::read_to_string(path)?)?;
    }
    for kv in &c.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    let numeric: [(&str, Option<String>); 10] = [
        ("p", c.p.map(|v| v.to_string())),
        ("n", c.n.map(|v| v.to_string())),
        ("rho", c.rho.map(|v| v.to_string())),
        ("a", c.a.map(|v| v.to_string())),
        ("b", c.b.map(|v| v.to_string())),
        ("replications", c.replications.map(|v| v.to_string())),
        ("seed", c.seed.map(|v| v.to_string())),
        ("pool_k", c.pool_k.map(|v| v.to_string())),
        ("garch_delta", c.delta.map(|v| v.to_string())),
        ("garch_cap", c.cap_c.map(|v| v.to_string())),
    ];
    for (k, v) in numeric {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    for (k, v) in [("mp", &c.mp), ("truncation", &c.truncation), ("lags", &c.lags)] {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    if c.use_true_ab {
        cfg.use_true_ab = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulated_panel(cfg: &ScenarioConfig, rep: u64) -> Result<ReturnsPanel> {
    let params = BekkParams::new(cfg.a, cfg.b, cfg.sigma_bar())?;
    let mut sim = SimConfig::new(cfg.seed, cfg.n);
    sim.replication = rep;
    sim.burn_in = cfg.burn_in;
    sim.emit_paired_iid = true;
    if cfg.lag_source == LagSource::Presample {
        sim.presample = cfg.m_p.resolve(cfg.p).min(cfg.burn_in);
    }
    simulate(&params, &sim)
}

fn load_panel(cfg: &ScenarioConfig, input: &PanelInput) -> Result<ReturnsPanel> {
    match &input.panel {
        None => simulated_panel(cfg, input.rep),
        Some(path) if path.extension().is_some_and(|e| e == "csv") => io::read_panel_csv(path),
        Some(path) => io::read_panel_bin(path),
    }
}

fn pooled_fit(cfg: &ScenarioConfig, panel: &ReturnsPanel) -> Result<GarchFit> {
    let mut rng = stream(panel.seed, panel.replication, Purpose::Pooling);
    fit_garch_pooled(panel, cfg.pool_k.min(panel.p()), &cfg.garch, &mut rng)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = scenario_config(&cli.common)?;
    let out = &cli.common.out;
    std::fs::create_dir_all(out)?;
    match cli.command {
        Command::Simulate { rep, csv } => {
            let panel = simulated_panel(&cfg, rep)?;
            io::write_panel_bin(&out.join("panel.bin"), &panel)?;
            if csv {
                io::write_panel_csv(&out.join("panel.csv"), &panel.returns)?;
                if let Some(iid) = &panel.paired_iid {
                    io::write_panel_csv(&out.join("panel_iid.csv"), iid)?;
                }
            }
            eprintln!("wrote panel p={} n={} to {}", panel.p(), panel.n(), out.display());
        }
        Command::FitGarch { input, coord } => {
            let panel = load_panel(&cfg, &input)?;
            let fit = match coord {
                Some(i) if i < panel.p() => fit_garch(&panel.series(i), &cfg.garch)?,
                Some(i) => return Err(Error::InvalidParameter(format!("coordinate {i} out of range"))),
                None => pooled_fit(&cfg, &panel)?,
            };
            let text = format!(
                "a_hat,b_hat,sigma_bar2_hat,neg_log_lik,converged,iterations\n{},{},{},{},{},{}\n",
                io::fmt_f64(fit.a_hat),
                io::fmt_f64(fit.b_hat),
                io::fmt_f64(fit.sigma_bar2_hat),
                io::fmt_f64(fit.neg_log_lik),
                fit.converged,
                fit.iterations
            );
            print!("{text}");
            write_text(&out.join("garch.csv"), &text)?;
        }
        Command::TvAdjust { input, ab } => {
            let panel = load_panel(&cfg, &input)?;
            let (a_hat, b_hat) = match ab {
                Some(v) => (v[0], v[1]),
                None if cfg.use_true_ab && input.panel.is_none() => (cfg.a, cfg.b),
                None => {
                    let fit = pooled_fit(&cfg, &panel)?;
                    (fit.a_hat, fit.b_hat)
                }
            };
            let adj = tv_adjust(&panel, &TvAdjustConfig::new(cfg.m_p.resolve(panel.p()), a_hat, b_hat)?)?;
            let raw = SymMatrix::sample_covariance(&panel.returns)?;
            io::write_matrix_csv(&out.join("s_raw.csv"), raw.as_matrix())?;
            io::write_matrix_csv(&out.join("s_tilde.csv"), adj.covariance.as_matrix())?;
            write_text(
                &out.join("tv_adjust.csv"),
                &format!(
                    "a_hat,b_hat,m_p,effective_n\n{},{},{},{}\n",
                    io::fmt_f64(a_hat),
                    io::fmt_f64(b_hat),
                    cfg.m_p.resolve(panel.p()),
                    adj.effective_n()
                ),
            )?;
        }
        Command::Estimate { cov, obs } => {
            let s = io::read_sym_csv(&cov)?;
            if obs == 0 {
                return Err(Error::InvalidParameter("--obs must be positive".into()));
            }
            let y = s.dim() as f64 / obs as f64;
            let est = nls_estimate(&s, y, cfg.truncation, &cfg.quest)?;
            io::write_matrix_csv(&out.join("sigma_tilde.csv"), est.shrinkage.estimate.as_matrix())?;
            io::write_spectrum_csv(&out.join("spectrum.csv"), &est.spectrum)?;
            let mut eigs = est.spectrum.midpoint_quantiles(s.dim());
            eigs.reverse();
            io::write_column_csv(&out.join("spectrum_eigs.csv"), "lambda_h", &eigs)?;
            io::write_column_csv(&out.join("shrunk.csv"), "d", &est.shrinkage.shrunk)?;
            eprintln!(
                "y = {y:.4}, objective {:.3e} after {} iterations, {} eigenvalues truncated",
                est.fit.objective, est.fit.iterations, est.shrinkage.truncation_count
            );
        }
        Command::Scenario => {
            let run = run_scenario(&cfg, cli.common.workers)?;
            write_scenario(out, &cfg, &run)?;
            for (name, m) in METRIC_NAMES.iter().zip(summarize(&run.records)) {
                println!("{name:14} {:.4} (sd {:.4}, se {:.4})", m.mean, m.sd, m.se);
            }
            for (r, msg) in &run.failures {
                eprintln!("replication {r} failed: {msg}");
            }
        }
        Command::Grid { step, points } => {
            let pts = match points {
                Some(list) => parse_points(&list)?,
                None => grid_points(step)?,
            };
            let rows = run_grid(&cfg, &pts, cli.common.workers)?;
            write_text(&out.join("grid.csv"), &grid_csv(&rows))?;
        }
        Command::EsdDump { rep, grid_size } => {
            let outp = replicate(&cfg, rep)?;
            emit_esd_dump(out, &outp, &cfg.sigma_bar(), grid_size)?;
            eprintln!("wrote esd.csv and mp_reference.csv to {}", out.display());
        }
    }
    Ok(())
}

fn parse_points(list: &str) -> Result<Vec<(f64, f64)>> {
    list.split(',')
        .map(|pt| {
            let bad = || Error::InvalidParameter(format!("grid point {pt:?} is not a:b"));
            let (a, b) = pt.split_once(':').ok_or_else(bad)?;
            Ok((
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
