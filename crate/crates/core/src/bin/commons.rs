//! Command-line front end: config ingestion, one subcommand per analysis,
//! deterministic CSV emission, and a validation command that runs the full
//! invariant suite.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commons_core::analysis::{
    basin_eliminated, critical_eta, decompose_margins, find_congested_stock, resolution_race,
    sensitivity_sweep, SweepSpec,
};
use commons_core::config::RunConfig;
use commons_core::dynamics::{find_steady_states, phi_curve, simulate, GridSpec};
use commons_core::equilibrium::{solve_congestion, solve_period};
use commons_core::output;
use commons_core::params::Environment;
use commons_core::validate;
use commons_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "commons",
    version,
    about = "Knowledge-platform archive dynamics: equilibrium solves, steady states, and policy analysis"
)]
struct Cli {
    /// JSON config file (blocks: shared, ho, ai, grid, tolerances).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in preset (`appendix-d` is the baseline calibration).
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Directory for CSV output (default `out`, or the config's output_dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the period equilibrium at one archive stock.
    Solve {
        /// Archive stock K.
        #[arg(long)]
        k: f64,
        /// Environment: ho or ai.
        #[arg(long)]
        env: Environment,
        /// Conversion rate (AI only).
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        /// Also report matching against the active-query stock for a
        /// multi-period query lifetime.
        #[arg(long, value_name = "N")]
        t_life: Option<u32>,
    },
    /// Evaluate h(K) and phi(K) = h/K on a grid and write curve.csv.
    Curve {
        #[arg(long)]
        env: Environment,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        /// Grid as MIN:MAX:N (defaults to the configured grid).
        #[arg(long, value_name = "MIN:MAX:N")]
        grid: Option<String>,
    },
    /// Locate and classify steady states; writes steady.csv.
    Steady {
        #[arg(long)]
        env: Environment,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[arg(long, value_name = "MIN:MAX:N")]
        grid: Option<String>,
    },
    /// Iterate the law of motion from k0; writes trajectory.csv.
    Simulate {
        #[arg(long)]
        k0: f64,
        /// Maximum number of steps.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long)]
        env: Environment,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
    },
    /// Two-margin decomposition of the creation decline at a reference stock
    /// (defaults to the human-only stable stock); writes decomposition.csv.
    Decompose {
        #[arg(long, value_name = "K")]
        k: Option<f64>,
    },
    /// Resolution-race factors at a reference stock (defaults to a scanned
    /// jointly-congested stock); writes race.csv.
    Race {
        #[arg(long, value_name = "K")]
        k: Option<f64>,
    },
    /// Critical conversion rate for eliminating the low-archive basin;
    /// writes eta.csv.
    Eta {
        /// Also evaluate basin elimination at this conversion rate.
        #[arg(long, value_name = "F")]
        at: Option<f64>,
    },
    /// One-at-a-time sensitivity sweep; writes sensitivity.csv.
    Sensitivity,
    /// Run the full invariant suite and print a per-check table.
    Validate,
}

fn parse_grid(text: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::config(format!(
            "grid must be MIN:MAX:N, got {text:?}"
        )));
    }
    let k_min: f64 = parts[0]
        .parse()
        .map_err(|_| Error::config(format!("bad grid minimum {:?}", parts[0])))?;
    let k_max: f64 = parts[1]
        .parse()
        .map_err(|_| Error::config(format!("bad grid maximum {:?}", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::config(format!("bad grid count {:?}", parts[2])))?;
    let grid = GridSpec { k_min, k_max, n };
    grid.validate()?;
    Ok(grid)
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.preset {
        Some(name) => RunConfig::preset(name)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &cli.config {
        cfg = RunConfig::from_file(path)?;
    }
    if let Some(dir) = &cli.out {
        cfg.output_dir = Some(dir.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write_csv(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn check_eta_flag(eta: f64, env: Environment) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::config(format!("--eta must lie in [0,1], got {eta}")));
    }
    if env == Environment::Ho && eta > 0.0 {
        return Err(Error::config("--eta requires --env ai"));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let params = cfg.params();
    let opts = cfg.solver_options();
    let dir = out_dir(&cfg);

    match &cli.cmd {
        Cmd::Solve {
            k,
            env,
            eta,
            t_life,
        } => {
            if *k < 0.0 {
                return Err(Error::config(format!("--k must be >= 0, got {k}")));
            }
            check_eta_flag(*eta, *env)?;
            let eq = solve_period(*k, *env, &params, &opts)?;
            let h = commons_core::dynamics::creation(*k, *env, *eta, &params, &opts)?;
            let phi = if *k > 0.0 { h / k } else { 0.0 };
            println!("period equilibrium at k = {k}, env = {env}, eta = {eta}");
            println!("  collapsed          = {}", eq.collapsed);
            println!("  full_participation = {}", eq.full_participation);
            println!("  alpha_star         = {}", output::fmt_sig(eq.alpha_star));
            println!("  pool               = {}", output::fmt_sig(eq.pool));
            println!("  surplus            = {}", output::fmt_sig(eq.surplus));
            println!("  sigma              = {}", output::fmt_sig(eq.inner.sigma));
            println!("  mu                 = {}", output::fmt_sig(eq.inner.mu));
            println!(
                "  c_star             = {}",
                output::fmt_sig(eq.inner.c_star)
            );
            println!(
                "  m_l, m_h           = {}, {}",
                output::fmt_sig(eq.inner.m_l),
                output::fmt_sig(eq.inner.m_h)
            );
            println!(
                "  q_l, q_h           = {}, {}",
                output::fmt_sig(eq.inner.q_l),
                output::fmt_sig(eq.inner.q_h)
            );
            println!(
                "  q_total            = {}",
                output::fmt_sig(eq.inner.q_total)
            );
            println!("  omega              = {}", output::fmt_sig(eq.inner.omega));
            println!(
                "  delta_bar          = {}",
                output::fmt_sig(eq.inner.delta_bar)
            );
            println!("  h                  = {}", output::fmt_sig(h));
            println!("  phi                = {}", output::fmt_sig(phi));
            if cli.out.is_some() || cfg.output_dir.is_some() {
                let path = write_csv(&dir, "solve.csv", &output::solve_csv(&eq, *eta, h))?;
                println!("wrote {}", path.display());
            }
            if let Some(t) = t_life {
                let sol = solve_congestion(
                    eq.pool,
                    eq.inner.q_total,
                    eq.inner.c_star,
                    *t,
                    &params,
                    cfg.tolerances.inner,
                )?;
                println!("matching over a {t}-period query lifetime:");
                println!("  mu             = {}", output::fmt_sig(sol.mu));
                println!("  hazard         = {}", output::fmt_sig(sol.hazard));
                println!("  sigma_lifetime = {}", output::fmt_sig(sol.sigma_lifetime));
                println!("  stock          = {}", output::fmt_sig(sol.stock));
                if cli.out.is_some() || cfg.output_dir.is_some() {
                    let path =
                        write_csv(&dir, "congestion.csv", &output::congestion_csv(&sol, *t))?;
                    println!("wrote {}", path.display());
                }
            }
        }
        Cmd::Curve { env, eta, grid } => {
            check_eta_flag(*eta, *env)?;
            let grid = match grid {
                Some(text) => parse_grid(text)?,
                None => cfg.grid,
            };
            let curve = phi_curve(*env, *eta, &grid, &params, &opts)?;
            let path = write_csv(&dir, "curve.csv", &output::curve_csv(&curve))?;
            if let Some(peak) = curve.peak() {
                println!(
                    "peak phi = {} at k = {} ({} points)",
                    output::fmt_sig(peak.phi),
                    output::fmt_sig(peak.k),
                    curve.points.len()
                );
            }
            println!("wrote {}", path.display());
        }
        Cmd::Steady { env, eta, grid } => {
            check_eta_flag(*eta, *env)?;
            let grid = match grid {
                Some(text) => parse_grid(text)?,
                None => cfg.grid,
            };
            let states =
                find_steady_states(*env, *eta, &grid, cfg.tolerances.refine, &params, &opts)?;
            for st in &states {
                println!(
                    "k* = {}  {}  (residual {})",
                    output::fmt_sig(st.k_star),
                    st.kind.as_str(),
                    output::fmt_sig(st.residual)
                );
            }
            if states.is_empty() {
                println!("no steady states in [{}, {}]", grid.k_min, grid.k_max);
            }
            let path = write_csv(&dir, "steady.csv", &output::steady_csv(&states))?;
            println!("wrote {}", path.display());
        }
        Cmd::Simulate {
            k0,
            steps,
            env,
            eta,
        } => {
            if *k0 < 0.0 {
                return Err(Error::config(format!("--k0 must be >= 0, got {k0}")));
            }
            if *steps < 1 {
                return Err(Error::config("--steps must be >= 1"));
            }
            check_eta_flag(*eta, *env)?;
            let traj = simulate(
                *k0,
                *steps,
                *env,
                *eta,
                &params,
                cfg.tolerances.convergence,
                &opts,
            )?;
            println!(
                "{} steps, converged = {}, limit = {}",
                traj.k_path.len() - 1,
                traj.converged,
                output::fmt_sig(traj.limit)
            );
            let path = write_csv(&dir, "trajectory.csv", &output::trajectory_csv(&traj))?;
            println!("wrote {}", path.display());
        }
        Cmd::Decompose { k } => {
            let k_ref = match k {
                Some(k) => *k,
                None => {
                    let states = find_steady_states(
                        Environment::Ho,
                        0.0,
                        &cfg.grid,
                        cfg.tolerances.refine,
                        &params,
                        &opts,
                    )?;
                    states
                        .iter()
                        .filter(|s| s.kind == commons_core::dynamics::Stability::Stable)
                        .map(|s| s.k_star)
                        .next_back()
                        .ok_or_else(|| {
                            Error::domain(
                                "no stable human-only steady state to anchor the decomposition",
                            )
                        })?
                }
            };
            let d = decompose_margins(k_ref, &params, &opts)?;
            println!("decomposition at k_ref = {}", output::fmt_sig(d.k_ref));
            println!("  flow margin       = {}", output::fmt_sig(d.flow_margin));
            println!(
                "  resolution margin = {}",
                output::fmt_sig(d.resolution_margin)
            );
            println!("  total decline     = {}", output::fmt_sig(d.total));
            let path = write_csv(&dir, "decomposition.csv", &output::decomposition_csv(&d))?;
            println!("wrote {}", path.display());
        }
        Cmd::Race { k } => {
            let k_ref = match k {
                Some(k) => *k,
                None => find_congested_stock(&cfg.grid, &params, &opts)?.ok_or_else(|| {
                    Error::domain("no jointly congested stock found on the configured grid")
                })?,
            };
            let r = resolution_race(k_ref, &params, &opts)?;
            println!("resolution race at k_ref = {}", output::fmt_sig(r.k_ref));
            println!("  pool ratio        = {}", output::fmt_sig(r.pool_ratio));
            println!(
                "  composition ratio = {}",
                output::fmt_sig(r.composition_ratio)
            );
            println!(
                "  congestion ratio  = {}",
                output::fmt_sig(r.congestion_ratio)
            );
            println!("  sigma ratio       = {}", output::fmt_sig(r.sigma_ratio));
            println!(
                "  congested (ho,ai) = ({}, {})",
                r.congested_ho, r.congested_ai
            );
            println!("  race predicts decline = {}", r.race_predicts_decline());
            let path = write_csv(&dir, "race.csv", &output::race_csv(&r))?;
            println!("wrote {}", path.display());
        }
        Cmd::Eta { at } => {
            let report = critical_eta(&params, 2000, &opts)?;
            println!(
                "eta_bar = {}, feasible = {}",
                output::fmt_sig(report.eta_bar),
                report.feasible
            );
            println!(
                "  k_u = {}, argmax_k = {}, limit_ratio = {}",
                output::fmt_sig(report.k_u),
                output::fmt_sig(report.argmax_k),
                output::fmt_sig(report.limit_ratio)
            );
            if let Some(eta) = at {
                let eliminated = basin_eliminated(*eta, &params, 2000, &opts)?;
                println!("  basin eliminated at eta = {eta}: {eliminated}");
            }
            let path = write_csv(&dir, "eta.csv", &output::eta_csv(&report))?;
            println!("wrote {}", path.display());
        }
        Cmd::Sensitivity => {
            let sweep = SweepSpec::appendix_d();
            let rows = sensitivity_sweep(&sweep, &params, &cfg.grid, cfg.tolerances.refine, &opts)?;
            let fmt_opt = |v: Option<f64>| v.map(output::fmt_sig).unwrap_or_else(|| "-".into());
            for row in &rows {
                println!(
                    "run {} {:>8} {:>6}  k_u_ai = {}  k_h_ai = {}  peak = {}  k_ho = {}  two_crossings = {}",
                    row.run_id,
                    row.varied_name.as_deref().unwrap_or("-"),
                    row.varied_value
                        .map(|v| format!("{v}"))
                        .unwrap_or_else(|| "-".into()),
                    fmt_opt(row.k_u_ai),
                    fmt_opt(row.k_h_ai),
                    output::fmt_sig(row.peak_phi_ai),
                    fmt_opt(row.k_ho),
                    row.two_crossings
                );
            }
            let path = write_csv(&dir, "sensitivity.csv", &output::sensitivity_csv(&rows))?;
            println!("wrote {}", path.display());
        }
        Cmd::Validate => {
            let checks = validate::run_all(&params, &opts);
            let mut failed = 0;
            for check in &checks {
                let status = if !check.required {
                    "info"
                } else if check.passed {
                    "pass"
                } else {
                    failed += 1;
                    "FAIL"
                };
                println!("[{status}] {:<32} {}", check.name, check.details);
            }
            if failed > 0 {
                return Err(Error::NoConvergence {
                    what: "validation suite",
                    residual: failed as f64,
                });
            }
            println!(
                "all {} required checks passed",
                checks.iter().filter(|c| c.required).count()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version land here with benign "error" kinds.
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Params(_) => ExitCode::from(1),
                Error::Domain(_) | Error::NoConvergence { .. } | Error::Bracket { .. } => {
                    ExitCode::from(2)
                }
            }
        }
    }
}
