//! Command-line front end.
//!
//! Every subcommand is a thin adapter over one library operation: it resolves
//! parameters (flags first, then `--config` file entries, then defaults),
//! calls the operation, and serializes the result. Exit codes: 0 ok, 2 usage,
//! 3 domain error, 4 numerical failure.

mod config;

use std::fmt;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hilt_core::dist::ThresholdDist;
use hilt_core::multiclass::{integrate_multiclass, optimize_seed, CommunityNetwork};
use hilt_core::ode::{integrate, sir_comparator, StepControl, UniformClosedForm};
use hilt_core::planner::{seed_for_deadline, sweep, time_to_reach};
use hilt_core::sim::{auto_max_steps, ensemble, fluid_convergence, run_cascade, HiltConfig};
use hilt_core::trajectory::Route;
use hilt_core::{io as hio, HiltError};

use config::ConfigFile;

/// Threshold-cascade toolbox: stochastic chains, fluid ODEs, seed planning.
#[derive(Parser)]
#[command(name = "hilt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the fluid system (or evaluate the uniform closed form)
    Ode(OdeArgs),
    /// Simulate stochastic cascades (exact or minislot-scaled chain)
    Simulate(SimulateArgs),
    /// Exact expected terminal spread of the finite chain (uniform thresholds)
    Expected(ExpectedArgs),
    /// Waiting time until a target active fraction is reached
    PlanTime(PlanTimeArgs),
    /// Minimal seed fraction reaching a target by a deadline
    PlanSeed(PlanSeedArgs),
    /// Planner sweep over (gamma, alpha, deadline) grids
    PlanSweep(PlanSweepArgs),
    /// Exponential-threshold fluid system vs the classic SIR epidemic
    CompareSir(CompareSirArgs),
    /// Community-structured system: integrate or optimize the seeding
    Multiclass(MulticlassArgs),
    /// Scaled-chain ensembles vs the fluid ODE across population sizes
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimRoute {
    Exact,
    Scaled,
}

#[derive(Args)]
struct OutputArgs {
    /// Config file with key = value entries; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct DistArgs {
    /// Threshold distribution: uniform | exponential | weibull | loglogistic
    #[arg(long)]
    dist: Option<String>,
    /// Rate of the exponential distribution
    #[arg(long)]
    rate: Option<f64>,
    /// Scale of the Weibull / log-logistic distribution
    #[arg(long)]
    scale: Option<f64>,
    /// Shape of the Weibull / log-logistic distribution
    #[arg(long)]
    shape: Option<f64>,
}

#[derive(Args)]
struct StepArgs {
    /// Integrator step size (default 1e-3)
    #[arg(long)]
    step: Option<f64>,
    /// Early-stop threshold on d (default 1e-10)
    #[arg(long)]
    d_stop: Option<f64>,
    /// Hazard clamp width (default 1e-12)
    #[arg(long)]
    eps_haz: Option<f64>,
    /// Enable step-doubling adaptivity with this local tolerance
    #[arg(long)]
    adaptive_tol: Option<f64>,
}

#[derive(Args)]
struct OdeArgs {
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Evaluate the uniform-threshold closed form instead of integrating
    #[arg(long)]
    closed_form: bool,
    #[command(flatten)]
    dist: DistArgs,
    #[command(flatten)]
    step: StepArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Population size
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long, value_enum, default_value_t = SimRoute::Exact)]
    route: SimRoute,
    #[arg(long)]
    seed: Option<u64>,
    /// Replications; > 1 writes the ensemble mean trajectory
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    runs: Option<u64>,
    /// Step budget per run (default: enough to absorb)
    #[arg(long)]
    max_steps: Option<u64>,
    #[command(flatten)]
    dist: DistArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ExpectedArgs {
    /// Population size
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// Influence scale G (per-edge weight G/N)
    #[arg(long, conflicts_with = "gamma_edge")]
    gamma: Option<f64>,
    /// Per-edge weight g directly
    #[arg(long)]
    gamma_edge: Option<f64>,
    /// Seed count; omit to emit the whole table m = 0..N
    #[arg(long)]
    m: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PlanTimeArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PlanSeedArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    deadline: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Bisection stopping threshold on |F - G| (default 1e-10)
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PlanSweepArgs {
    #[arg(long, value_delimiter = ',')]
    gamma_list: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    alpha_list: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    deadline_list: Vec<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareSirArgs {
    /// Exponential threshold rate (SIR infection rate is rate * gamma)
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Write the threshold-model trajectory here (CSV)
    #[arg(long)]
    out_hilt: Option<PathBuf>,
    /// Write the SIR trajectory here (CSV)
    #[arg(long)]
    out_sir: Option<PathBuf>,
    #[command(flatten)]
    step: StepArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MulticlassArgs {
    /// Initial infectious fractions per community, e.g. 0.0,0.3
    #[arg(long, value_delimiter = ',')]
    d_init: Vec<f64>,
    /// Grid-search the seeding instead of integrating one
    #[arg(long)]
    optimize: bool,
    /// Total seed budget (optimize mode)
    #[arg(long)]
    budget: Option<f64>,
    /// Grid points per free dimension (optimize mode, default 31)
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[command(flatten)]
    step: StepArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    /// Ascending population sizes, e.g. 50,100,500,1000
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<u64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    dist: DistArgs,
    #[command(flatten)]
    step: StepArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parameter resolution failure (missing/contradictory inputs): exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<HiltError>() {
        return if e.is_numerical() { 4 } else { 3 };
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ode(a) => cmd_ode(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Expected(a) => cmd_expected(a),
        Command::PlanTime(a) => cmd_plan_time(a),
        Command::PlanSeed(a) => cmd_plan_seed(a),
        Command::PlanSweep(a) => cmd_plan_sweep(a),
        Command::CompareSir(a) => cmd_compare_sir(a),
        Command::Multiclass(a) => cmd_multiclass(a),
        Command::Convergence(a) => cmd_convergence(a),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    use std::io::Write;
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display())),
        None => match std::io::stdout().lock().write_all(content.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other.context("cannot write to stdout"),
        },
    }
}

fn require_f64(flag: Option<f64>, cfg: &ConfigFile, key: &str) -> Result<f64> {
    match flag {
        Some(v) => Ok(v),
        None => cfg
            .f64(key)?
            .ok_or_else(|| usage(format!("missing --{} (or config key {key})", key.replace('_', "-")))),
    }
}

fn f64_or(flag: Option<f64>, cfg: &ConfigFile, key: &str, default: f64) -> Result<f64> {
    Ok(flag.or(cfg.f64(key)?).unwrap_or(default))
}

fn u64_or(flag: Option<u64>, cfg: &ConfigFile, key: &str, default: u64) -> Result<u64> {
    Ok(flag.or(cfg.u64(key)?).unwrap_or(default))
}

/// Builds the threshold distribution from flags/config; defaults to uniform.
fn resolve_dist(args: &DistArgs, cfg: &ConfigFile) -> Result<ThresholdDist<f64>> {
    let kind = args
        .dist
        .clone()
        .or_else(|| cfg.string("dist"))
        .unwrap_or_else(|| "uniform".into());
    let rate = args.rate.or(cfg.f64("rate")?);
    let scale = args.scale.or(cfg.f64("scale")?);
    let shape = args.shape.or(cfg.f64("shape")?);
    build_dist(&kind, rate, scale, shape)
}

fn build_dist(
    kind: &str,
    rate: Option<f64>,
    scale: Option<f64>,
    shape: Option<f64>,
) -> Result<ThresholdDist<f64>> {
    match kind {
        "uniform" => Ok(ThresholdDist::Uniform01),
        "exponential" => {
            let rate = rate.ok_or_else(|| usage("exponential distribution needs --rate"))?;
            Ok(ThresholdDist::exponential(rate)?)
        }
        "weibull" => {
            let scale = scale.ok_or_else(|| usage("weibull distribution needs --scale"))?;
            let shape = shape.ok_or_else(|| usage("weibull distribution needs --shape"))?;
            Ok(ThresholdDist::weibull(scale, shape)?)
        }
        "loglogistic" => {
            let scale = scale.ok_or_else(|| usage("loglogistic distribution needs --scale"))?;
            let shape = shape.ok_or_else(|| usage("loglogistic distribution needs --shape"))?;
            Ok(ThresholdDist::loglogistic(scale, shape)?)
        }
        other => Err(usage(format!(
            "unknown distribution {other:?} (expected uniform, exponential, weibull or loglogistic)"
        ))),
    }
}

fn resolve_step(args: &StepArgs, cfg: &ConfigFile) -> Result<StepControl<f64>> {
    let defaults = StepControl::<f64>::default();
    Ok(StepControl {
        step: f64_or(args.step, cfg, "step", defaults.step)?,
        d_stop: f64_or(args.d_stop, cfg, "d_stop", defaults.d_stop)?,
        eps_haz: f64_or(args.eps_haz, cfg, "eps_haz", defaults.eps_haz)?,
        simplex_tol: defaults.simplex_tol,
        adaptive_tol: args.adaptive_tol.or(cfg.f64("adaptive_tol")?),
    })
}

fn step_echo(ctrl: &StepControl<f64>) -> serde_json::Value {
    json!({
        "step": ctrl.step,
        "d_stop": ctrl.d_stop,
        "eps_haz": ctrl.eps_haz,
        "adaptive_tol": ctrl.adaptive_tol,
    })
}

fn cmd_ode(args: OdeArgs) -> Result<()> {
    let cfg = load_config(&args.output.config)?;
    let dist = resolve_dist(&args.dist, &cfg)?;
    let gamma = require_f64(args.gamma, &cfg, "gamma")?;
    let d0 = require_f64(args.d0, &cfg, "d0")?;
    let t_end = f64_or(args.t_end, &cfg, "t_end", 30.0)?;
    let ctrl = resolve_step(&args.step, &cfg)?;

    let traj = if args.closed_form {
        if !matches!(dist, ThresholdDist::Uniform01) {
            return Err(usage("--closed-form applies to the uniform distribution only"));
        }
        UniformClosedForm::new(gamma, d0)?.trajectory(t_end, ctrl.step)?
    } else {
        integrate(&dist, gamma, d0, t_end, &ctrl)?
    };

    let content = match args.output.format {
        Format::Csv => hio::trajectory_csv(&traj),
        Format::Json => {
            let echo = json!({
                "dist": dist.descriptor(),
                "gamma": gamma,
                "d0": d0,
                "t_end": t_end,
                "closed_form": args.closed_form,
                "control": step_echo(&ctrl),
            });
            hio::trajectory_json(&traj, "ode", &echo)
        }
    };
    emit(&args.output.out, &content)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let cfg = load_config(&args.output.config)?;
    let dist = resolve_dist(&args.dist, &cfg)?;
    let n = match args.n.or(cfg.u64("n")?) {
        Some(0) | None => return Err(usage("missing --n (population size must be >= 1)")),
        Some(n) => n,
    };
    let gamma = require_f64(args.gamma, &cfg, "gamma")?;
    let d0 = require_f64(args.d0, &cfg, "d0")?;
    let seed = u64_or(args.seed, &cfg, "seed", 0)?;
    let runs = u64_or(args.runs, &cfg, "runs", 1)?;
    if runs == 0 {
        return Err(usage("--runs must be >= 1"));
    }
    let route = match args.route {
        SimRoute::Exact => Route::Exact,
        SimRoute::Scaled => Route::Scaled,
    };
    let max_steps = match args.max_steps.or(cfg.u64("max_steps")?) {
        Some(0) | None => auto_max_steps(route, n),
        Some(ms) => ms,
    };
    let model = HiltConfig::new(n, gamma, d0, dist.clone())?;

    let echo = json!({
        "dist": dist.descriptor(),
        "n": n,
        "gamma": gamma,
        "d0": d0,
        "route": if route == Route::Exact { "exact" } else { "scaled" },
        "seed": seed,
        "runs": runs,
        "max_steps": max_steps,
    });
    let content = if runs == 1 {
        let traj = run_cascade(&model, route, seed, max_steps)?;
        for w in &traj.warnings {
            eprintln!("warning: {w}");
        }
        match args.output.format {
            Format::Csv => hio::trajectory_csv(&traj),
            Format::Json => hio::trajectory_json(&traj, "simulate", &echo),
        }
    } else {
        let ens = ensemble(&model, route, runs, seed, max_steps)?;
        let mean = ens.mean_trajectory();
        match args.output.format {
            Format::Csv => hio::trajectory_csv(&mean),
            Format::Json => {
                let terminal_spreads: Vec<f64> =
                    ens.runs.iter().map(|r| r.final_active()).collect();
                let doc = json!({
                    "schema_version": hio::SCHEMA_VERSION,
                    "command": "simulate",
                    "config": echo,
                    "route": mean.route,
                    "terminal": mean.terminal,
                    "times": ens.times,
                    "mean_b": ens.mean_b,
                    "mean_d": ens.mean_d,
                    "std_b": ens.std_b,
                    "std_d": ens.std_d,
                    "run_terminal_active": terminal_spreads,
                });
                let mut s = serde_json::to_string_pretty(&doc)?;
                s.push('\n');
                s
            }
        }
    };
    emit(&args.output.out, &content)
}

fn cmd_expected(args: ExpectedArgs) -> Result<()> {
    let cfg = load_config(&args.output.config)?;
    let n = match args.n.or(cfg.u64("n")?) {
        Some(0) | None => return Err(usage("missing --n (population size must be >= 1)")),
        Some(n) => n,
    };
    // flags first (clap already rejects passing both), then the config file
    let gamma_edge = match (args.gamma, args.gamma_edge) {
        (Some(g), _) => g / n as f64,
        (_, Some(ge)) => ge,
        (None, None) => match (cfg.f64("gamma")?, cfg.f64("gamma_edge")?) {
            (Some(_), Some(_)) => {
                return Err(usage("config sets both gamma and gamma_edge; pick one"))
            }
            (Some(g), None) => g / n as f64,
            (None, Some(ge)) => ge,
            (None, None) => return Err(usage("missing --gamma (or --gamma-edge)")),
        },
    };
    let echo = json!({ "n": n, "gamma_edge": gamma_edge, "m": args.m.or(cfg.u64("m")?) });

    match args.m.or(cfg.u64("m")?) {
        Some(m) => {
            let h = hilt_core::discrete::expected_spread(n, gamma_edge, m)?;
            let content = match args.output.format {
                Format::Csv => format!("m,h,h_over_n\n{},{},{}\n", m, h, h / n as f64),
                Format::Json => hio::table_json(
                    "expected",
                    &echo,
                    "result",
                    json!({ "m": m, "h": h, "h_over_n": h / n as f64 }),
                ),
            };
            emit(&args.output.out, &content)
        }
        None => {
            let table = hilt_core::discrete::spread_table(n, gamma_edge)?;
            let content = match args.output.format {
                Format::Csv => hio::expected_table_csv(&table),
                Format::Json => hio::table_json("expected", &echo, "table", &table),
            };
            emit(&args.output.out, &content)
        }
    }
}

fn cmd_plan_time(args: PlanTimeArgs) -> Result<()> {
    let cfg = load_config(&args.output.config)?;
    let alpha = require_f64(args.alpha, &cfg, "alpha")?;
    let d0 = require_f64(args.d0, &cfg, "d0")?;
    let gamma = require_f64(args.gamma, &cfg, "gamma")?;
    let t = time_to_reach(alpha, d0, gamma)?;
    match args.output.format {
        Format::Csv => emit(&args.output.out, &format!("{t}\n")),
        Format::Json => {
            let echo = json!({ "alpha": alpha, "d0": d0, "gamma": gamma });
            emit(
                &args.output.out,
                &hio::table_json("plan-time", &echo, "result", json!({ "T": t })),
            )
        }
    }
}

fn cmd_plan_seed(args: PlanSeedArgs) -> Result<()> {
    let cfg = load_config(&args.output.config)?;
    let alpha = require_f64(args.alpha, &cfg, "alpha")?;
    let deadline = require_f64(args.deadline, &cfg, "deadline")?;
    let gamma = require_f64(args.gamma, &cfg, "gamma")?;
    let eps = f64_or(args.eps, &cfg, "eps", hilt_core::planner::DEFAULT_SOLVER_EPS)?;
    let sol = seed_for_deadline(alpha, deadline, gamma, eps)?;
    let achieved = UniformClosedForm::new(gamma, sol.d0_star)?.active_at(deadline)?;
    match args.output.format {
        Format::Csv => emit(&args.output.out, &format!("{}\n", sol.d0_star)),
        Format::Json => {
            let echo = json!({ "alpha": alpha, "deadline": deadline, "gamma": gamma, "eps": eps });
            emit(
                &args.output.out,
                &hio::table_json(
                    "plan-seed",
                    &echo,
                    "result",
                    json!({
                        "d0_star": sol.d0_star,
                        "iterations": sol.iterations,
                        "residual": sol.residual,
                        "active_at_deadline": achieved,
                    }),
                ),
            )
        }
    }
}

fn cmd_plan_sweep(args: PlanSweepArgs) -> Result<()> {
    let cfg = load_config(&args.output.config)?;
    let gammas = non_empty_list(args.gamma_list, &cfg, "gamma_list")?;
    let alphas = non_empty_list(args.alpha_list, &cfg, "alpha_list")?;
    let deadlines = non_empty_list(args.deadline_list, &cfg, "deadline_list")?;
    let eps = f64_or(args.eps, &cfg, "eps", hilt_core::planner::DEFAULT_SOLVER_EPS)?;
    let result = sweep(&gammas, &alphas, &deadlines, eps);
    for (g, a, t, msg) in &result.failures {
        eprintln!("warning: cell (gamma={g}, alpha={a}, T={t}) failed: {msg}");
    }
    let content = match args.output.format {
        Format::Csv => hio::sweep_csv(&result.rows),
        Format::Json => {
            let echo = json!({
                "gamma_list": gammas,
                "alpha_list": alphas,
                "deadline_list": deadlines,
                "eps": eps,
            });
            hio::table_json("plan-sweep", &echo, "result", &result)
        }
    };
    emit(&args.output.out, &content)
}

fn non_empty_list(flag: Vec<f64>, cfg: &ConfigFile, key: &str) -> Result<Vec<f64>> {
    if !flag.is_empty() {
        return Ok(flag);
    }
    cfg.f64_list(key)?
        .filter(|v| !v.is_empty())
        .ok_or_else(|| usage(format!("missing --{} (or config key {key})", key.replace('_', "-"))))
}

fn cmd_compare_sir(args: CompareSirArgs) -> Result<()> {
    let cfg = load_config(&args.output.config)?;
    let rate = require_f64(args.rate, &cfg, "rate")?;
    let gamma = require_f64(args.gamma, &cfg, "gamma")?;
    let d0 = require_f64(args.d0, &cfg, "d0")?;
    let t_end = f64_or(args.t_end, &cfg, "t_end", 30.0)?;
    let ctrl = resolve_step(&args.step, &cfg)?;
    let cmp = sir_comparator(rate, gamma, d0, t_end, &ctrl)?;
    if let Some(path) = &args.out_hilt {
        std::fs::write(path, hio::trajectory_csv(&cmp.hilt))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.out_sir {
        std::fs::write(path, hio::trajectory_csv(&cmp.sir))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    match args.output.format {
        Format::Csv => emit(&args.output.out, &format!("{}\n", cmp.sup_distance)),
        Format::Json => {
            let echo = json!({
                "rate": rate,
                "gamma": gamma,
                "d0": d0,
                "t_end": t_end,
                "control": step_echo(&ctrl),
            });
            emit(
                &args.output.out,
                &hio::table_json(
                    "compare-sir",
                    &echo,
                    "result",
                    json!({
                        "sup_distance": cmp.sup_distance,
                        "hilt_terminal_active": cmp.hilt.final_active(),
                        "sir_terminal_active": cmp.sir.final_active(),
                    }),
                ),
            )
        }
    }
}

fn community_network(cfg: &ConfigFile) -> Result<CommunityNetwork<f64>> {
    if cfg.communities().is_empty() {
        return Err(usage(
            "multiclass needs a --config file with [community] blocks and a g matrix",
        ));
    }
    let mut sizes = Vec::new();
    let mut dists = Vec::new();
    for (i, block) in cfg.communities().iter().enumerate() {
        let size = config::parse_f64(block, "size")?
            .ok_or_else(|| usage(format!("community {} is missing `size`", i + 1)))?;
        sizes.push(size);
        let kind = block
            .get("dist")
            .cloned()
            .unwrap_or_else(|| "uniform".into());
        dists.push(build_dist(
            &kind,
            config::parse_f64(block, "rate")?,
            config::parse_f64(block, "scale")?,
            config::parse_f64(block, "shape")?,
        )?);
    }
    let g = cfg
        .matrix("g")?
        .ok_or_else(|| usage("multiclass config is missing the influence matrix `g`"))?;
    Ok(CommunityNetwork::new(sizes, g, dists)?)
}

fn cmd_multiclass(args: MulticlassArgs) -> Result<()> {
    let cfg = load_config(&args.output.config)?;
    let net = community_network(&cfg)?;
    let t_end = f64_or(args.t_end, &cfg, "t_end", 200.0)?;
    let ctrl = resolve_step(&args.step, &cfg)?;
    let net_echo = json!({
        "sizes": net.sizes(),
        "g": net.influence(),
        "dists": net.dists().iter().map(|d| d.descriptor()).collect::<Vec<_>>(),
        "t_end": t_end,
        "control": step_echo(&ctrl),
    });

    if args.optimize {
        let budget = require_f64(args.budget, &cfg, "budget")?;
        let resolution = match args.resolution {
            Some(r) => r,
            None => cfg.u64("resolution")?.map(|r| r as usize).unwrap_or(31),
        };
        let res = optimize_seed(&net, budget, resolution, t_end, &ctrl)?;
        let alloc: Vec<String> = res.best.allocation.iter().map(|d| d.to_string()).collect();
        eprintln!(
            "best allocation: ({}) -> total spread {}",
            alloc.join(", "),
            res.best.total_spread
        );
        let content = match args.output.format {
            Format::Csv => hio::surface_csv(&res.surface),
            Format::Json => {
                let echo = json!({ "network": net_echo, "budget": budget, "resolution": resolution });
                hio::table_json("multiclass", &echo, "result", &res)
            }
        };
        emit(&args.output.out, &content)
    } else {
        let d_init = if !args.d_init.is_empty() {
            args.d_init.clone()
        } else {
            cfg.f64_list("d_init")?
                .ok_or_else(|| usage("missing --d-init (or config key d_init)"))?
        };
        let traj = integrate_multiclass(&net, &d_init, t_end, &ctrl)?;
        let content = match args.output.format {
            Format::Csv => hio::multi_trajectory_csv(&traj),
            Format::Json => {
                let echo = json!({ "network": net_echo, "d_init": d_init });
                hio::table_json("multiclass", &echo, "trajectory", &traj)
            }
        };
        emit(&args.output.out, &content)
    }
}

fn cmd_convergence(args: ConvergenceArgs) -> Result<()> {
    let cfg = load_config(&args.output.config)?;
    let dist = resolve_dist(&args.dist, &cfg)?;
    let gamma = require_f64(args.gamma, &cfg, "gamma")?;
    let d0 = require_f64(args.d0, &cfg, "d0")?;
    let n_list = if !args.n_list.is_empty() {
        args.n_list.clone()
    } else {
        cfg.u64_list("n_list")?
            .ok_or_else(|| usage("missing --n-list (or config key n_list)"))?
    };
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage("--n-list must be a nonempty ascending list"));
    }
    let runs = u64_or(args.runs, &cfg, "runs", 20)?;
    let seed = u64_or(args.seed, &cfg, "seed", 0)?;
    let ctrl = resolve_step(&args.step, &cfg)?;
    let report = fluid_convergence(&dist, gamma, d0, &n_list, runs, seed, &ctrl)?;
    eprintln!("nonincreasing within noise: {}", report.nonincreasing);
    let content = match args.output.format {
        Format::Csv => hio::convergence_csv(&report.rows),
        Format::Json => {
            let echo = json!({
                "dist": dist.descriptor(),
                "gamma": gamma,
                "d0": d0,
                "n_list": n_list,
                "runs": runs,
                "seed": seed,
                "control": step_echo(&ctrl),
            });
            hio::table_json("convergence", &echo, "report", &report)
        }
    };
    emit(&args.output.out, &content)
}
