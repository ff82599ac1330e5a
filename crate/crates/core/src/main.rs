mod cli;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aniso_core::Error;
use cli::commands::{self, Failure, Outcome};
use cli::config::{self, Config, ConfigError, YoungConfig};

#[derive(Parser)]
#[command(name = "aniso", version, about = "Experiments on anisotropic Orlicz-Laplacian stress fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Euler, dual and tangential Hessian identities of the norms
    CheckNorm,
    /// Growth indices, regularization pinch, doubling and primitive bounds of the Young functions
    CheckYoung,
    /// Randomized pointwise inequalities of the stress operator
    CheckOperator,
    /// Solve one problem by epsilon-continuation
    Solve,
    /// Global stress estimate on convex domains
    VerifyConvex,
    /// Local stress estimate on interior balls
    VerifyLocal,
    /// Anisotropic Reilly identity and the divergence identity
    VerifyReilly,
    /// Boundary trace inequality with curvature weight
    VerifyTrace,
    /// Marcinkiewicz and isocapacitary curvature functionals
    Geometry,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::CheckNorm => "check-norm",
            Command::CheckYoung => "check-young",
            Command::CheckOperator => "check-operator",
            Command::Solve => "solve",
            Command::VerifyConvex => "verify-convex",
            Command::VerifyLocal => "verify-local",
            Command::VerifyReilly => "verify-reilly",
            Command::VerifyTrace => "verify-trace",
            Command::Geometry => "geometry",
        }
    }
}

#[derive(clap::Args)]
struct Flags {
    /// TOML configuration file; flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and JSON files
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Random samples per combination
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Mesh sizes, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    /// Epsilon ladder, comma separated and decreasing
    #[arg(long = "eps-ladder", global = true, value_delimiter = ',')]
    eps_ladder: Option<Vec<f64>>,
    /// disk, ellipse, superellipse, square or hexagon
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Domain scale: disk radius, ellipse minor semi-axis, half side of the square
    #[arg(long = "R", global = true)]
    r: Option<f64>,
    /// euclidean, weighted (4,1) or blend (p = q = 4)
    #[arg(long, global = true)]
    norm: Option<String>,
    /// Exponent of the power Young function
    #[arg(long, global = true)]
    p: Option<f64>,
    /// 'bump' or a constant value
    #[arg(long, global = true)]
    source: Option<String>,
    /// dirichlet or neumann
    #[arg(long, global = true)]
    bc: Option<String>,
    /// Quadrature resolution for verify-reilly
    #[arg(long, global = true)]
    resolution: Option<usize>,
}

fn effective_config(flags: &Flags) -> Result<Config, ConfigError> {
    let mut cfg = match &flags.config {
        Some(path) => config::load(path)?,
        None => Config::default(),
    };
    if flags.seed.is_some() {
        cfg.seed = flags.seed;
    }
    if flags.samples.is_some() {
        cfg.samples = flags.samples;
    }
    if flags.jobs.is_some() {
        cfg.jobs = flags.jobs;
    }
    if flags.h.is_some() {
        cfg.h = flags.h.clone();
    }
    if flags.eps_ladder.is_some() {
        cfg.eps_ladder = flags.eps_ladder.clone();
    }
    if flags.domain.is_some() || flags.r.is_some() {
        cfg.domain = Some(config::domain_from_flag(flags.domain.as_deref().unwrap_or("disk"), flags.r.unwrap_or(1.0))?);
    }
    if let Some(n) = &flags.norm {
        cfg.norm = Some(config::norm_from_flag(n)?);
    }
    if let Some(p) = flags.p {
        cfg.young = Some(YoungConfig::Power { p });
    }
    if let Some(s) = &flags.source {
        cfg.source = Some(config::source_from_flag(s)?);
    }
    if flags.bc.is_some() {
        cfg.bc = flags.bc.clone();
    }
    if flags.resolution.is_some() {
        cfg.resolution = flags.resolution;
    }
    if cfg.samples == Some(0) {
        return Err(ConfigError("samples must be positive".into()));
    }
    if cfg.jobs == Some(0) {
        return Err(ConfigError("jobs must be positive".into()));
    }
    Ok(cfg)
}

fn dispatch(command: Command, cfg: &Config, out: &std::path::Path) -> Result<Outcome, Failure> {
    match command {
        Command::CheckNorm => commands::check_norm(cfg),
        Command::CheckYoung => commands::check_young(cfg),
        Command::CheckOperator => commands::check_operator(cfg),
        Command::Solve => commands::solve(cfg, out),
        Command::VerifyConvex => commands::verify_convex(cfg),
        Command::VerifyLocal => commands::verify_local(cfg),
        Command::VerifyReilly => commands::verify_reilly_cmd(cfg),
        Command::VerifyTrace => commands::verify_trace_cmd(cfg),
        Command::Geometry => commands::geometry(cfg, out),
    }
}

/// Errors caused by what was asked for exit with 2, failures while running with 1.
fn exit_for(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::Configuration(_)
        | Error::Precondition(_)
        | Error::UnsupportedKind(_)
        | Error::WindowTooLarge(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let cfg = effective_config(&cli.flags)?;
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Run(Error::Configuration(e.to_string())))?;
    }
    let name = cli.command.name();
    let outcome = dispatch(cli.command, &cfg, &cli.flags.out)?;
    let csv = commands::write_report(&cli.flags.out, name, &cfg, &outcome)?;
    let failing: Vec<_> = outcome.rows.iter().filter(|r| !r.pass).collect();
    println!("{name}: {} checks, {} failed; wrote {}", outcome.rows.len(), failing.len(), csv.display());
    for r in &failing {
        eprintln!("FAIL {} [{} {} {}] lhs={} rhs={} ratio={} bound={}", r.check, r.domain, r.norm, r.young, r.lhs, r.rhs, r.ratio, r.bound);
    }
    Ok(failing.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
