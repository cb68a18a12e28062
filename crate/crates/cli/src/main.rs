mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input: exit 1.
    Input(String),
    /// A parity or domain contract was violated: exit 2.
    Contract(String),
    /// A verified property failed: exit 3.
    Property(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Contract(_) => 2,
            CliError::Property(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Contract(m) => write!(f, "contract violation: {m}"),
            CliError::Property(m) => write!(f, "property failure: {m}"),
        }
    }
}

impl From<starlab::Error> for CliError {
    fn from(e: starlab::Error) -> Self {
        match e {
            starlab::Error::ParityContract(_) | starlab::Error::ClassMismatch { .. } => CliError::Contract(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "starlab", version, about = "Skewed products of functions on the 2-sphere")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Quadrature grid as `PxA`.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    bandlimit: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// global, partial-ηνρ (e.g. partial-010), restricted or generalized.
    #[arg(long, global = true)]
    variant: Option<String>,
    /// jacobian, unit or jacobian-scaled (generalized variant).
    #[arg(long, global = true)]
    amplitude: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Geometry report for three midpoints or three vertices.
    Triangle {
        /// Three midpoints, each as `x,y,z`.
        #[arg(long, num_args = 3, value_name = "X,Y,Z", conflicts_with = "vertices", required_unless_present = "vertices")]
        points: Vec<String>,
        /// Three triangle vertices, each as `x,y,z`.
        #[arg(long, num_args = 3, value_name = "X,Y,Z")]
        vertices: Vec<String>,
    },
    /// Product of two functions, written on the grid nodes.
    Product {
        /// Coefficient CSV of the first factor.
        #[arg(long)]
        f: Option<PathBuf>,
        /// Coefficient CSV of the second factor.
        #[arg(long)]
        g: Option<PathBuf>,
        /// Parity of randomly generated factors: none, even or odd.
        #[arg(long)]
        parity: Option<String>,
    },
    /// Structure constants in the spherical-harmonic basis.
    Structure,
    /// Full property suite with a JSON verdict per property.
    Verify {
        /// Comma list of orders for the product checks.
        #[arg(long)]
        ns: Option<String>,
    },
    /// Relative error against the pointwise product for growing n = 2k.
    LimitScan {
        /// Comma list of k values.
        #[arg(long)]
        ks: Option<String>,
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long)]
        g: Option<PathBuf>,
        /// flat or unit-constant.
        #[arg(long)]
        normalization: Option<String>,
    },
    /// Quadrature nodes, weights and antipode indices.
    GridDump,
}

fn overrides(c: &Common, command: &Command) -> Vec<(&'static str, String)> {
    let mut o = Vec::new();
    let mut push = |k: &'static str, v: Option<String>| {
        if let Some(v) = v {
            o.push((k, v));
        }
    };
    push("n", c.n.map(|v| v.to_string()));
    push("grid", c.grid.clone());
    push("bandlimit", c.bandlimit.map(|v| v.to_string()));
    push("seed", c.seed.map(|v| v.to_string()));
    push("variant", c.variant.clone());
    push("amplitude", c.amplitude.clone());
    push("out", c.out.as_ref().map(|p| p.display().to_string()));
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    match command {
        Command::Product { f, g, parity } => {
            push("f", path(f));
            push("g", path(g));
            push("parity", parity.clone());
        }
        Command::Verify { ns } => {
            push("ns", ns.clone().or_else(|| c.n.map(|v| v.to_string())));
        }
        Command::LimitScan { ks, f, g, normalization } => {
            push("ks", ks.clone());
            push("f", path(f));
            push("g", path(g));
            push("normalization", normalization.clone());
        }
        _ => {}
    }
    o
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("STARLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("STARLAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let o = overrides(&cli.common, &cli.command);
    let config = RunConfig::load(cli.common.config.as_deref(), &o)?;
    match cli.command {
        Command::Triangle { points, vertices } => commands::triangle(&points, &vertices),
        Command::Product { .. } => commands::product(&config),
        Command::Structure => commands::structure(&config),
        Command::Verify { .. } => commands::verify(&config),
        Command::LimitScan { .. } => commands::limit_scan(&config),
        Command::GridDump => commands::grid_dump(&config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("starlab: {e}");
            ExitCode::from(e.code())
        }
    }
}
