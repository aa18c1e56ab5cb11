use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{FileConfig, Format};

/// Exact aggregate distributions, allocations and tree-shape orders for
/// tree-structured Poisson Markov random fields.
///
/// Model files are JSON: {"d": 3, "edges": [[1,2],[2,3]], "lambda": 1.0, "alpha": 0.5},
/// with "alpha" either one number or a map {"1-2": 0.5, "2-3": 0.7}.
/// Exit codes: 0 ok, 2 usage, 3 input, 4 numerical tolerance failure.
#[derive(Parser, Debug)]
#[command(name = "mpmrf", version)]
struct Cli {
    /// TOML file with defaults for any of: model, tol, seed, n_samples,
    /// alpha_grid, kappa, lambda, output, format.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pmf of the sum M as CSV rows `k,p`, closed by a `tail_mass,<value>` line.
    Pmf(ModelArgs),
    /// Per-vertex covariance with M and TVaR contributions, or with
    /// `--by-k` the conditional means E[N_v | M = k].
    Allocate(AllocateArgs),
    /// Compare two vertices of one model, or the shapes of two trees.
    Compare(CompareArgs),
    /// Poset of all d-vertex shapes as a DOT Hasse diagram or JSON.
    Poset(PosetArgs),
    /// Monte Carlo check of the sampler against the analytic values.
    Mc(McArgs),
    /// Adjacency and Laplacian diagnostics of a tree.
    Spectral(SpectralArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Model JSON file.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Truncation tolerance for the aggregate pmf, in (0, 1e-3].
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct AllocateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Levels for TVaR contributions.
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    /// Emit E[N_v | M = k] for every k instead of the per-vertex summary.
    #[arg(long)]
    by_k: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Second tree (tree or model JSON); compares shapes.
    #[arg(long, value_name = "FILE", conflicts_with = "vertices")]
    tree2: Option<PathBuf>,
    /// Two vertices `v,w` of the model; compares (N_v, M) with (N_w, M).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    vertices: Option<Vec<usize>>,
    /// Grid used when the comparison goes through the shape poset.
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct PosetArgs {
    /// Number of vertices, 4 to 9.
    #[arg(long)]
    d: usize,
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Also write the JSON form to this file.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of draws.
    #[arg(long = "n-samples", short = 'n')]
    n_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Vertex the simulation starts from.
    #[arg(long, default_value_t = 1)]
    root: usize,
    /// Exit with code 4 when the total variation distance reaches this value.
    #[arg(long)]
    max_tv: Option<f64>,
}

#[derive(Args, Debug)]
struct SpectralArgs {
    /// Tree or model JSON file.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Second tree: adds cospectrality and degree majorization.
    #[arg(long, value_name = "FILE")]
    tree2: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Input(_) => "input",
            Failure::Numerical(_) => "numerical",
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<mpmrf::Error> for Failure {
    fn from(e: mpmrf::Error) -> Self {
        use mpmrf::Error as E;
        match e {
            E::Numerical(_) | E::MeansDiffer(..) | E::NegativeCoefficient { .. } | E::Antisymmetry(..) => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn report(f: &Failure) -> ExitCode {
    let line = serde_json::json!({ "error": f.kind(), "message": f.message() });
    eprintln!("{line}");
    ExitCode::from(f.code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return report(&Failure::Usage(first));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let output = cli.output.clone().or_else(|| file.output.clone());
    let format = cli.format.or(file.format);
    let (text, status) = commands::dispatch(cli.command, &file, format)?;
    match output {
        Some(path) => std::fs::write(&path, text.as_bytes())
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Input(e.to_string()))?;
        }
    }
    status
}
