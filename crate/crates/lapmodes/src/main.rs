use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lapmodes::cli::{
    cmd_assign, cmd_check, cmd_cluster, cmd_project, AssignOptions, CheckOptions, ClusterOptions,
    OutputFormat, ProjectOptions,
};

#[derive(Parser)]
#[command(
    name = "lapmodes",
    version,
    about = "Simplex projection and Laplacian K-modes clustering over CSV files"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Project each row of a CSV matrix onto the simplex
    Project {
        /// Input CSV (N x D, no header unless --skip-header)
        input: PathBuf,
        /// Output CSV of projected rows
        #[arg(short, long)]
        output: PathBuf,
        /// Simplex mass
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Skip one header row
        #[arg(long)]
        skip_header: bool,
        /// Also write per-row {row, rho, lambda} JSON lines here
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Fit a Laplacian K-modes model on a CSV dataset
    Cluster {
        /// Input CSV dataset (rows are points)
        input: PathBuf,
        /// Output model JSON
        #[arg(short, long)]
        output: PathBuf,
        /// Run report JSON (objective trace, iterations, wall time);
        /// printed to stdout when omitted
        #[arg(long)]
        report: Option<PathBuf>,
        /// Number of clusters
        #[arg(short, long)]
        k: usize,
        /// Kernel bandwidth for the mode density terms
        #[arg(long)]
        sigma: f64,
        /// Smoothing weight on the Laplacian penalty
        #[arg(long)]
        lambda_reg: f64,
        /// Gaussian bandwidth of the affinity graph
        #[arg(long)]
        bandwidth: f64,
        /// Optional kNN sparsification of the graph
        #[arg(long)]
        knn: Option<usize>,
        /// Inner solver iteration cap
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
        /// Outer alternation cap
        #[arg(long, default_value_t = 50)]
        outer_iters: usize,
        /// Inner solver residual tolerance
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Seeds the initial mode selection
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        skip_header: bool,
    },
    /// Assign new points with a trained model
    Assign {
        /// Query CSV (rows are points in the model's data space)
        input: PathBuf,
        /// Trained model JSON
        #[arg(short, long)]
        model: PathBuf,
        /// Output: one simplex vector per query row
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        skip_header: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Verify projected rows against the optimality conditions
    Check {
        /// CSV of original rows y
        y: PathBuf,
        /// CSV of claimed projections x
        x: PathBuf,
        /// Simplex mass
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Largest acceptable residual
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        skip_header: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Project {
            input,
            output,
            a,
            skip_header,
            report,
            format,
        } => cmd_project(&ProjectOptions {
            input,
            output,
            scale: a,
            skip_header,
            report,
            format: format.into(),
        }),
        Command::Cluster {
            input,
            output,
            report,
            k,
            sigma,
            lambda_reg,
            bandwidth,
            knn,
            max_iter,
            outer_iters,
            tol,
            seed,
            skip_header,
        } => cmd_cluster(&ClusterOptions {
            input,
            output,
            report,
            k,
            sigma,
            lambda_reg,
            bandwidth,
            knn,
            max_iter,
            outer_iters,
            tol,
            seed,
            skip_header,
        }),
        Command::Assign {
            input,
            model,
            output,
            skip_header,
            format,
        } => cmd_assign(&AssignOptions {
            model,
            input,
            output,
            skip_header,
            format: format.into(),
        }),
        Command::Check {
            y,
            x,
            a,
            tol,
            skip_header,
        } => cmd_check(&CheckOptions {
            y,
            x,
            scale: a,
            tol,
            skip_header,
        }),
    };

    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code as u8)
        }
    }
}
