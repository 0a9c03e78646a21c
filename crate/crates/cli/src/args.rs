use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mather", version, about = "Workbench for diffeomorphisms of the line and the fixed-point reduction")]
#[command(after_help = "Tolerance overrides: --tol-<name> <value>, for example --tol-fixed-point 1e-7.\n\
Run `mather tolerances` to list the names and their defaults.")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Jet order.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Modulus: holder:S, omegaz:SIGMA,TAU or file:<path>.
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// Plateau parameter A.
    #[arg(long = "A", global = true)]
    pub a: Option<u32>,
    /// Initial node count of maps built here, and row count of sampled tables.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, or a single .json/.csv file for one-output commands.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect a modulus of continuity.
    Modulus {
        #[command(subcommand)]
        cmd: ModulusCmd,
    },
    /// Build and combine sampled diffeomorphisms.
    Diffeo {
        #[command(subcommand)]
        cmd: DiffeoCmd,
    },
    /// Norms and metrics of maps.
    Norms {
        #[command(subcommand)]
        cmd: NormsCmd,
    },
    /// The plateau flow and its chart.
    Flow {
        #[command(subcommand)]
        cmd: FlowCmd,
    },
    /// Rolling up, spreading, the reduction and the conjugator.
    Mather {
        #[command(subcommand)]
        cmd: MatherCmd,
    },
    /// Fixed-point search and certificate replay.
    Perfect {
        #[command(subcommand)]
        cmd: PerfectCmd,
    },
    /// Run acceptance criteria and write report.json and slacks.csv.
    Verify {
        /// `all` or a comma-separated list of criterion ids.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Write the CSV tables behind the plots.
    EmitPlots {
        /// Comma-separated subset of sweep,tameness,lcm,trace.
        #[arg(long, default_value = "sweep,tameness,lcm,trace")]
        tables: String,
    },
    /// List the tolerance names with their default values.
    Tolerances,
}

#[derive(Debug, Subcommand)]
pub enum ModulusCmd {
    /// Tameness verdict, modulus laws and concavity defect.
    Analyze {
        /// Analyze x^S instead of --alpha.
        #[arg(long)]
        holder: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DiffeoCmd {
    /// Sample a named preset.
    Preset {
        /// smooth_bump_displacement, scaled_family or periodic_wiggle.
        name: String,
        /// JSON parameters; k and n default to --k and --grid-n.
        #[arg(long, default_value = "{}")]
        params: String,
    },
    /// f∘g, with f given first.
    Compose {
        #[arg(long = "in", num_args = 1..=2, action = clap::ArgAction::Append, required = true)]
        inputs: Vec<PathBuf>,
    },
    Inverse {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Factor a compact map along a cover of its support.
    Fragment {
        #[arg(long = "in")]
        input: PathBuf,
        /// Cover elements as lo:hi pairs, for example -2:0.5,-0.5:2.
        #[arg(long, allow_hyphen_values = true)]
        cover: String,
        #[arg(long, default_value_t = 1e-8)]
        reconstruction_tol: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum NormsCmd {
    /// Sup and modulus seminorms of every derivative of f − Id.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also test membership in the C^k and C^{k,α} balls of this radius.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Distance between two maps.
    Metric {
        #[arg(long = "in", num_args = 1..=2, action = clap::ArgAction::Append, required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "ck-alpha")]
        kind: MetricArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    C0,
    Ck,
    CkAlpha,
}

#[derive(Debug, Subcommand)]
pub enum FlowCmd {
    /// CSV of x, rho, tau_t and the chart over [-2A-1.5, 2A+1.5].
    Table {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum MatherCmd {
    /// Roll a compact map up into a periodic one.
    Gamma {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Spread a periodic map over B windows.
    Omega {
        #[arg(long = "in")]
        input: PathBuf,
        /// Window count; defaults to the interval rule for --k and --A.
        #[arg(long = "B")]
        b: Option<usize>,
    },
    /// The reduction of one map, or a sweep over the scaled family.
    Psi {
        #[arg(long = "in", conflicts_with = "sweep", required_unless_present = "sweep")]
        input: Option<PathBuf>,
        /// Comma-separated values of A; writes psi_sweep.csv.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// The conjugator between two maps supported in the plateau.
    Lambda {
        #[arg(long = "in", num_args = 1..=2, action = clap::ArgAction::Append, required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PerfectCmd {
    /// Search for u₀ with Θu₀ = u₀ and write the certificate chain.
    Fixpoint {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Replay a certificate chain.
    Verify {
        chain: PathBuf,
        /// Replay threshold; defaults to the chain's certificate tolerance.
        #[arg(long)]
        threshold: Option<f64>,
    },
}
