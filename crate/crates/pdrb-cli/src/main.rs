//! `pdrb` — persistence-diagram barycenter toolbox.
//!
//! Subcommands extract diagrams from scalar grids, compute pairwise
//! W_q distances, robust barycenters, k-means clusterings, dictionary
//! encodings with planar layouts, and SVG plots. Every command writes a
//! `*.manifest.json` beside its outputs recording the exact parameters,
//! and is deterministic given (inputs, flags, seed): re-runs produce
//! byte-identical files. All randomness flows from `--seed` through the
//! ChaCha12 generator, so results reproduce across platforms.

mod commands;
mod formats;
mod render;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use pdrb_core::Connectivity;

/// A command failure carrying its process exit code:
/// 1 = I/O or input-data error, 2 = parameter contract violation,
/// 3 = numerical failure.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    pub fn contract(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<pdrb_core::Error> for Failure {
    fn from(e: pdrb_core::Error) -> Self {
        use pdrb_core::Error::*;
        let code = match &e {
            InvalidExponent(_)
            | NegativeThreshold(_)
            | InvalidWeights(_)
            | InvalidArgument(_)
            | SizeMismatch(_)
            | TooLarge { .. } => 2,
            NonFinite(_) | BelowDiagonal { .. } | DidNotConverge { .. } => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Conn {
    /// All grid cells within Chebyshev distance 1 are adjacent.
    Full,
    /// Only axis neighbours are adjacent.
    Axis,
}

impl From<Conn> for Connectivity {
    fn from(c: Conn) -> Connectivity {
        match c {
            Conn::Full => Connectivity::Full,
            Conn::Axis => Connectivity::Axis,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "pdrb",
    version,
    about = "Robust W_q barycenters, clustering and encoding of persistence diagrams",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extract maxima persistence pairs from a scalar grid file.
    Extract {
        /// Grid file: first line `dims: d1 d2 [d3]`, then row-major samples.
        grid: PathBuf,
        /// Grid adjacency rule.
        #[arg(long, value_enum, default_value_t = Conn::Full)]
        connectivity: Conn,
        /// Keep only the k most persistent pairs.
        #[arg(long = "top-k")]
        top_k: Option<usize>,
        /// Drop pairs with persistence at or below this threshold.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output diagram CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise W_q distance matrix of diagram files.
    Dist {
        /// Diagram CSV files (at least one).
        #[arg(required = true)]
        diagrams: Vec<PathBuf>,
        /// Metric exponent, q >= 1.
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Also write an SVG heatmap beside the CSV.
        #[arg(long)]
        svg: bool,
        /// Output matrix CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// W_q barycenter of diagram files.
    Bary {
        /// Diagram CSV files (at least one).
        #[arg(required = true)]
        diagrams: Vec<PathBuf>,
        /// Metric exponent; q > 1 unless --unsafe-q1.
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Outer iteration cap.
        #[arg(long = "T")]
        iterations: Option<usize>,
        /// Persistence threshold pruning the final barycenter.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Per-input weights (comma separated, e.g. 0.5,0.3,0.2).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Allow the numerically delicate q = 1.
        #[arg(long = "unsafe-q1")]
        unsafe_q1: bool,
        /// Output barycenter CSV (the energy trace goes to *.trace.json).
        #[arg(long)]
        out: PathBuf,
    },
    /// k-means clustering of diagram files under W_q.
    Cluster {
        /// Diagram CSV files (at least one).
        #[arg(required = true)]
        diagrams: Vec<PathBuf>,
        /// Number of clusters, 1 <= k <= number of diagrams.
        #[arg(long)]
        k: usize,
        /// Metric exponent; q > 1 unless --unsafe-q1.
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Seed of the centroid seeding draw.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cap on assignment/update rounds.
        #[arg(long = "T")]
        iterations: Option<usize>,
        /// Allow the numerically delicate q = 1.
        #[arg(long = "unsafe-q1")]
        unsafe_q1: bool,
        /// Output labels CSV (centroids go to *.centroid-<i>.csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn an m-atom dictionary encoding of diagram files.
    Encode {
        /// Diagram CSV files (at least one).
        #[arg(required = true)]
        diagrams: Vec<PathBuf>,
        /// Number of atoms, m >= 2.
        #[arg(long)]
        m: usize,
        /// Metric exponent, q > 1.
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Seed of the clustering-based initialisation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Epoch cap.
        #[arg(long = "T")]
        iterations: Option<usize>,
        /// Output bundle JSON (atoms go to *.atom-<j>.csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Planar layout of a three-atom encoding bundle.
    Layout {
        /// Bundle JSON produced by `encode` with --m 3.
        bundle: PathBuf,
        /// Also write an SVG scatter beside the CSV.
        #[arg(long)]
        svg: bool,
        /// Output layout CSV (`x,y,label` per input).
        #[arg(long)]
        out: PathBuf,
    },
    /// SVG scatter plot of diagram files.
    Plot {
        /// Diagram CSV files (at least one).
        #[arg(required = true)]
        diagrams: Vec<PathBuf>,
        /// Output SVG.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the synthetic outlier ensemble as diagram files.
    Synth {
        /// Ensemble description JSON; omitted means the built-in default
        /// (three clusters of four members, two spiked members).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Seed of the shape jitter draw.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for diagram CSVs, labels.csv and spec.json.
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Outcome<()> {
    match cli.command {
        Cmd::Extract {
            grid,
            connectivity,
            top_k,
            epsilon,
            out,
        } => commands::cmd_extract(&grid, connectivity.into(), top_k, epsilon, &out),
        Cmd::Dist {
            diagrams,
            q,
            svg,
            out,
        } => commands::cmd_dist(&diagrams, q, svg, &out),
        Cmd::Bary {
            diagrams,
            q,
            iterations,
            epsilon,
            weights,
            unsafe_q1,
            out,
        } => commands::cmd_bary(&diagrams, q, iterations, epsilon, weights, unsafe_q1, &out),
        Cmd::Cluster {
            diagrams,
            k,
            q,
            seed,
            iterations,
            unsafe_q1,
            out,
        } => commands::cmd_cluster(&diagrams, k, q, seed, iterations, unsafe_q1, &out),
        Cmd::Encode {
            diagrams,
            m,
            q,
            seed,
            iterations,
            out,
        } => commands::cmd_encode(&diagrams, m, q, seed, iterations, &out),
        Cmd::Layout { bundle, svg, out } => commands::cmd_layout(&bundle, svg, &out),
        Cmd::Plot { diagrams, out } => commands::cmd_plot(&diagrams, &out),
        Cmd::Synth {
            spec,
            seed,
            out_dir,
        } => commands::cmd_synth(spec.as_deref(), seed, &out_dir),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = dispatch(cli) {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}
