use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::output::{Format, OUT_DIR_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "dab",
    version,
    about = "Capacity-achieving finite-support inputs for Gaussian channels"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Result format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,

    /// Result file (`-` for standard output).
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    /// Directory for `<command>.<format>` when --output is absent.
    #[arg(long, env = OUT_DIR_ENV, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Quadrature nodes per integral.
    #[arg(long, default_value_t = 2001, global = true)]
    pub quad_nodes: usize,

    /// Integration window half-width beyond the extreme mass points, in
    /// noise standard deviations.
    #[arg(long, default_value_t = 10.0, global = true)]
    pub quad_radius: f64,

    /// Worker threads for independent chains (0 = all cores).
    #[arg(long, default_value_t = 0, global = true)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplitude-constrained capacity at one peak SNR.
    AcSolve {
        #[arg(long, allow_hyphen_values = true)]
        peak_snr_db: f64,
        #[command(flatten)]
        ac: AcFlags,
    },
    /// Warm-started amplitude-constrained sweep over peak SNR.
    AcSweep {
        /// `start:end:step` in dB.
        #[arg(long, allow_hyphen_values = true)]
        peak_snr_db: String,
        #[command(flatten)]
        ac: AcFlags,
    },
    /// Best distribution of a fixed cardinality under a power limit.
    PcSolve {
        #[arg(long, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long)]
        cardinality: usize,
        /// Average power limit (noise power follows from the SNR).
        #[arg(long, default_value_t = 1.0)]
        power: f64,
        /// JSON file holding a starting `{locations, probabilities}`.
        #[arg(long)]
        init: Option<PathBuf>,
        #[command(flatten)]
        pc: PcFlags,
    },
    /// Cardinality x SNR grid at unit power, one warm-started chain per
    /// cardinality.
    PcSweep {
        /// `start:end:step` in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr_db: String,
        /// `lo:hi`, a single value, or a comma list.
        #[arg(long)]
        cards: String,
        /// Also select the smallest cardinality within this gap (JSON only).
        #[arg(long)]
        gap: Option<f64>,
        /// Directory for per-chain progress; existing files are resumed.
        #[arg(long)]
        checkpoint_dir: Option<PathBuf>,
        #[command(flatten)]
        pc: PcFlags,
    },
    /// Smallest cardinality per SNR within a capacity gap, from pc-sweep
    /// output (JSON or CSV).
    Select {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        gap: f64,
    },
    /// Equilattice constellation, its rate and the Gaussian-input capacity.
    Baseline {
        /// Number of points.
        #[arg(long)]
        equilattice: usize,
        #[arg(long, default_value_t = 1.0)]
        power: f64,
        /// Evaluate rate and capacity at this SNR.
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct AcFlags {
    /// Required gap between the capacity bounds (bits).
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_outer_iters: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PcFlags {
    /// Stop once a round of pair moves gains less than this (bits).
    #[arg(long, default_value_t = 1e-5)]
    pub delta_i_tol: f64,
    #[arg(long, default_value_t = 400)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub power_tol: f64,
}
