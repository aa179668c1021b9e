use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use inbl_core::collapse::{DEFAULT_MAX_WAIT, DEFAULT_TAU};
use inbl_core::{FlipProb, PartnerProbe, RtwScheme};

#[derive(Parser, Debug)]
#[command(name = "inbl", version, about = "Noise-based logic search protocols and experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Noise-bits M. Must agree with a `bits` header when the input has one.
    #[arg(long, global = true)]
    pub bits: Option<u32>,
    /// Master seed of the reference system.
    #[arg(long, global = true, env = "INBL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Telegraph-wave amplitudes: asym (High ±1, Low ±1/2) or sym (±1).
    #[arg(long, global = true, default_value = "asym")]
    pub scheme: RtwScheme,
    /// Per-clock sign-flip probability, as `p/q` or a decimal.
    #[arg(long = "flip-prob", global = true, default_value = "1/2")]
    pub flip_prob: FlipProb,
    /// Fragment-search observation window in clocks.
    #[arg(long, global = true, default_value_t = DEFAULT_TAU)]
    pub tau: u32,
    /// Longest wait for a clock with nonzero output.
    #[arg(long = "max-wait", global = true, default_value_t = DEFAULT_MAX_WAIT)]
    pub max_wait: u64,
    /// First clock a protocol or experiment looks at.
    #[arg(long, global = true, default_value_t = 0)]
    pub start: u64,
    /// Recompute every verdict with the brute-force expansion.
    #[arg(long = "oracle-check", global = true)]
    pub oracle_check: bool,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    pub output: Output,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Output {
    Json,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    /// Ground R_20 to resolve each partner.
    Low,
    /// Ground R_21 to resolve each partner.
    High,
}

impl From<Probe> for PartnerProbe {
    fn from(p: Probe) -> Self {
        match p {
            Probe::Low => PartnerProbe::GroundLow,
            Probe::High => PartnerProbe::GroundHigh,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Membership of a full string (exact) or a fragment (one-sided error).
    Search {
        /// Superposition file.
        file: PathBuf,
        /// Full bitstring, bit 1 leftmost.
        #[arg(long, conflicts_with = "fragments", required_unless_present = "fragments")]
        string: Option<String>,
        /// Partial assignment such as `1=0,2=0,4=0`.
        #[arg(long)]
        fragments: Option<String>,
    },
    /// Identify which two-bit entangled configuration a 2-bit superposition holds.
    Entangle {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Probe::Low)]
        probe: Probe,
    },
    /// Number stored under a name.
    Lookup {
        /// Phonebook file.
        book: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Name holding a number (one-to-one books only).
    Inverse {
        book: PathBuf,
        #[arg(long)]
        number: String,
    },
    /// Dump the string/coefficient table of a superposition.
    Expand {
        file: PathBuf,
        /// Print only the sorted `string coefficient` lines.
        #[arg(long)]
        raw: bool,
    },
    /// Fraction of zero-output clocks and the zero-run length histogram.
    ZeroStats {
        /// Superposition file; the Universe over `--bits` when omitted.
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        clocks: u64,
        /// Smallest histogram bin used for the log-slope fit.
        #[arg(long = "min-count", default_value_t = 30)]
        min_count: u64,
    },
    /// Normalised cross-correlation of two signals.
    Crosscorr {
        a: String,
        b: String,
        /// Read A and B as full bitstrings instead of file paths.
        #[arg(long)]
        strings: bool,
        #[arg(long, default_value_t = 1_000_000)]
        clocks: u64,
    },
    /// Fragment-search false-negative rate against 2^-tau on a canceling pair.
    ErrorScaling {
        #[arg(long = "tau-min", default_value_t = 1)]
        tau_min: u32,
        #[arg(long = "tau-max", default_value_t = 8)]
        tau_max: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Complexity figures for an M-bit search (`--bits`) and an N/S phonebook.
    Speedup {
        #[arg(long, default_value_t = 8)]
        names: u32,
        #[arg(long, default_value_t = 8)]
        numbers: u32,
    },
}
