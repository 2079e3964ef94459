use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Jsonl,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Parser)]
#[command(name = "collatz", version, about = "Experiments on the 3x+1 function and its relatives")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Output format (default json).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: COLLATZ_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// key = value file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed (default 1)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Steps before a trajectory is reported unresolved
    #[arg(long, global = true)]
    pub step_limit: Option<u64>,
    /// Bit size at which a trajectory is reported unresolved
    #[arg(long, global = true)]
    pub magnitude_bits: Option<u64>,
    /// Allow long-running computations.
    #[arg(long, global = true)]
    pub slow: bool,
    /// Map name or `d=..` definition (default T).
    #[arg(long, global = true)]
    pub map: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that every start up to N reaches 1.
    Verify(VerifyArgs),
    /// Orbit statistics of one value or a range.
    Stats(StatsArgs),
    /// Excursion records or equal-height runs.
    Records(RecordsArgs),
    /// Stopping-time densities.
    Density(DensityArgs),
    /// Coefficient stopping time.
    Kappa(KappaArgs),
    /// Cycle search, cycle algebra and period bounds
    #[command(subcommand)]
    Cycles(CyclesCmd),
    /// Inverse iteration trees.
    Tree(TreeArgs),
    /// Count n <= x whose orbit contains a.
    Pi(PiArgs),
    /// The 2-adic conjugacy map mod 2^n
    #[command(subcommand)]
    Twoadic(TwoadicCmd),
    /// FRACTRAN programs
    #[command(subcommand)]
    Fractran(FractranCmd),
    /// Residue-class Markov chains of affine maps
    #[command(subcommand)]
    Markov(MarkovCmd),
    /// Random-walk and branching models
    #[command(subcommand)]
    Stochastic(StochasticCmd),
    /// Spiral permutations, Z-numbers, 3-smooth sums
    #[command(subcommand)]
    Aux(AuxCmd),
    /// Continued fraction of log2 3 or of a rational.
    Cf(CfArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = crate::numparse::parse_u64)]
    pub to: u64,
    /// Sieve depth for T; 0 iterates every start.
    #[arg(long, default_value_t = 16)]
    pub sieve: u32,
    /// Target value for maps other than T.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub target: i128,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// A single starting value, e.g. 27 or 2^100+1.
    #[arg(value_parser = crate::numparse::parse_biguint)]
    pub n: Option<num_bigint::BigUint>,
    #[arg(long, value_parser = crate::numparse::parse_u64, requires = "to", conflicts_with = "n")]
    pub from: Option<u64>,
    #[arg(long, value_parser = crate::numparse::parse_u64)]
    pub to: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecordKind {
    Excursion,
    Heights,
}

#[derive(Debug, Args)]
pub struct RecordsArgs {
    #[arg(long, value_enum, default_value_t = RecordKind::Excursion)]
    pub kind: RecordKind,
    /// Upper end of the excursion sweep.
    #[arg(long, value_parser = crate::numparse::parse_u64)]
    pub to: Option<u64>,
    /// First start of the equal-height window.
    #[arg(long, value_parser = crate::numparse::parse_biguint)]
    pub from: Option<num_bigint::BigUint>,
    #[arg(long, value_parser = crate::numparse::parse_u64, default_value = "1000")]
    pub count: u64,
    #[arg(long, default_value_t = 2)]
    pub min_len: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityKind {
    /// Exact densities of stopping time k.
    Stopping,
    /// Fraction of n with some iterate below n^beta.
    BelowPower,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long, value_enum, default_value_t = DensityKind::Stopping)]
    pub kind: DensityKind,
    #[arg(long, default_value_t = 16)]
    pub k: u32,
    /// Exponent as p/q.
    #[arg(long, default_value = "1/2")]
    pub beta: String,
    #[arg(long, value_parser = crate::numparse::parse_u64, default_value = "100000")]
    pub to: u64,
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    #[arg(value_parser = crate::numparse::parse_biguint)]
    pub n: Option<num_bigint::BigUint>,
    /// Certify kappa = sigma for every kappa up to this bound.
    #[arg(long, conflicts_with = "n")]
    pub verify: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum CyclesCmd {
    /// Every cycle reached from a range of starts.
    Find {
        #[arg(long, value_parser = crate::numparse::parse_i128, allow_negative_numbers = true)]
        from: i128,
        #[arg(long, value_parser = crate::numparse::parse_i128, allow_negative_numbers = true)]
        to: i128,
    },
    /// Rational fixed point of a parity word under (3x+d)/2, x/2.
    Value {
        #[arg(long)]
        parity: String,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        d: i64,
    },
    /// Least possible period of a cycle whose elements all exceed D.
    Bound {
        #[arg(long, value_parser = crate::numparse::parse_biguint)]
        verified: num_bigint::BigUint,
        #[arg(long, value_parser = crate::numparse::parse_u64, default_value = "1e9")]
        cutoff: u64,
        /// Skip the minimal-element refinement.
        #[arg(long)]
        window_only: bool,
        #[arg(long, default_value_t = 1000)]
        list_limit: usize,
    },
    /// Solutions of (2^(k+l) - 3^k) h = 2^l - 1.
    Circuit {
        #[arg(long, default_value_t = 60)]
        k_max: u32,
        #[arg(long, default_value_t = 60)]
        l_max: u32,
        #[arg(long, value_parser = crate::numparse::parse_bigint, allow_negative_numbers = true, default_value = "-10^30")]
        h_lo: num_bigint::BigInt,
        #[arg(long, value_parser = crate::numparse::parse_bigint, allow_negative_numbers = true, default_value = "10^30")]
        h_hi: num_bigint::BigInt,
    },
    /// Integer-valued rational cycles of 3x+d up to a period.
    Rational {
        #[arg(long, allow_negative_numbers = true)]
        d: i64,
        #[arg(long, default_value_t = 12)]
        max_period: usize,
    },
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[arg(long, value_parser = crate::numparse::parse_i128, allow_negative_numbers = true)]
    pub root: Option<i128>,
    #[arg(long)]
    pub depth: u32,
    /// Keep every node and emit the edge list.
    #[arg(long)]
    pub full: bool,
    /// Summarize leaf counts over roots in [lo, hi].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], conflicts_with = "root")]
    pub spread: Option<Vec<u64>>,
    /// Per-class estimates mod 3^ell in spread mode.
    #[arg(long)]
    pub classes: Option<u32>,
}

#[derive(Debug, Args)]
pub struct PiArgs {
    #[arg(long, value_parser = crate::numparse::parse_i64, allow_negative_numbers = true)]
    pub a: i64,
    #[arg(long, value_parser = crate::numparse::parse_u64)]
    pub x: u64,
}

#[derive(Debug, Subcommand)]
pub enum TwoadicCmd {
    /// Order and cycle structure of Phi mod 2^n.
    Order {
        #[arg(long)]
        n: u32,
    },
    /// Fixed points of Phi mod 2^n.
    Fixed {
        #[arg(long)]
        n: u32,
    },
    /// Exhaustive conjugacy check mod 2^n.
    Check {
        #[arg(long)]
        n: u32,
    },
}

#[derive(Debug, Args)]
pub struct ProgramArgs {
    /// Program file of fractions such as `17/91 78/85`.
    #[arg(long, required_unless_present = "primegame")]
    pub program: Option<PathBuf>,
    /// Use the built-in prime-producing program.
    #[arg(long)]
    pub primegame: bool,
    #[arg(long, value_parser = crate::numparse::parse_biguint, default_value = "2")]
    pub start: num_bigint::BigUint,
}

#[derive(Debug, Subcommand)]
pub enum FractranCmd {
    /// Run until enough power-of-two outputs appear.
    Run {
        #[command(flatten)]
        program: ProgramArgs,
        /// Number of power-of-two outputs to collect.
        #[arg(long, default_value_t = 10)]
        hits: usize,
        #[arg(long, value_parser = crate::numparse::parse_u64, default_value = "1e8")]
        max_steps: u64,
    },
    /// Trace individual steps.
    Step {
        #[command(flatten)]
        program: ProgramArgs,
        #[arg(long, default_value_t = 20)]
        steps: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum MarkovCmd {
    /// Transition matrix of the map on residues mod m.
    Matrix {
        #[arg(long)]
        modulus: u64,
        /// Also report whether the k-th power is uniform.
        #[arg(long)]
        power: Option<u32>,
    },
    /// Ergodic classes, stationary vectors and growth constants.
    Analyze {
        #[arg(long)]
        modulus: u64,
        /// Monte-Carlo check of the growth rate with this many trials.
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, default_value_t = 200)]
        sample_steps: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum StochasticCmd {
    /// Hitting times of the random-walk model.
    Rw {
        #[arg(long, default_value_t = 100.0)]
        log_n: f64,
        #[arg(long, value_parser = crate::numparse::parse_u64, default_value = "100000")]
        trials: u64,
        /// Write the histogram rows instead of the summary (csv/jsonl).
        #[arg(long)]
        histogram: bool,
    },
    /// Leaf counts of the branching-process model.
    Bp {
        #[arg(long, default_value_t = 30)]
        k: u32,
        #[arg(long, value_parser = crate::numparse::parse_u64, default_value = "10000")]
        trials: u64,
    },
    /// The large-deviation constant c0.
    C0,
}

#[derive(Debug, Subcommand)]
pub enum AuxCmd {
    /// Spiral-permutation admissibility.
    Queneau {
        #[arg(long, value_parser = crate::numparse::parse_u64, default_value = "100")]
        to: u64,
        /// Cross-check the order criterion up to this n.
        #[arg(long, value_parser = crate::numparse::parse_u64)]
        roubaud: Option<u64>,
    },
    /// Survivors of the Z-number sieve.
    Znumber {
        #[arg(long, value_parser = crate::numparse::parse_u64, default_value = "1000000")]
        x: u64,
        #[arg(long, default_value_t = 1.0)]
        depth: f64,
        #[arg(long, default_value_t = 1.0)]
        fit_depth: f64,
    },
    /// The ideal-Waring inequality over a range of k.
    Stemmler {
        #[arg(long, default_value_t = 1)]
        k_lo: u64,
        #[arg(long, default_value_t = 1000)]
        k_hi: u64,
        #[arg(long)]
        rows: bool,
    },
    /// Primitive 3-smooth representations.
    Smooth {
        /// Enumerate representations of n.
        #[arg(long, value_parser = crate::numparse::parse_u64, required_unless_present = "m")]
        n: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        limit: usize,
        /// Search a ladder witness that m reaches 1.
        #[arg(long, value_parser = crate::numparse::parse_u64, conflicts_with = "n")]
        m: Option<u64>,
        #[arg(long, default_value_t = 120)]
        e_max: u32,
        #[arg(long, default_value_t = 70)]
        f_max: u32,
    },
}

#[derive(Debug, Args)]
pub struct CfArgs {
    /// Number of partial quotients of log2 3.
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    /// Expand p/q instead.
    #[arg(long)]
    pub rational: Option<String>,
    /// Include intermediate convergents.
    #[arg(long)]
    pub intermediate: bool,
}
