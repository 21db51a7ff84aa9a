use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "colphase", version, about = "Phase analysis and exact oracles for hypergraph colouring")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Number of colours.
    #[arg(long, global = true)]
    pub q: Option<u32>,
    /// Halving factor: each vertex becomes k clones.
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// Tree degree d = Delta - 1; defaults to 5 q^k in the analytical commands.
    #[arg(long, global = true, conflicts_with = "delta")]
    pub d: Option<u32>,
    /// Graph or hypergraph degree Delta.
    #[arg(long, global = true)]
    pub delta: Option<u32>,
    #[arg(long, global = true, default_value_t = 256)]
    pub precision_bits: u32,
    /// Absolute root-finding tolerance; derived from the precision when absent.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// RNG seed; for `gadget trim` and `gadget disequality` the seed instance file.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Cap on enumerated states.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    pub budget: u64,
    /// Directory receiving output files and manifest.json.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact enumeration oracles.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Fixpoints, dominance and stability.
    #[command(subcommand)]
    Phase(PhaseCmd),
    /// Scalar landmarks, curve traces and the near-diagonal intersection.
    #[command(subcommand)]
    Curves(CurvesCmd),
    /// First-moment bounds and grid maximisation.
    #[command(subcommand)]
    Firstmoment(FirstMomentCmd),
    /// Gadget construction and verification.
    #[command(subcommand)]
    Gadget(GadgetCmd),
}

#[derive(Subcommand, Debug)]
pub enum OracleCmd {
    /// Proper q-colourings of a hypergraph.
    CountColourings {
        #[arg(long)]
        hypergraph: PathBuf,
    },
    /// Z_B of a regular graph, exactly.
    PartitionZb {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Antiferromagnetic Potts partition function; exact at the gadget weight by default.
    Potts {
        #[arg(long)]
        graph: PathBuf,
        /// Edge weight for monochromatic edges, evaluated in double precision.
        #[arg(long)]
        weight: Option<f64>,
    },
    /// Checks Z_B(G) = Z_col(H_G) for the halved hypergraph.
    VerifyHalving {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    All,
    HalfHalf,
    Q00Sym,
    Q00Asym,
    Type,
}

#[derive(Subcommand, Debug)]
pub enum PhaseCmd {
    /// Solves the named fixpoint families, or one type with --family type --type a,b,c.
    Fixpoints {
        #[arg(long, value_enum, default_value_t = Family::All)]
        family: Family,
        #[arg(long = "type", value_delimiter = ',')]
        qtype: Option<Vec<f64>>,
        #[arg(long, default_value_t = 4)]
        random_starts: usize,
    },
    /// Ranks all candidate fixpoints by the reduced objective.
    Dominance {
        #[arg(long, default_value_t = 4)]
        random_starts: usize,
    },
    /// Classifies the fixpoints stored in a JSON file.
    Stability {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum CurvesCmd {
    /// CSV of the P1+ branch of f1 = 0 and the f2 = 0 curve.
    Trace {
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// The intersection of P1+ with f2 = 0 near the diagonal.
    Intersect,
    /// The certified scalar landmarks.
    Landmarks,
    /// The exterior-point checks at d = 5 q^k.
    Exterior,
}

#[derive(Subcommand, Debug)]
pub enum FirstMomentCmd {
    /// The closed-form upper bound at one degree.
    Bound {
        #[arg(long = "K")]
        arity: u32,
    },
    /// Grid maximisation of F over the simplex.
    Maximize {
        #[arg(long = "K")]
        arity: u32,
        #[arg(long, default_value_t = 60)]
        resolution: u32,
        /// Also write the landscape CSV at this resolution.
        #[arg(long)]
        landscape: Option<u32>,
    },
    /// Smallest degree at which the gadget construction applies.
    Threshold {
        #[arg(long = "K")]
        arity: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum GadgetCmd {
    /// Trims an uncolourable hypergraph to a minimal one.
    Trim {
        /// Seed instance; `--seed <file>` is accepted as well.
        #[arg(long)]
        seed_file: Option<PathBuf>,
    },
    /// Builds and exhaustively verifies a disequality gadget.
    Disequality {
        /// Seed instance; `--seed <file>` is accepted as well.
        #[arg(long)]
        seed_file: Option<PathBuf>,
    },
    /// Builds an equality gadget from a disequality gadget (q = 2).
    Equality {
        #[arg(long)]
        gadget: PathBuf,
    },
    /// Replaces every graph edge by disequality gadgets and checks the Potts identity.
    PottsReplace {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        gadget: PathBuf,
    },
    /// Re-derives the gadget property and C0 by enumeration.
    Verify {
        #[arg(long)]
        gadget: PathBuf,
    },
}
