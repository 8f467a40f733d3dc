use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "costodds", version, about = "Exact cost-bounded reachability for Markov chains and MDPs")]
pub struct Cli {
    /// Emit machine-readable JSON instead of `key: value` lines.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the structural assumptions on a model.
    Validate(ValidateArgs),
    /// Optimal probability of a cost formula, or a threshold decision.
    Solve(SolveArgs),
    /// Truncated distribution of the accumulated cost of a chain.
    Dist(DistArgs),
    /// Smallest budget meeting a threshold.
    Quantile(QuantileArgs),
    /// Emit an optimal scheduler, or evaluate a given one.
    Scheduler(SchedulerArgs),
    /// Build a reduction gadget.
    #[command(subcommand)]
    Gadget(GadgetCommand),
    /// Reference answers by exhaustive search.
    #[command(subcommand)]
    Brute(BruteCommand),
    /// Monte Carlo estimate under a scheduler.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuantArg {
    Exists,
    Forall,
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Read the model as a cost-utility process.
    #[arg(long)]
    pub utility: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Cost formula, e.g. `x<=5` or `3<=x<=7 | x>=10`.
    #[arg(long, required_unless_present = "max_cost")]
    pub formula: Option<String>,
    /// Optimization direction when no threshold is given.
    #[arg(long, value_enum, default_value = "max")]
    pub mode: ModeArg,
    /// Threshold `num/den`; turns the query into a decision.
    #[arg(long, requires = "formula")]
    pub tau: Option<String>,
    #[arg(long, value_enum, default_value = "exists")]
    pub quant: QuantArg,
    /// Solver strategy from the registry.
    #[arg(long, default_value = "auto")]
    pub solver: String,
    /// Write the optimal scheduler here.
    #[arg(long)]
    pub scheduler_out: Option<PathBuf>,
    /// Cost-utility query: cost bound `C`.
    #[arg(long, requires = "min_utility", conflicts_with = "formula")]
    pub max_cost: Option<String>,
    /// Cost-utility query: utility bound `U`.
    #[arg(long, requires = "max_cost")]
    pub min_utility: Option<String>,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Largest cost listed individually.
    #[arg(long)]
    pub budget: String,
}

#[derive(Debug, Args)]
pub struct QuantileArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub tau: String,
    #[arg(long, value_enum, default_value = "exists")]
    pub quant: QuantArg,
}

#[derive(Debug, Args)]
pub struct SchedulerArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub formula: String,
    #[arg(long, value_enum, default_value = "max")]
    pub mode: ModeArg,
    #[arg(long, default_value = "auto")]
    pub solver: String,
    /// Evaluate this scheduler file exactly instead of computing one.
    #[arg(long)]
    pub evaluate: Option<PathBuf>,
    /// Write the scheduler here instead of standard output.
    #[arg(long, conflicts_with = "evaluate")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Write the produced model here; the parameters go to standard output.
    /// Without it the model goes to standard output and the parameters to
    /// standard error.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CircuitArg {
    /// Circuit file (JSON).
    #[arg(long)]
    pub circuit: PathBuf,
}

#[derive(Debug, Args)]
pub struct QssArg {
    /// Comma-separated values `k1,...,kn`.
    #[arg(long, value_delimiter = ',', required_unless_present = "instance")]
    pub k: Vec<String>,
    #[arg(long = "T", required_unless_present = "instance")]
    pub t: Option<String>,
    /// Instance file `{"k": [...], "T": ...}` instead of flags.
    #[arg(long, conflicts_with_all = ["k", "t"])]
    pub instance: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GadgetCommand {
    /// Move a threshold to 1/2.
    Half {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        tau: String,
        /// A cost violating the formula.
        #[arg(long)]
        n0: String,
        /// A cost satisfying the formula.
        #[arg(long)]
        n1: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Chain with `P(K = T) = val(g)/m` for a circuit gate.
    Circuit {
        #[command(flatten)]
        circuit: CircuitArg,
        /// Gate name; defaults to the first output.
        #[arg(long)]
        gate: Option<String>,
        /// Lift a gate on an even level to the next odd level.
        #[arg(long)]
        lift: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Chain and formula comparing two gates.
    Posslp {
        #[command(flatten)]
        circuit: CircuitArg,
        #[arg(long)]
        g1: String,
        #[arg(long)]
        g2: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Acyclic MDP for a QSubsetSum instance.
    Qss {
        #[command(flatten)]
        inst: QssArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Acyclic MDP for the universal variant.
    Uqss {
        #[command(flatten)]
        inst: QssArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// MDP for a countdown game.
    Countdown {
        /// Game file (JSON).
        #[arg(long)]
        game: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Cost-utility process for the question `P(K = T) = 1`.
    Cu {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long = "T")]
        t: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum BruteCommand {
    /// Evaluate a QSubsetSum formula by game-tree search.
    Qss {
        #[command(flatten)]
        inst: QssArg,
    },
    /// Solve a countdown game by backward induction.
    Countdown {
        #[arg(long)]
        game: PathBuf,
    },
    /// Count automaton paths with the gate's Parikh image.
    Parikh {
        #[command(flatten)]
        circuit: CircuitArg,
        #[arg(long)]
        gate: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub formula: String,
    /// Scheduler file; defaults to the optimal scheduler for `--mode`.
    #[arg(long)]
    pub scheduler: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "max")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
