mod commands;
mod example;
mod input;
mod report;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{Format, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] fraisse_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            // Not enough saturation for the requested check.
            CliError::Core(fraisse_core::Error::Refused(_)) => 3,
            _ => 2,
        }
    }
}

/// Finite relational structures, amalgamation classes and binary random
/// structures.
///
/// Exit status: 0 when a verdict was computed, 1 when the checked property
/// fails, 2 on usage or input errors, 3 when the result is inconclusive
/// (budget or saturation too small).
#[derive(Debug, Parser)]
#[command(name = "fraisse", version)]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hereditary property: every substructure of a member is a member.
    CheckHp(ClassArgs),
    /// Amalgamation property, checked over all base triples within the size
    /// bound.
    CheckAp(ApArgs),
    /// 1-adequacy of a P2 set: closed under substructures, and any two
    /// permitted points sit together in a permitted 2-structure.
    CheckAdequate(P2File),
    /// Members of the random class RP2 of a given size, up to isomorphism.
    Enum(EnumArgs),
    /// Generic oracle: a seeded finite approximation of the Fraisse limit of
    /// RP2, grown and saturated by one-point extension axioms.
    Gen(GenArgs),
    /// Census of quantifier-free n-types, optionally over parameters.
    Types(TypesArgs),
    /// Algebraic closure over a base, approximated by a duplication bound.
    Acl(AclArgs),
    /// Triviality of algebraic closure: acl of a set is the union of the acl
    /// of its points.
    Triviality(TrivialityArgs),
    /// Degenerate dependence: every dependence of A on B over C is already
    /// witnessed by at most rho - 1 elements of B.
    Degenerate(DegenerateArgs),
    /// The doubled random graph M, its pair quotient G and the reducts G0
    /// and G*0: checks each claim about them on a finite instance.
    Example412(ExampleArgs),
    /// Probability that a uniform labelled member of RP2 satisfies the
    /// extension axioms, by Monte Carlo, with Wilson intervals.
    Zeroone(ZeroOneArgs),
    /// Whether the target's type partition is a union of the source's
    /// classes at every arity up to nmax (target is a reduct of source).
    Reduct(ReductArgs),
}

#[derive(Debug, Args)]
struct ClassArgs {
    /// A P2 file (random class) or a file of structures (their isomorphism
    /// closure).
    #[arg(long)]
    class: PathBuf,
    /// Largest member size examined.
    #[arg(long, default_value_t = 4)]
    bound: usize,
}

#[derive(Debug, Args)]
struct ApArgs {
    /// A P2 file (random class) or a file of structures (their isomorphism
    /// closure).
    #[arg(long)]
    class: PathBuf,
    /// Largest size of A, B and C.
    #[arg(long, default_value_t = 4)]
    size_bound: usize,
    /// Largest amalgam searched for.
    #[arg(long, default_value_t = 8)]
    amalgam_bound: usize,
}

#[derive(Debug, Args)]
struct P2File {
    #[arg(long)]
    p2: PathBuf,
}

#[derive(Debug, Args)]
struct EnumArgs {
    #[arg(long)]
    p2: PathBuf,
    #[arg(long)]
    size: usize,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// P2 file; the random graph's when omitted.
    #[arg(long)]
    p2: Option<PathBuf>,
    #[arg(long, env = "FRAISSE_SEED", default_value_t = 0)]
    seed: u64,
    /// Points added by random growth before saturating.
    #[arg(long, default_value_t = 6)]
    points: usize,
    /// Saturation level k: every base of fewer than k points gets every
    /// compatible one-point extension.
    #[arg(long, default_value_t = 2)]
    saturate: usize,
    /// Saturation passes; later passes cover the points earlier ones added.
    /// Stops early once a pass adds nothing.
    #[arg(long, default_value_t = 1)]
    passes: usize,
    /// Points all saturation passes together may add.
    #[arg(long, default_value_t = 10_000)]
    saturation_budget: usize,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    oracle: OracleArgs,
    /// Rebuild from a transcript (a previous `gen` report) instead of
    /// growing, using the seed recorded there, and check that the recorded
    /// structure comes out.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct UniverseArgs {
    /// A structure file, optionally with a `saturation <level> <prefix>`
    /// line. Replaces the oracle.
    #[arg(long)]
    structure: Option<PathBuf>,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Debug, Args)]
struct TypesArgs {
    #[command(flatten)]
    universe: UniverseArgs,
    /// Tuple length.
    #[arg(long)]
    n: usize,
    /// Parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    params: Vec<usize>,
    /// Only tuples of distinct elements.
    #[arg(long)]
    distinct: bool,
}

#[derive(Debug, Args)]
struct AclArgs {
    #[command(flatten)]
    universe: UniverseArgs,
    /// Base, comma separated.
    #[arg(long, value_delimiter = ',')]
    base: Vec<usize>,
    /// Duplication bound: fewer than d realisations means algebraic.
    #[arg(long, default_value_t = 5)]
    d: usize,
    /// Points the oracle may add to exhibit realisations.
    #[arg(long, default_value_t = 500)]
    budget: usize,
    /// Elements to classify, comma separated; the saturated region by default.
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
struct TrivialityArgs {
    #[command(flatten)]
    universe: UniverseArgs,
    /// Largest base size. Algebraic verdicts need saturation level above it.
    #[arg(long, default_value_t = 3)]
    max_b: usize,
    #[arg(long, default_value_t = 5)]
    d: usize,
    #[arg(long, default_value_t = 500)]
    budget: usize,
}

#[derive(Debug, Args)]
struct DegenerateArgs {
    #[command(flatten)]
    universe: UniverseArgs,
    /// Largest arity of the vocabulary; the check is for (rho - 1)-degeneracy.
    #[arg(long, default_value_t = 2)]
    rho: usize,
    #[arg(long, default_value_t = 3)]
    max_a: usize,
    #[arg(long, default_value_t = 3)]
    max_b: usize,
    #[arg(long, default_value_t = 3)]
    max_c: usize,
    #[arg(long, default_value_t = 5)]
    d: usize,
    #[arg(long, default_value_t = 5000)]
    budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ExampleCheck {
    All,
    Claim1,
    EDefinability,
    Claim2,
    Claim3,
    Separation,
    Reduct,
}

#[derive(Debug, Args)]
struct ExampleArgs {
    #[arg(long, env = "FRAISSE_SEED", default_value_t = 412)]
    seed: u64,
    /// Points grown in F before closing it under level-2 saturation.
    #[arg(long, default_value_t = 32)]
    base_size: usize,
    #[arg(long, value_enum, default_value_t = ExampleCheck::All)]
    check: ExampleCheck,
    /// Number of pairs moved by the partial maps of claim 2.
    #[arg(long, default_value_t = 2)]
    claim2_n: usize,
    #[arg(long, default_value_t = 200)]
    claim2_trials: usize,
    /// Points grown in the base used for claim 2 before one saturation pass
    /// at level claim2-n + 1 over them.
    #[arg(long, default_value_t = 6)]
    claim2_points: usize,
    /// Write F, M, M*, and the quotient descriptions of G, G0 and G*0 here.
    #[arg(long)]
    emit_structures: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ZeroOneArgs {
    /// P2 file; the random graph's when omitted.
    #[arg(long)]
    p2: Option<PathBuf>,
    /// Extension axioms, e.g. `ext all 2` or `ext 2: [R] []`. Repeatable.
    #[arg(long, default_values_t = vec!["ext all 2".to_string()])]
    axiom: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 20, 50, 100, 200])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, env = "FRAISSE_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ReductArgs {
    /// Type table, quotient description or structure whose types should
    /// define the target's.
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 3)]
    nmax: usize,
}

fn run(cli: &Cli) -> Result<(String, Outcome), CliError> {
    let f = cli.format;
    let (report, outcome) = match &cli.command {
        Command::CheckHp(a) => commands::check_hp(f, a)?,
        Command::CheckAp(a) => commands::check_ap(f, a)?,
        Command::CheckAdequate(a) => commands::check_adequate(f, a)?,
        Command::Enum(a) => commands::enumerate(f, a)?,
        Command::Gen(a) => commands::gen(f, a)?,
        Command::Types(a) => commands::types(f, a)?,
        Command::Acl(a) => commands::acl(f, a)?,
        Command::Triviality(a) => commands::triviality(f, a)?,
        Command::Degenerate(a) => commands::degenerate(f, a)?,
        Command::Example412(a) => example::run(f, a)?,
        Command::Zeroone(a) => commands::zeroone(f, a)?,
        Command::Reduct(a) => commands::reduct(f, a)?,
    };
    Ok((report.into_string(), outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, outcome)) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
