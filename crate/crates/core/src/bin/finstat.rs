use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use finstat_core::commands::{self, ComposeMode, EntropyKind, GenerateKind, Outcome, EXIT_USAGE};
use finstat_core::randgen::GenConfig;
use finstat_core::{LogBase, EPS_EQ};

/// Validate, compose and evaluate FinStat instances; run property suites.
///
/// Every input is an explicit flag; environment variables are not consulted.
#[derive(Debug, Parser)]
#[command(name = "finstat", version)]
struct Cli {
    /// Tolerance (validate: default 1e-9; check: default 1e-8).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Logarithm base for printed entropies.
    #[arg(long, global = true, value_enum, default_value_t = Base::E)]
    base: Base,

    /// Master seed for check and generate.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Number of trials per suite.
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,

    /// Upper bound on generated set sizes.
    #[arg(long, global = true, default_value_t = 6)]
    max_size: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Base {
    E,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a per-object table of validation violations.
    Validate { file: PathBuf },

    /// Print an entropy ("inf" for infinity, 12 significant digits).
    Entropy {
        file: PathBuf,
        /// Name of the dist, morphism or two_morphism to evaluate.
        target: String,
        #[arg(long, value_enum, default_value_t = EntropyKind::Re)]
        kind: EntropyKind,
        /// Second dist for --kind kl.
        #[arg(long)]
        against: Option<String>,
    },

    /// Add the composite of two objects and print the extended document.
    Compose {
        file: PathBuf,
        left: String,
        right: String,
        #[arg(long, value_enum)]
        mode: ComposeMode,
        /// Name of the composite (default `left.right`).
        #[arg(long)]
        name: Option<String>,
        /// Write the document here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Run a property suite (or "all") and print its JSON report.
    Check {
        suite: String,
        /// Sample sparse instances wherever the suite uses the configured
        /// support.
        #[arg(long)]
        sparse: bool,
        /// Include wall-clock seconds in the report.
        #[arg(long)]
        timing: bool,
    },

    /// Print a freshly generated random document.
    Generate {
        #[arg(value_enum)]
        kind: GenerateKind,
        #[arg(long)]
        sparse: bool,
    },
}

fn read(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path).map_err(|e| Outcome {
        code: EXIT_USAGE,
        stdout: String::new(),
        stderr: format!("error: cannot read {}: {e}\n", path.display()),
    })
}

fn run(cli: Cli) -> Outcome {
    let base = match cli.base {
        Base::E => LogBase::E,
        Base::Two => LogBase::Two,
    };
    let cfg = |sparse: bool| GenConfig {
        seed: cli.seed,
        max_size: cli.max_size,
        full_support: !sparse,
        dirichlet_like: true,
    };
    let tol_or = |default: f64| cli.tol.unwrap_or(default);
    let text = |p: &Path| read(p);

    match cli.command {
        Command::Validate { file } => match text(&file) {
            Ok(t) => commands::validate(&t, tol_or(EPS_EQ)),
            Err(o) => o,
        },
        Command::Entropy {
            file,
            target,
            kind,
            against,
        } => match text(&file) {
            Ok(t) => commands::entropy(&t, &target, kind, against.as_deref(), base),
            Err(o) => o,
        },
        Command::Compose {
            file,
            left,
            right,
            mode,
            name,
            out,
        } => {
            let t = match text(&file) {
                Ok(t) => t,
                Err(o) => return o,
            };
            let name = name.unwrap_or_else(|| format!("{left}.{right}"));
            let mut outcome = commands::compose(&t, &left, &right, mode, &name);
            if let (Some(path), 0) = (out, outcome.code) {
                if let Err(e) = std::fs::write(&path, &outcome.stdout) {
                    outcome.code = EXIT_USAGE;
                    outcome.stderr = format!("error: cannot write {}: {e}\n", path.display());
                }
                outcome.stdout.clear();
            }
            outcome
        }
        Command::Check {
            suite,
            sparse,
            timing,
        } => commands::check(&suite, cli.trials, cfg(sparse), tol_or(1e-8), timing),
        Command::Generate { kind, sparse } => commands::generate(kind, cfg(sparse)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = run(cli);
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.code)
}
