//! `treeaut`: classification, trichotomy verdicts and experiments on the
//! regular tree.

mod expr;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use treeaut::classify::{classify, Classification, WindowPolicy};
use treeaut::experiments::{run_experiment, ExperimentConfig, EXPERIMENTS};
use treeaut::nielsen::{trichotomy, DensityParams, GenTuple, TrichotomyConfig, Verdict};
use treeaut::par::Exec;
use treeaut::TreeParams;

const EXIT_FAIL: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] treeaut::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "treeaut", version, about = "Automorphisms of the k-regular tree")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Tree degree.
    #[arg(long, global = true, default_value_t = 3, env = "TREEAUT_K")]
    k: usize,
    /// Master seed.
    #[arg(long, global = true, default_value_t = 42, env = "TREEAUT_SEED")]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json", env = "TREEAUT_FORMAT")]
    format: Format,
    /// Worker threads for experiment trials; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0, env = "TREEAUT_JOBS")]
    jobs: usize,
    /// Steps allowed in displacement descent.
    #[arg(long, global = true, default_value_t = 10_000, env = "TREEAUT_MAX_STEPS")]
    max_steps: usize,
    /// Nielsen moves allowed in the reduction.
    #[arg(long, global = true, default_value_t = 500, env = "TREEAUT_REDUCE_BUDGET")]
    reduce_budget: usize,
    /// Longest stabilizer word in the density probe.
    #[arg(long, global = true, default_value_t = 64, env = "TREEAUT_WORD_BUDGET")]
    word_budget: usize,
    /// Orbit points explored by the density probe.
    #[arg(long, global = true, default_value_t = 40_000, env = "TREEAUT_NODE_CAP")]
    node_cap: usize,
    /// Largest axis window, in periods on each side.
    #[arg(long, global = true, default_value_t = 64, env = "TREEAUT_WINDOW_CAP")]
    window_cap: usize,
    /// Ball radius of the density probe.
    #[arg(long, global = true, default_value_t = 2, env = "TREEAUT_DEPTH")]
    depth: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify an automorphism as elliptic, inversion or hyperbolic.
    Classify {
        /// e.g. "lm:01", "haar:7 * lm:0", "(lm:01)^-1", "portrait:@p.json"
        expr: String,
    },
    /// Decide compact, discrete-free or dense for a generating tuple.
    Trichotomy {
        #[arg(required = true)]
        exprs: Vec<String>,
    },
    /// Run a named experiment and write `<name>.csv` and `<name>.json`.
    Experiment {
        /// One of: uniformity, independence, techno, densepoint, trichotomy,
        /// product_trees, stabilizer, nielsen_measure.
        name: String,
        /// Trials per slice; defaults depend on the experiment.
        #[arg(long, env = "TREEAUT_TRIALS")]
        trials: Option<usize>,
        /// Draws per statistical test.
        #[arg(long, default_value_t = 100_000, env = "TREEAUT_SAMPLES")]
        samples: usize,
        #[arg(long, default_value_t = 0.01, env = "TREEAUT_ALPHA")]
        alpha: f64,
        /// Directory for the report files.
        #[arg(long, default_value = "reports", env = "TREEAUT_OUT")]
        out: PathBuf,
    },
}

impl Global {
    fn params(&self) -> Result<TreeParams, CliError> {
        Ok(TreeParams::new(self.k)?)
    }

    fn trichotomy(&self) -> TrichotomyConfig {
        TrichotomyConfig {
            reduce_budget: self.reduce_budget,
            window: WindowPolicy {
                cap: self.window_cap,
                ..WindowPolicy::default()
            },
            density: DensityParams {
                depth: self.depth,
                word_budget: self.word_budget,
                node_cap: self.node_cap,
            },
        }
    }
}

fn classification_csv(c: &Classification) -> String {
    let (kind, l, anchor, witness, edge) = match c {
        Classification::Elliptic { witness } => ("elliptic", 0, String::new(), witness.to_string(), String::new()),
        Classification::Inversion { edge } => {
            let (a, b) = edge.endpoints();
            ("inversion", 0, String::new(), String::new(), format!("{a}-{b}"))
        }
        Classification::Hyperbolic { l, anchor } => ("hyperbolic", *l, anchor.to_string(), String::new(), String::new()),
    };
    format!("kind,l,anchor,witness,edge\n{kind},{l},{anchor},{witness},{edge}\n")
}

fn emit(out: &mut impl Write, value: &Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run(cli: Cli, out: &mut impl Write) -> Result<u8, CliError> {
    let g = &cli.global;
    match cli.command {
        Command::Classify { expr } => {
            let a = expr::parse_expr(&expr, g.params()?, g.seed)?;
            let c = match classify(&a, g.max_steps) {
                Err(treeaut::Error::BudgetExceeded(n)) => {
                    eprintln!("treeaut: displacement descent exceeded {n} steps");
                    return Ok(EXIT_UNDECIDED);
                }
                other => other?,
            };
            match g.format {
                Format::Json => emit(out, &serde_json::to_value(&c)?)?,
                Format::Csv => write!(out, "{}", classification_csv(&c))?,
            }
            Ok(0)
        }
        Command::Trichotomy { exprs } => {
            let params = g.params()?;
            let entries = exprs
                .iter()
                .map(|e| expr::parse_expr(e, params, g.seed))
                .collect::<Result<Vec<_>, _>>()?;
            let verdict = trichotomy(&GenTuple::new(entries)?, &g.trichotomy())?;
            match g.format {
                Format::Json => emit(out, &serde_json::to_value(&verdict)?)?,
                Format::Csv => {
                    let detail = match &verdict {
                        Verdict::Undecided { reason } => reason.replace(',', ";"),
                        Verdict::DenseToDepth { n, target, .. } => format!("{target} depth {n}"),
                        Verdict::DiscreteFree { moves, .. } => {
                            moves.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
                        }
                        Verdict::Compact { witness } => serde_json::to_string(witness)?.replace(',', ";"),
                    };
                    write!(out, "verdict,detail\n{},{detail}\n", verdict.kind())?;
                }
            }
            Ok(if verdict.is_decisive() { 0 } else { EXIT_UNDECIDED })
        }
        Command::Experiment {
            name,
            trials,
            samples,
            alpha,
            out: dir,
        } => {
            if !EXPERIMENTS.contains(&name.as_str()) {
                return Err(CliError::Parse(format!(
                    "unknown experiment {name:?}; expected one of {}",
                    EXPERIMENTS.join(", ")
                )));
            }
            let cfg = ExperimentConfig {
                k: g.k,
                seed: g.seed,
                samples,
                trials,
                alpha,
                trichotomy: g.trichotomy(),
                exec: Exec::with_jobs(g.jobs),
            };
            let report = run_experiment(&name, &cfg)?;
            let (csv_path, json_path) = report.write_to(&dir)?;
            match g.format {
                Format::Json => {
                    let mut summary = report.summary();
                    summary["files"] = json!([csv_path, json_path]);
                    emit(out, &summary)?
                }
                Format::Csv => write!(out, "{}", report.csv()?)?,
            }
            Ok(if report.pass { 0 } else { EXIT_FAIL })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("treeaut: {e}");
            ExitCode::from(match e {
                CliError::Parse(_) | CliError::Core(_) => EXIT_USAGE,
                CliError::Io(_) | CliError::Json(_) => EXIT_FAIL,
            })
        }
    }
}
