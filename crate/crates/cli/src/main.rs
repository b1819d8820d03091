mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sawp_core::gateway::Provider;
use sawp_core::grader::Mode;
use sawp_core::prompt::InstructionSelection;

#[derive(Debug, Parser)]
#[command(name = "sawp", version, about = "2D frame solver and LLM structural-analysis benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a frame model and write solution, diagrams, CSV tables and a report.
    Solve(SolveArgs),
    /// Check a frame model document against the schema and lints.
    Validate(ValidateArgs),
    /// List the bundled benchmark cases, or show one.
    Cases(CasesArgs),
    /// Print the rendered prompt of one case and stage.
    Prompt(PromptArgs),
    /// Run the three-stage pipeline on one case.
    Run(RunArgs),
    /// Best-of-N accuracy over the benchmark.
    Bench(BenchArgs),
    /// Repeated attempts per case; reports success rates.
    Stability(StabilityArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Frame model document (.fmd.json).
    #[arg(long, conflicts_with = "case", required_unless_present = "case")]
    model: Option<PathBuf>,
    /// Use the ground-truth model of a bundled case instead.
    #[arg(long)]
    case: Option<u32>,
    /// Report directory; without it the solution JSON goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grade the model against this case's ground truth.
    #[arg(long)]
    grade_case: Option<u32>,
    /// Deformed-shape magnification.
    #[arg(long)]
    scale: Option<f64>,
    /// Sample points per element for force diagrams.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Frame model document (.fmd.json).
    file: PathBuf,
    /// Treat lint warnings as errors.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct CasesArgs {
    /// Show this case in full.
    id: Option<u32>,
    /// With an id: print the pinned solution instead of the model.
    #[arg(long, requires = "id")]
    solution: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ContextSource {
    /// Carry the ground-truth answers of earlier stages into the prompt.
    Truth,
    /// Omit earlier-stage context.
    None,
}

#[derive(Debug, Args)]
struct PromptArgs {
    #[arg(long)]
    case: u32,
    /// 1 = parameters, 2 = layout, 3 = visualization.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    stage: u8,
    #[command(flatten)]
    prompt: PromptFlags,
    #[arg(long, value_enum, default_value_t = ContextSource::Truth)]
    context: ContextSource,
}

#[derive(Debug, Clone, Args)]
struct PromptFlags {
    /// System instructions: all, none or a comma-separated list of
    /// direction, number, space, distributed.
    #[arg(long, default_value = "all", value_parser = parse_instructions)]
    instructions: InstructionSelection,
    /// Case used as the in-context example.
    #[arg(long)]
    exemplar: Option<u32>,
}

fn parse_instructions(text: &str) -> Result<InstructionSelection, String> {
    InstructionSelection::parse(text)
        .ok_or_else(|| format!("expected all, none or a list of direction,number,space,distributed; got {text:?}"))
}

fn parse_provider(text: &str) -> Result<Provider, String> {
    text.parse().map_err(|e: sawp_core::gateway::GatewayError| e.to_string())
}

#[derive(Debug, Clone, Args)]
struct GatewayFlags {
    #[arg(long, env = "SAWP_PROVIDER", default_value = "openai", value_parser = parse_provider)]
    provider: Provider,
    /// Model name(s), comma separated; one matrix row each. Defaults to the
    /// provider's default, or the transcript directory name under replay.
    #[arg(long, env = "SAWP_MODEL", value_delimiter = ',')]
    model: Vec<String>,
    /// Serve responses from this transcript directory.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Store fresh responses under <run dir>/transcripts.
    #[arg(long, conflicts_with = "replay")]
    record: bool,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long)]
    max_tokens: Option<u32>,
    /// Per-request timeout in seconds.
    #[arg(long)]
    timeout: Option<u64>,
    /// Retries after a timeout, rate limit or server error.
    #[arg(long)]
    retries: Option<u32>,
    /// Requests per minute allowed for the provider.
    #[arg(long)]
    rpm: Option<u32>,
    /// Environment variable holding the API key.
    #[arg(long)]
    key_env: Option<String>,
    #[arg(long)]
    base_url: Option<String>,
    /// Directory receiving run artifacts.
    #[arg(long, default_value = "runs")]
    runs_dir: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    case: u32,
    /// Attempts (best-of-N).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    #[command(flatten)]
    prompt: PromptFlags,
    #[command(flatten)]
    gateway: GatewayFlags,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Attempts per case; a case counts as solved if any attempt is correct.
    #[arg(long, default_value_t = sawp_core::pipeline::DEFAULT_BEST_OF as u32, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    /// Case ids, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    cases: Vec<u32>,
    #[command(flatten)]
    prompt: PromptFlags,
    #[command(flatten)]
    gateway: GatewayFlags,
}

#[derive(Debug, Args)]
struct StabilityArgs {
    /// Case id (default: all cases).
    #[arg(long)]
    case: Option<u32>,
    #[arg(long, default_value_t = sawp_core::pipeline::DEFAULT_REPEATS as u32, value_parser = clap::value_parser!(u32).range(1..))]
    repeats: u32,
    #[command(flatten)]
    prompt: PromptFlags,
    #[command(flatten)]
    gateway: GatewayFlags,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    if std::env::var_os("SAWP_OFFLINE").is_some_and(|v| !v.is_empty() && v != "0") {
        sawp_core::gateway::forbid_network();
    }

    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Validate(a) => commands::validate(a),
        Command::Cases(a) => commands::cases(a),
        Command::Prompt(a) => commands::prompt(a),
        Command::Run(a) => commands::run(a),
        Command::Bench(a) => {
            let cases = a.cases.clone();
            commands::matrix(Mode::BestOfN, &cases, a.n, a.prompt, a.gateway)
        }
        Command::Stability(a) => {
            let cases: Vec<u32> = a.case.into_iter().collect();
            commands::matrix(Mode::Stability, &cases, a.repeats, a.prompt, a.gateway)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
