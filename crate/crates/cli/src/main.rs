use capillary_core::capillary::{build_capillary, RoutingPattern};
use capillary_core::fec::{rate_increase_table, FecParams};
use capillary_core::harness::{self, ExperimentConfig, HarnessError};
use capillary_core::manet::{self, ManetConfig};
use capillary_core::ror::{rate_pattern, RorMode, StaticTolerance};
use clap::{Args, Parser, Subcommand};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "capillary",
    version,
    about = "Capillary multi-path routing and ROR rating"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random-walk MANET samples, one JSON file per timeframe.
    Generate(GenerateArgs),
    /// Build the capillary routing pattern of a network.
    Route(RouteArgs),
    /// Print the FEC rate-increase table as CSV.
    FecTable(FecTableArgs),
    /// Rate a routing pattern by its ROR.
    Ror(RorArgs),
    /// Run an experiment sweep and write the ROR and hunting CSV files.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Built-in preset (desk, n300, n115, n120).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// MANET config JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the number of timeframes.
    #[arg(long)]
    timeframes: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RouteArgs {
    /// Network or sample JSON file.
    network: PathBuf,
    #[arg(long)]
    source: usize,
    #[arg(long)]
    sink: usize,
    #[arg(long, default_value_t = 10)]
    layers: usize,
    /// Write the pattern here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a Graphviz rendering.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write per-layer statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct FecTableArgs {
    #[arg(long, default_value_t = 1e-5)]
    der: f64,
    #[arg(long, default_value_t = 20)]
    m_max: u32,
}

#[derive(Args)]
struct RorArgs {
    /// Routing pattern JSON file.
    pattern: PathBuf,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value = "short")]
    mode: RorMode,
    #[arg(long, default_value_t = 20)]
    m: u32,
    #[arg(long, default_value_t = 1e-5)]
    der: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON file.
    config: PathBuf,
    #[arg(long, default_value = "ror.csv")]
    ror_out: PathBuf,
    #[arg(long, default_value = "hunting.csv")]
    hunting_out: PathBuf,
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

fn invalid(e: impl Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn runtime(e: impl Display) -> Failure {
    Failure::Runtime(e.to_string())
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_validation() {
            invalid(e)
        } else {
            runtime(e)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), _) => ManetConfig::preset(name, args.seed).map_err(invalid)?,
        (None, Some(path)) => serde_json::from_str(&read(path)?)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?,
        (None, None) => return Err(invalid("either --preset or --config is required")),
    };
    if let Some(frames) = args.timeframes {
        cfg.timeframes = frames;
    }
    let samples = manet::generate_samples(&cfg).map_err(invalid)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| runtime(format!("cannot create {}: {e}", args.out_dir.display())))?;
    for s in &samples {
        let path = args
            .out_dir
            .join(format!("sample_{:04}.json", s.metadata.frame_index));
        write(&path, &manet::save_sample(s))?;
    }
    println!(
        "wrote {} samples to {}",
        samples.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn route(args: RouteArgs) -> Result<(), Failure> {
    let net = harness::load_network_file(&args.network)?;
    let ends = net.endpoints(args.source, args.sink).map_err(invalid)?;
    let (pattern, stats) = build_capillary(&net, ends, args.layers).map_err(invalid)?;
    let json = pattern.to_json();
    match &args.out {
        Some(path) => write(path, &json)?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.dot {
        write(path, &harness::export_dot(&pattern))?;
    }
    if let Some(path) = &args.stats {
        let text = serde_json::to_string_pretty(&stats).map_err(runtime)?;
        write(path, &text)?;
    }
    Ok(())
}

fn fec_table(args: FecTableArgs) -> Result<(), Failure> {
    let table = rate_increase_table(args.der, args.m_max).map_err(invalid)?;
    print!("{table}");
    Ok(())
}

fn ror(args: RorArgs) -> Result<(), Failure> {
    let text = read(&args.pattern)?;
    let pattern = RoutingPattern::from_json(&text)
        .map_err(|e| invalid(format!("{}: {e}", args.pattern.display())))?;
    let t = StaticTolerance::new(args.t).map_err(invalid)?;
    let params = FecParams::new(args.m, args.der).map_err(invalid)?;
    let report = rate_pattern(&pattern, t, args.mode, &params).map_err(invalid)?;
    println!("{}", report.to_json());
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let res = harness::run_experiment(&cfg)?;
    for s in &res.samples {
        if let harness::SampleOutcome::Dropped { index, reason } = s {
            eprintln!("sample {index} dropped: {reason}");
        }
    }
    write(&args.ror_out, &res.ror_csv())?;
    write(&args.hunting_out, &res.hunting_csv())?;
    println!(
        "{} samples ({} dropped); wrote {} and {}",
        res.samples.len(),
        res.dropped(),
        args.ror_out.display(),
        args.hunting_out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Route(a) => route(a),
        Command::FecTable(a) => fec_table(a),
        Command::Ror(a) => ror(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
