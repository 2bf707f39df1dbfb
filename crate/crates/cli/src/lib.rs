//! `qkdrand` command-line front end: simulate BB84 rounds, run the
//! randomness battery on keys or bit files, and fetch reference bits from a
//! remote quantum RNG.

pub mod config;
pub mod fetch;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qkdrand_core::battery::{run_battery_with_metadata, BatteryConfig, BatteryMetadata, TestId, TestParams};
use qkdrand_core::qkd::{BlockSchedule, ChannelConfig, Eavesdropper, ReconConfig};
use qkdrand_core::{bitstream, run_pipeline, BitFormat, PipelineConfig};
use thiserror::Error;

pub use config::{InputSpec, OutputSpec, RunConfig};
pub use fetch::{fetch_remote_bits, FetchError, HttpGet, RetryPolicy, UreqClient};
pub use report::ReportDocument;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TEST_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Fetch(#[from] FetchError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) | CliError::Fetch(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qkdrand", version, about = "BB84 key distillation simulator and randomness test battery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the QKD pipeline and test each round's final key.
    Simulate(SimulateArgs),
    /// Run the battery on a bit file.
    Test(TestArgs),
    /// Download bits from a remote quantum RNG service.
    Fetch(FetchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScheduleArg {
    Doubling,
    Halving,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Ascii01,
    #[value(name = "raw_packed")]
    RawPacked,
}

impl From<FormatArg> for BitFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Ascii01 => BitFormat::Ascii01,
            FormatArg::RawPacked => BitFormat::RawPacked,
        }
    }
}

#[derive(Debug, Args)]
pub struct BatteryArgs {
    /// Comma-separated test names, or `all`.
    #[arg(long, default_value = "all")]
    pub tests: String,
    /// Significance level.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// JSON file overriding per-test parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// JSON report path; printed to stdout when neither output is given.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV path for the attrition and P-value tables.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Exit with status 1 when any test that ran fails.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 100_000)]
    pub photons: usize,
    #[arg(long, default_value_t = 3)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bit-flip probability on matched-basis measurements.
    #[arg(long, default_value_t = 0.03)]
    pub flip: f64,
    /// Photon loss probability.
    #[arg(long, default_value_t = 0.0)]
    pub loss: f64,
    /// Fraction of photons intercepted and resent.
    #[arg(long)]
    pub eve: Option<f64>,
    /// Initial Cascade block size.
    #[arg(long, default_value_t = 16)]
    pub block_size: usize,
    /// Cascade passes.
    #[arg(long, default_value_t = 3)]
    pub recon_passes: usize,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Doubling)]
    pub schedule: ScheduleArg,
    /// Keep bit order fixed between Cascade passes.
    #[arg(long)]
    pub no_permute: bool,
    /// Abort threshold on the estimated QBER.
    #[arg(long, default_value_t = 0.11)]
    pub e_max: f64,
    /// Fraction of sifted bits disclosed for QBER estimation.
    #[arg(long, default_value_t = 0.1)]
    pub sample_fraction: f64,
    /// Security parameter s subtracted in privacy amplification.
    #[arg(long, default_value_t = 64)]
    pub security: usize,
    #[command(flatten)]
    pub battery: BatteryArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Bit file to test
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Ascii01)]
    pub format: FormatArg,
    #[command(flatten)]
    pub battery: BatteryArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Number of bits to fetch.
    #[arg(long)]
    pub bits: usize,
    /// Service URL.
    #[arg(long, env = fetch::ENDPOINT_ENV, default_value = fetch::DEFAULT_ENDPOINT)]
    pub endpoint: String,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub timeout: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Ascii01)]
    pub format: FormatArg,
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, &UreqClient) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qkdrand: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command with the given HTTP client.
pub fn execute(command: Command, http: &dyn HttpGet) -> Result<i32, CliError> {
    match command {
        Command::Simulate(args) => simulate(&args),
        Command::Test(args) => test_file(&args),
        Command::Fetch(args) => fetch_cmd(&args, http),
    }
}

fn battery_config(args: &BatteryArgs) -> Result<BatteryConfig, CliError> {
    let tests = TestId::parse_list(&args.tests).map_err(CliError::Config)?;
    let params = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<TestParams>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => TestParams::default(),
    };
    Ok(BatteryConfig { alpha: args.alpha, tests, params })
}

fn output_spec(args: &OutputArgs) -> OutputSpec {
    OutputSpec { json: args.out.clone(), csv: args.csv.clone(), strict: args.strict }
}

pub fn pipeline_config(args: &SimulateArgs) -> PipelineConfig {
    PipelineConfig {
        rounds: args.rounds,
        photons_per_round: args.photons,
        channel: ChannelConfig {
            flip_prob: args.flip,
            loss_prob: args.loss,
            eve: args.eve.map_or(Eavesdropper::None, Eavesdropper::InterceptResend),
        },
        recon: ReconConfig {
            block_size: args.block_size,
            rounds: args.recon_passes,
            permute_between_rounds: !args.no_permute,
            schedule: match args.schedule {
                ScheduleArg::Doubling => BlockSchedule::Doubling,
                ScheduleArg::Halving => BlockSchedule::Halving,
            },
        },
        e_max: args.e_max,
        sample_fraction: args.sample_fraction,
        security_param: args.security,
        master_seed: args.seed,
    }
}

fn simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let pipeline = pipeline_config(args);
    let config = RunConfig {
        pipeline: Some(pipeline),
        input: None,
        battery: battery_config(&args.battery)?,
        outputs: output_spec(&args.output),
    };
    config.validate().map_err(CliError::Config)?;
    let report = run_pipeline(&pipeline).map_err(|e| CliError::Config(e.to_string()))?;
    let mut doc = ReportDocument::new(config.clone());
    doc.add_pipeline(&report);
    for round in &report.rounds {
        let meta = BatteryMetadata { source: "pipeline".into(), seed: Some(pipeline.master_seed), round: Some(round.round) };
        doc.battery.push(run_battery_with_metadata(&round.alice_key, &config.battery, meta));
    }
    finish(&doc)
}

fn test_file(args: &TestArgs) -> Result<i32, CliError> {
    let format: BitFormat = args.format.into();
    let config = RunConfig {
        pipeline: None,
        input: Some(InputSpec { path: args.input.clone(), format }),
        battery: battery_config(&args.battery)?,
        outputs: output_spec(&args.output),
    };
    config.validate().map_err(CliError::Config)?;
    let bits = bitstream::load_bits(&args.input, format)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let mut doc = ReportDocument::new(config.clone());
    let meta = BatteryMetadata { source: args.input.display().to_string(), seed: None, round: None };
    doc.battery.push(run_battery_with_metadata(&bits, &config.battery, meta));
    finish(&doc)
}

fn fetch_cmd(args: &FetchArgs, http: &dyn HttpGet) -> Result<i32, CliError> {
    if !(args.timeout > 0.0 && args.timeout.is_finite()) {
        return Err(CliError::Config(format!("timeout {} must be a positive number of seconds", args.timeout)));
    }
    let timeout = Duration::from_secs_f64(args.timeout);
    let bits = fetch_remote_bits(http, &args.endpoint, args.bits, timeout, RetryPolicy::default())?;
    bitstream::save_bits(&bits, &args.out, args.format.into())
        .map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    println!("wrote {} bits to {}", bits.len(), args.out.display());
    Ok(EXIT_OK)
}

fn finish(doc: &ReportDocument) -> Result<i32, CliError> {
    let outputs = &doc.config.outputs;
    let json = doc.to_json();
    if let Some(path) = &outputs.json {
        report::write_output(path, &json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &outputs.csv {
        report::write_output(path, &doc.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    if outputs.json.is_none() && outputs.csv.is_none() {
        print!("{json}");
    } else {
        print_summary(doc);
    }
    Ok(if outputs.strict && doc.has_failures() { EXIT_TEST_FAILURE } else { EXIT_OK })
}

fn print_summary(doc: &ReportDocument) {
    for r in &doc.rounds {
        let status = r.abort_reason.as_deref().unwrap_or("ok");
        println!("round {}: {} final key bits ({status})", r.round, r.final_key_bits);
    }
    for b in &doc.battery {
        let label = b.metadata.round.map_or_else(|| b.metadata.source.clone(), |r| format!("round {r}"));
        let ran = b.results().count();
        let failed = b.failures().count();
        println!("{label}: {ran} tests ran, {failed} failed, {} skipped", b.outcomes.len() - ran);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simulate_defaults() {
        let cli = Cli::try_parse_from(["qkdrand", "simulate"]).unwrap();
        let Command::Simulate(args) = cli.command else { panic!() };
        let cfg = pipeline_config(&args);
        assert_eq!(cfg.photons_per_round, 100_000);
        assert_eq!(cfg.rounds, 3);
        assert_eq!(cfg.channel, ChannelConfig::default());
        assert_eq!(cfg.recon, ReconConfig::default());
    }

    #[test]
    fn bad_flags_are_config_errors() {
        assert_eq!(run(["qkdrand", "simulate", "--photons", "lots"]), EXIT_CONFIG);
        assert_eq!(run(["qkdrand", "simulate", "--flip", "1.5", "--photons", "10"]), EXIT_CONFIG);
        assert_eq!(run(["qkdrand", "simulate", "--tests", "nonsense", "--photons", "10"]), EXIT_CONFIG);
        assert_eq!(run(["qkdrand", "simulate", "--alpha", "0", "--photons", "10"]), EXIT_CONFIG);
        assert_eq!(run(["qkdrand", "frobnicate"]), EXIT_CONFIG);
    }

    #[test]
    fn missing_input_is_io_error() {
        assert_eq!(run(["qkdrand", "test", "--in", "/nonexistent/bits.txt"]), EXIT_IO);
    }
}
