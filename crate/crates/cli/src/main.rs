use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commvuln_core::community::detect_communities;
use commvuln_core::metrics::DegreeMode;
use commvuln_core::pipeline::{self, EvaluateOptions};
use commvuln_core::{
    export, parse_edge_list, Graph, GraphError, PipelineError, SobolConfig, Weights,
};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: GraphError },
    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),
    #[error("{0}")]
    Pipeline(#[from] PipelineError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipeline(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "commvuln",
    version,
    about = "Community vulnerability evaluation for undirected networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run greedy modularity detection and print the merge trace.
    Detect {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Score every detected community and rank them.
    Evaluate {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[command(flatten)]
        network: NetworkArgs,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Estimate Sobol' indices of each community's vulnerability with respect to the weights.
    Sensitivity {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[command(flatten)]
        network: NetworkArgs,
        #[command(flatten)]
        sobol: SobolArgs,
    },
    /// Export the community network (pairwise abstract distances).
    ExportCn {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_enum, default_value_t = NetworkFormat::Dot)]
        format: NetworkFormat,
        #[command(flatten)]
        network: NetworkArgs,
    },
}

#[derive(Args)]
struct IoArgs {
    /// Edge list: one `u v` pair per line, `#` starts a comment.
    input: PathBuf,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NetworkArgs {
    /// Sigmoid steepness for abstract distances.
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    phi: f64,
    /// Node degree used for probability sets.
    #[arg(long, value_enum, default_value_t = DegreeArg::Intra)]
    degree_mode: DegreeArg,
}

#[derive(Args)]
struct WeightArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    chi: f64,
}

#[derive(Args)]
struct SobolArgs {
    /// Rows per base sample matrix.
    #[arg(long, default_value_t = 4096)]
    samples: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    range_lo: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    range_hi: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetworkFormat {
    Dot,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DegreeArg {
    Intra,
    Full,
}

impl NetworkArgs {
    fn options(&self, weights: Weights) -> Result<EvaluateOptions, CliError> {
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return Err(CliError::Usage(format!(
                "--phi must be positive, got {}",
                self.phi
            )));
        }
        Ok(EvaluateOptions {
            phi: self.phi,
            weights,
            degree_mode: match self.degree_mode {
                DegreeArg::Intra => DegreeMode::Intra,
                DegreeArg::Full => DegreeMode::Full,
            },
        })
    }
}

impl WeightArgs {
    fn weights(&self) -> Result<Weights, CliError> {
        for (name, w) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("chi", self.chi),
        ] {
            if !w.is_finite() {
                return Err(CliError::Usage(format!("--{name} must be finite, got {w}")));
            }
        }
        Ok(Weights::new(self.alpha, self.beta, self.chi))
    }
}

impl SobolArgs {
    fn config(&self) -> Result<SobolConfig, CliError> {
        if self.samples < 64 {
            return Err(CliError::Usage(format!(
                "--samples must be at least 64, got {}",
                self.samples
            )));
        }
        if !(self.range_lo < self.range_hi
            && self.range_lo.is_finite()
            && self.range_hi.is_finite())
        {
            return Err(CliError::Usage(format!(
                "--range-lo must be below --range-hi, got [{}, {}]",
                self.range_lo, self.range_hi
            )));
        }
        Ok(SobolConfig {
            samples: self.samples,
            seed: self.seed,
            range: (self.range_lo, self.range_hi),
        })
    }
}

fn load(path: &Path) -> Result<Graph, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_edge_list(&text).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("COMMVULN_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "COMMVULN_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Detect { io, format } => {
            let g = load(&io.input)?;
            let trace = detect_communities(&g).map_err(PipelineError::from)?;
            let text = match format {
                Format::Table => export::trace_table(&g, &trace),
                Format::Csv => export::trace_csv(&g, &trace),
                Format::Json => export::trace_json(&g, &trace),
            };
            emit(io.output.as_deref(), &text)
        }
        Command::Evaluate {
            io,
            format,
            network,
            weights,
        } => {
            let opts = network.options(weights.weights()?)?;
            let g = load(&io.input)?;
            let report = pipeline::evaluate(&g, &opts)?.report;
            let text = match format {
                Format::Table => export::report_table(&report),
                Format::Csv => export::report_csv(&report),
                Format::Json => export::report_json(&report),
            };
            emit(io.output.as_deref(), &text)
        }
        Command::Sensitivity {
            io,
            format,
            network,
            sobol,
        } => {
            let opts = network.options(Weights::default())?;
            let config = sobol.config()?;
            let g = load(&io.input)?;
            let result = pipeline::sensitivity(&g, &opts, &config)?;
            let text = match format {
                Format::Table => export::sobol_table(&result),
                Format::Csv => export::sobol_csv(&result),
                Format::Json => export::sobol_json(&result),
            };
            emit(io.output.as_deref(), &text)
        }
        Command::ExportCn {
            io,
            format,
            network,
        } => {
            let opts = network.options(Weights::default())?;
            let g = load(&io.input)?;
            let trace = detect_communities(&g).map_err(PipelineError::from)?;
            let (cn, _) = pipeline::factors(&g, &trace.partition, &opts)?;
            let text = match format {
                NetworkFormat::Dot => export::network_dot(&cn),
                NetworkFormat::Csv => export::network_csv(&cn),
                NetworkFormat::Json => export::network_json(&cn),
            };
            emit(io.output.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("commvuln: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
