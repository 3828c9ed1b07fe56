mod commands;
mod error;
mod formats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ybsim", version, about = "Yang-Baxter gate builder and circuit simulator")]
struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    output: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Build or check Yang-Baxter gates.
    #[command(subcommand)]
    Gate(GateCommand),
    /// Parse or compile braid words.
    #[command(subcommand)]
    Braid(BraidCommand),
    /// Estimate the amplitude <x|U|z> of a monomial-family circuit.
    Simulate(SimulateArgs),
    /// Exact expectation value for a family-four circuit.
    Expectation(ExpectationArgs),
}

#[derive(Subcommand)]
enum GateCommand {
    /// Build a gate from a parameter file.
    Build {
        spec: PathBuf,
        /// Where to write the gate file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Report Yang-Baxter residual, unitarity and property (G) of a gate or matrix file.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Group used for property (G).
        #[arg(long, value_enum, default_value_t = PropertyGMode::Gate)]
        property_g: PropertyGMode,
        /// Treat a matrix file as a change-of-basis `Q` rather than a two-qudit gate.
        #[arg(long)]
        q_matrix: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PropertyGMode {
    /// Skip the check.
    None,
    /// The group generated by the gate's own permutation.
    Gate,
    /// The full symmetric group on [d].
    Full,
}

#[derive(Subcommand)]
enum BraidCommand {
    /// Parse and normalise a braid word such as `n=4 s3^-1 s2 s1`.
    Parse(BraidInput),
    /// Compile a braid word into a circuit file.
    Compile {
        #[command(flatten)]
        input: BraidInput,
        #[arg(long, default_value = "R")]
        gate_id: String,
        /// Local dimension of the wires.
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BraidInput {
    /// The braid word.
    word: Option<String>,
    /// Read the braid word from a file instead.
    #[arg(long, conflicts_with = "word")]
    file: Option<PathBuf>,
}

#[derive(Args)]
pub struct CircuitSource {
    /// Gate files as `[id=]path`; the id defaults to `R`.
    #[arg(long = "gate", required = true)]
    pub gates: Vec<String>,
    /// Braid word to compile with the single gate.
    #[arg(long, group = "source")]
    pub braid: Option<String>,
    #[arg(long, group = "source")]
    pub braid_file: Option<PathBuf>,
    /// Circuit file (`wires N` header, then `gate_id w,w [inv]` lines).
    #[arg(long, group = "source")]
    pub circuit: Option<PathBuf>,
    /// Wire count, overriding the braid or circuit file.
    #[arg(long)]
    pub wires: Option<usize>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: CircuitSource,
    /// Output ditstring, e.g. `0121`.
    #[arg(long)]
    pub x: String,
    /// Input ditstring.
    #[arg(long)]
    pub z: String,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Sample count, overriding ceil(8n/eps^3).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coin bits per coordinate, overriding ceil(3 n log2 d).
    #[arg(long)]
    pub coin_bits: Option<u32>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Compute the amplitude with the dense oracle instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// Omit wall-clock time so that repeated runs print identical output.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Args)]
pub struct ExpectationArgs {
    #[command(flatten)]
    pub source: CircuitSource,
    /// Observable file: `{"wires": [...], "matrix": [...]}`.
    #[arg(long)]
    pub observable: PathBuf,
    /// Product state file: a list of `[[re, im], [re, im]]` pairs.
    #[arg(long, group = "psi_source")]
    pub psi: Option<PathBuf>,
    /// Computational basis state given as a bit string.
    #[arg(long, group = "psi_source")]
    pub psi_bits: Option<String>,
    /// Defaults to psi.
    #[arg(long, group = "phi_source")]
    pub phi: Option<PathBuf>,
    #[arg(long, group = "phi_source")]
    pub phi_bits: Option<String>,
    /// Use dense state-vector simulation.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gate(GateCommand::Build { spec, out, tolerance }) => {
            commands::gate_build(&spec, out.as_deref(), tolerance)
        }
        Command::Gate(GateCommand::Check { file, tolerance, property_g, q_matrix }) => {
            commands::gate_check(&file, tolerance, property_g, q_matrix)
        }
        Command::Braid(BraidCommand::Parse(input)) => {
            commands::read_braid(input.word, input.file.as_deref()).and_then(|w| commands::braid_parse(&w))
        }
        Command::Braid(BraidCommand::Compile { input, gate_id, d, out }) => {
            commands::read_braid(input.word, input.file.as_deref())
                .and_then(|w| commands::braid_compile(&w, &gate_id, d, out.as_deref()))
        }
        Command::Simulate(args) => commands::simulate(&args),
        Command::Expectation(args) => commands::expectation(&args),
    };
    match result {
        Ok(value) => {
            print!("{}", commands::render(&value, cli.output));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
