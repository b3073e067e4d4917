use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;
mod tapefile;

/// Exit codes.
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_PARAMS: u8 = 2;
pub const EXIT_UNCORRECTABLE: u8 = 3;
pub const EXIT_MALFORMED: u8 = 4;
pub const EXIT_CONTRACT: u8 = 5;
pub const EXIT_STEP_CAP: u8 = 6;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn new(code: u8, msg: impl Into<String>) -> CliError {
        CliError { code, msg: msg.into() }
    }

    pub fn params(msg: impl Into<String>) -> CliError {
        CliError::new(EXIT_PARAMS, msg)
    }

    pub fn malformed(msg: impl Into<String>) -> CliError {
        CliError::new(EXIT_MALFORMED, msg)
    }

    pub fn io(path: &Path, err: io::Error) -> CliError {
        CliError::new(EXIT_OTHER, format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

#[derive(Parser)]
#[command(name = "catacode", version, about = "BCH-protected catalytic tapes and machine simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the modulus and generator order of GF(2^r).
    Field {
        #[arg(long)]
        r: u32,
    },
    /// Append check bits protecting a tape against `e` bit errors.
    Encode {
        #[arg(long)]
        tape: PathBuf,
        #[arg(long)]
        e: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flip distinct random bits of a tape file.
    Corrupt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        flips: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correct an encoded tape and write the `c` data bits.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        e: usize,
        #[arg(long)]
        c: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run machine programs.
    Sim {
        #[command(subcommand)]
        command: SimCommand,
    },
    /// Hamming-syndrome block memory.
    Mem {
        #[command(subcommand)]
        command: MemCommand,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Run a program under one of the simulations.
    Run(SimRunArgs),
}

#[derive(Subcommand)]
enum MemCommand {
    /// Replay a steering script on one block.
    Demo(MemDemoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Plain,
    BchWrap,
    MemExpand,
    ReverseCount,
}

#[derive(Args, Debug)]
pub struct SimRunArgs {
    #[arg(long)]
    pub program: PathBuf,
    #[arg(long)]
    pub tape: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Error budget.
    #[arg(long)]
    pub e: Option<usize>,
    /// Block count for mem-expand (with --k).
    #[arg(long, requires = "k")]
    pub blocks: Option<usize>,
    /// Block exponent for mem-expand (with --blocks).
    #[arg(long, requires = "blocks")]
    pub k: Option<u32>,
    /// Divergence parameter selecting the compact mem-expand layout.
    #[arg(long, conflicts_with = "blocks")]
    pub delta_hat: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// Work bits kept as plain cells under mem-expand.
    #[arg(long)]
    pub plain: Option<usize>,
    /// Try every witness up to this length.
    #[arg(long)]
    pub witness_enum: Option<usize>,
    /// A single witness as a 0/1 string.
    #[arg(long, conflicts_with = "witness_enum")]
    pub aux: Option<String>,
    /// Input as a 0/1 string.
    #[arg(long, default_value = "")]
    pub input: String,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, default_value_t = 64)]
    pub aux_len: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the final catalytic tape here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MemDemoArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub script: PathBuf,
    /// Initial block contents; random from the seed when absent.
    #[arg(long)]
    pub tape: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Field { r } => commands::field(r),
        Command::Encode { tape, e, out } => commands::encode(&tape, e, &out),
        Command::Corrupt { input, flips, seed, out } => commands::corrupt(&input, flips, seed, &out),
        Command::Decode { input, e, c, out, report } => commands::decode(&input, e, c, &out, report.as_deref()),
        Command::Sim { command: SimCommand::Run(args) } => commands::sim_run(&args),
        Command::Mem { command: MemCommand::Demo(args) } => commands::mem_demo(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("catacode: {err}");
            ExitCode::from(err.code)
        }
    }
}
