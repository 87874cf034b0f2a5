//! `bellwork` command-line interface.
//!
//! Exit codes: 0 on success (a "none" verdict is still success), 2 on
//! input or validation errors, 3 on i/o failures while writing output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bellwork::certifier::Method;
use bellwork::cli::{
    cmd_certify, cmd_ledger, cmd_monogamy, cmd_simulate, cmd_sweep_chained, cmd_sweep_noise,
    cmd_values, OutputFormat,
};
use bellwork::error::Error;
use bellwork::ledger::MemoryVariant;

#[derive(Parser)]
#[command(
    name = "bellwork",
    version,
    about = "XOR-game battery transduction: simulate rounds, audit energy ledgers, certify post-quantumness from work data",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Ndjson,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Ndjson => OutputFormat::Ndjson,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Hoeffding,
    Azuma,
    ClopperPearson,
    Wilson,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Hoeffding => Method::Hoeffding,
            MethodArg::Azuma => Method::Azuma,
            MethodArg::ClopperPearson => Method::ClopperPearson,
            MethodArg::Wilson => Method::Wilson,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Reversible,
    MeasuredMemory,
    FullTranscript,
}

impl From<VariantArg> for MemoryVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Reversible => MemoryVariant::Reversible,
            VariantArg::MeasuredMemory => MemoryVariant::MeasuredMemory,
            VariantArg::FullTranscript => MemoryVariant::FullTranscript,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print local, quantum, and nonsignalling values and battery ceilings.
    Values {
        /// Game spec: `chsh`, `chained:N`, or a path to a game JSON file.
        #[arg(long)]
        game: String,
        /// Battery gap.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Report ceilings in absolute energy instead of delta units.
        #[arg(long)]
        absolute: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Simulate rounds and emit a work record.
    Simulate {
        /// Game spec: `chsh`, `chained:N`, or a path to a game JSON file.
        #[arg(long)]
        game: String,
        /// Behaviour spec: `pr`, `tsirelson`, `local-zeros`, `noisy-pr:EPS`,
        /// `chained-q:N`, or a path to a behaviour JSON file.
        #[arg(long)]
        behavior: String,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Battery gap.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "ndjson")]
        format: FormatArg,
    },
    /// Certify a work record against a game's thresholds.
    Certify {
        /// Path to an NDJSON work record.
        record: PathBuf,
        /// Game spec the record was produced for.
        #[arg(long)]
        game: String,
        #[arg(long, value_enum, default_value = "hoeffding")]
        method: MethodArg,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// Calibration upper bound on the false-positive readout rate.
        #[arg(long)]
        eta0_upper: Option<f64>,
        /// Calibration upper bound on the true-positive readout rate.
        #[arg(long)]
        eta1_upper: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Emit plot-ready sweep tables.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
    /// One cycle's thermodynamic bookkeeping at a given success rate.
    Ledger {
        /// Success probability for the cycle.
        #[arg(long)]
        p: f64,
        /// Battery gap.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// The product k_B T ln 2 in the same energy units as delta.
        #[arg(long, default_value_t = 1.0)]
        kt_ln2: f64,
        #[arg(long, value_enum, default_value = "reversible")]
        variant: VariantArg,
        /// Transcript entropy H(T) in bits (full-transcript variant).
        #[arg(long)]
        transcript_entropy: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// CHSH battery monogamy across the AB and AC marginals.
    Monogamy {
        /// Tripartite spec: `pr-uniform`, `tsirelson-uniform`, `uniform`,
        /// or a path to a tripartite JSON file.
        #[arg(long)]
        tripartite: String,
        /// Battery gap.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
}

#[derive(Subcommand)]
enum SweepKind {
    /// Noisy-PR interpolation: eps, S, work, quantum-ceiling flag.
    Noise {
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long, default_value_t = 1.0)]
        stop: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Chained family: N, local and quantum values, gap, leading term.
    Chained {
        #[arg(long, default_value_t = 2)]
        n_from: u32,
        #[arg(long, default_value_t = 8)]
        n_to: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
}

fn run(cli: Cli) -> Result<(String, Option<PathBuf>), Error> {
    match cli.command {
        Command::Values {
            game,
            delta,
            absolute,
            out,
            format,
        } => Ok((cmd_values(&game, delta, absolute, format.into())?, out)),
        Command::Simulate {
            game,
            behavior,
            rounds,
            seed,
            delta,
            out,
            format,
        } => Ok((
            cmd_simulate(&game, &behavior, rounds, seed, delta, format.into())?,
            out,
        )),
        Command::Certify {
            record,
            game,
            method,
            alpha,
            eta0_upper,
            eta1_upper,
            out,
            format,
        } => Ok((
            cmd_certify(
                &record,
                &game,
                method.into(),
                alpha,
                eta0_upper,
                eta1_upper,
                format.into(),
            )?,
            out,
        )),
        Command::Sweep { kind } => match kind {
            SweepKind::Noise {
                start,
                stop,
                step,
                out,
                format,
            } => Ok((cmd_sweep_noise(start, stop, step, format.into())?, out)),
            SweepKind::Chained {
                n_from,
                n_to,
                out,
                format,
            } => Ok((cmd_sweep_chained(n_from, n_to, format.into())?, out)),
        },
        Command::Ledger {
            p,
            delta,
            kt_ln2,
            variant,
            transcript_entropy,
            out,
            format,
        } => Ok((
            cmd_ledger(
                p,
                delta,
                kt_ln2,
                variant.into(),
                transcript_entropy,
                format.into(),
            )?,
            out,
        )),
        Command::Monogamy {
            tripartite,
            delta,
            out,
            format,
        } => Ok((cmd_monogamy(&tripartite, delta, format.into())?, out)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((output, out_path)) => match out_path {
            Some(path) => {
                if let Err(e) = fs::write(&path, &output) {
                    eprintln!("bellwork: cannot write '{}': {e}", path.display());
                    return ExitCode::from(3);
                }
                ExitCode::SUCCESS
            }
            None => {
                print!("{output}");
                ExitCode::SUCCESS
            }
        },
        Err(e) => {
            eprintln!("bellwork: {e}");
            match e {
                Error::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
