use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mmdude_cli::{
    cmd_bounds, cmd_denoise, cmd_evaluate, cmd_example1, cmd_feasibility, cmd_simulate, cmd_sweep,
    BoundsGrid, CliError, Globals, Overrides, SequenceFormat, SweepAxis,
};

#[derive(Parser, Debug)]
#[command(
    name = "mmdude",
    version,
    about = "Minimax denoising under channel uncertainty"
)]
struct Cli {
    /// Experiment config (JSON); a run manifest is accepted too.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap the number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Feasibility slack used when trimming the channel set.
    #[arg(long = "feas-eps", global = true)]
    feas_eps: Option<f64>,
    /// Use the exact output law of the configured source and channel instead
    /// of empirical statistics.
    #[arg(long = "exact-law", global = true)]
    exact_law: bool,
    /// Read and write sequences as one byte per symbol.
    #[arg(long, global = true)]
    binary: bool,
    /// Record wall time in result rows (outputs are then not reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Axis {
    Gamma,
    N,
    K,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a clean sequence and its noisy observation.
    Simulate,
    /// Denoise a noisy sequence with the minimax sliding-window rule.
    Denoise { noisy: PathBuf },
    /// Realized, worst-case and benchmark losses of denoisers.
    Evaluate {
        #[arg(long)]
        clean: PathBuf,
        #[arg(long)]
        noisy: PathBuf,
        /// Denoiser JSON file, or @identity, @constant:S, @minimax.
        #[arg(long = "denoiser")]
        denoisers: Vec<String>,
        /// A reconstructed sequence to score by realized loss.
        #[arg(long)]
        reconstruction: Option<PathBuf>,
    },
    /// Check the worked binary example against its reference numbers.
    Example1,
    /// Tabulate the concentration bounds.
    Bounds {
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
    },
    /// Sweep one parameter and emit CSV.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Report which channels of the uncertainty set are feasible.
    Feasibility { noisy: Option<PathBuf> },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = Globals {
        config: cli.config,
        out: cli.out,
        overrides: Overrides {
            seed: cli.seed,
            feas_eps: cli.feas_eps,
            exact_law: cli.exact_law,
        },
        format: if cli.binary {
            SequenceFormat::Binary
        } else {
            SequenceFormat::Text
        },
        timing: cli.timing,
    };
    match cli.command {
        Command::Simulate => {
            let out = cmd_simulate(&g)?;
            println!("{}", out.manifest.display());
        }
        Command::Denoise { noisy } => {
            let out = cmd_denoise(&g, &noisy)?;
            println!(
                "{}",
                std::fs::read_to_string(&out.summary)
                    .unwrap_or_default()
                    .trim_end()
            );
        }
        Command::Evaluate {
            clean,
            noisy,
            denoisers,
            reconstruction,
        } => {
            cmd_evaluate(&g, &clean, &noisy, &denoisers, reconstruction.as_deref())?;
        }
        Command::Example1 => {
            cmd_example1(&g)?;
        }
        Command::Bounds { n, k, delta } => {
            let d = BoundsGrid::default();
            let grid = BoundsGrid {
                n: n.unwrap_or(d.n),
                k: k.unwrap_or(d.k),
                delta: delta.unwrap_or(d.delta),
            };
            cmd_bounds(&g, &grid)?;
        }
        Command::Sweep { axis, values } => {
            let axis = match axis {
                Axis::Gamma => SweepAxis::Gamma,
                Axis::N => SweepAxis::N,
                Axis::K => SweepAxis::K,
            };
            cmd_sweep(&g, axis, values.as_deref())?;
        }
        Command::Feasibility { noisy } => {
            cmd_feasibility(&g, noisy.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("mmdude: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mmdude: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
