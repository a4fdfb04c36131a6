//! Library side of the `mmdude` command-line tool: experiment configs,
//! sequence files, and the subcommands themselves.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{
    cmd_bounds, cmd_denoise, cmd_evaluate, cmd_example1, cmd_feasibility, cmd_simulate, cmd_sweep,
    BoundsGrid, Globals, ResultRow, SweepAxis,
};
pub use config::{Experiment, ExperimentConfig, OrderSpec, Overrides};
pub use error::{CliError, CliResult};
pub use io::SequenceFormat;
