//! Command-line front end: configuration loading, the five commands and
//! deterministic output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};

use config::{Format, Mode};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cavent",
    version,
    about = "Entanglement dynamics of two atoms in two leaky cavities",
    after_help = "Any config field can be overridden with its dotted path, e.g. --cavity1.delta 2"
)]
pub struct Cli {
    /// JSON run configuration (defaults to a built-in document)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads for sweeps (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Also write the 16-amplitude joint state (to <out>.state, or stdout)
    #[arg(long, global = true)]
    pub dump_state: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Concurrence time series on the configured grid
    Dynamics,
    /// Sudden death, revival and birth times, and the regime label
    Events,
    /// W-state design and the three Bell extractions
    Protocol,
    /// Events or protocol figures over a parameter grid
    Sweep,
    /// Oracle comparisons and invariant checks
    Validate,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Dynamics => Mode::Dynamics,
            Command::Events => Mode::Events,
            Command::Protocol => Mode::Protocol,
            Command::Sweep => Mode::Sweep,
            Command::Validate => Mode::Validate,
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Dynamics | Command::Sweep => Format::Csv,
            Command::Events | Command::Protocol | Command::Validate => Format::Json,
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        // A closed reader (e.g. `| head`) is not an error.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Runs the command line `args` (including the program name).
pub fn run(args: Vec<String>) -> Result<(), CliError> {
    let (rest, overrides) = config::extract_overrides(args)?;
    let cli = match Cli::try_parse_from(rest) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => return Err(CliError::Config(e.to_string())),
        Err(e) => {
            // --help and --version
            return write_stdout(&e.to_string());
        }
    };
    let cfg = config::load(cli.config.as_deref(), &overrides)?;
    let mode = cli.command.mode();
    if let Some(m) = cfg.mode {
        if m != mode {
            return Err(CliError::Config(format!(
                "mode: config declares {m:?} but the command is {mode:?}"
            )));
        }
    }
    let format = cli
        .format
        .map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        })
        .or(cfg.output.format)
        .unwrap_or(cli.command.default_format());
    if cli.dump_state && !matches!(cli.command, Command::Dynamics | Command::Protocol) {
        return Err(CliError::Config(
            "--dump-state is available for dynamics and protocol only".into(),
        ));
    }

    let out = match cli.command {
        Command::Dynamics => commands::run_dynamics(&cfg, format, cli.dump_state)?,
        Command::Events => commands::run_events(&cfg, format)?,
        Command::Protocol => commands::run_protocol(&cfg, format, cli.dump_state)?,
        Command::Sweep => commands::run_sweep(&cfg, format, cli.jobs)?,
        Command::Validate => commands::run_validate(&cfg, format)?,
    };

    let out_path = cli.out.clone().or(cfg.output.path.as_ref().map(PathBuf::from));
    match &out_path {
        Some(p) => write_file(p, &out.body)?,
        None => write_stdout(&out.body)?,
    }
    if let Some(state) = &out.state_dump {
        match &out_path {
            Some(p) => {
                let mut name = p.clone().into_os_string();
                name.push(".state");
                write_file(Path::new(&name), state)?;
            }
            None => write_stdout(state)?,
        }
    }
    match out.failure {
        Some(names) => Err(CliError::Validation(names)),
        None => Ok(()),
    }
}
