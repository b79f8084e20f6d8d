//! Command-line front end.

mod commands;
mod corpus;
mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use settings::{GlobalArgs, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NON_COMPLIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bpmnkit",
    version,
    about = "Validate, repair, reconstruct and compare BPMN 2.0 models"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TypeModeArg {
    Category,
    Tag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BatchStage {
    Translate,
    Correct,
    Describe,
    Reconstruct,
    Evaluate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model against the compliance rules and print the report as JSON
    Validate { file: PathBuf },
    /// Translate labels and documentation into another language
    Translate {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "English")]
        language: String,
        /// Minimum fuzzy match score when mapping translations back
        #[arg(long, default_value_t = 0.8)]
        threshold: f64,
        /// Attribute to translate; repeatable, defaults to `name`
        #[arg(long = "attribute", value_name = "NAME")]
        attributes: Vec<String>,
        /// Leave documentation text untouched
        #[arg(long)]
        no_documentation: bool,
    },
    /// Repair compliance errors in a closed loop
    Correct {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Maximum correction rounds
        #[arg(long, default_value_t = 5)]
        limit: usize,
        /// Past exchanges replayed to the model each round
        #[arg(long, default_value_t = 2)]
        window: usize,
        /// Node count up to which the whole model is regenerated
        #[arg(long, default_value_t = 10)]
        simple_threshold: usize,
        /// Write the per-round log as JSON lines
        #[arg(long, value_name = "FILE")]
        log: Option<PathBuf>,
    },
    /// Produce a natural-language description of a model
    Describe {
        file: PathBuf,
        /// Output file; stdout when omitted
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a model from a textual process description
    Reconstruct {
        description: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Directory for per-stage artifacts
        #[arg(long, value_name = "DIR")]
        run_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        limit: usize,
        #[arg(long, default_value_t = 3)]
        max_retries: u32,
        /// Skip diagram layout of the result
        #[arg(long)]
        no_layout: bool,
    },
    /// Score the similarity of two models
    Compare {
        first: PathBuf,
        second: PathBuf,
        /// Embed bare labels without neighbor context
        #[arg(long)]
        no_context: bool,
        #[arg(long, value_enum, default_value = "category")]
        type_mode: TypeModeArg,
    },
    /// Run one pipeline stage over every eligible entry of a corpus manifest
    Batch {
        manifest: PathBuf,
        #[arg(long, value_enum)]
        stage: BatchStage,
        /// Output directory; defaults to the manifest's directory
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        limit: usize,
        #[arg(long)]
        no_context: bool,
        #[arg(long, value_enum, default_value = "category")]
        type_mode: TypeModeArg,
    },
    /// Aggregate stored pair results into a summary
    Report {
        results_dir: PathBuf,
        /// Output file; format follows the extension unless --format is given
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Number of descriptions used to normalize averages
        #[arg(long)]
        descriptions: Option<usize>,
    },
}

/// Wrong usage detected after argument parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let settings = match Settings::resolve(&cli.global, |k| std::env::var(k).ok()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    match commands::dispatch(cli.command, &settings) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_FAILURE
        }
    }
}
