mod commands;
mod sheet;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use isol_core::Mode;

/// ISO 27001 readiness self-assessment: validate taxonomies, score sheets,
/// serve the HTTP API and inspect the experiment track record.
#[derive(Debug, Parser)]
#[command(name = "isol", version)]
struct Cli {
    /// Taxonomy document; the bundled ISO 27001 taxonomy when omitted.
    #[arg(long, global = true, env = "ISOL_TAXONOMY")]
    taxonomy: Option<PathBuf>,

    /// Store file holding users and experiments.
    #[arg(long, global = true, env = "ISOL_STORE", default_value = "isol-store.jsonl")]
    store: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Strict,
    Partial,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Partial => Mode::Partial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a taxonomy document and print its shape.
    Validate,
    /// Evaluate a score sheet file and print the summary.
    Assess {
        /// JSON object of issue id to score, or CSV `id,score` rows.
        #[arg(long)]
        sheet: PathBuf,
        #[arg(long, value_enum, env = "ISOL_MODE", default_value = "strict")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
        /// Write the JSON/CSV export here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluation timestamp (RFC 3339); defaults to the sheet's mtime so
        /// repeated runs over the same file are byte-identical.
        #[arg(long)]
        at: Option<String>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "ISOL_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
        /// Static assets of the browser UI, served under `/`.
        #[arg(long, env = "ISOL_STATIC_DIR")]
        static_dir: Option<PathBuf>,
    },
    /// Show a user's finalized attempts and their trend.
    History {
        #[arg(long)]
        user: String,
        /// Taxonomy id; defaults to the loaded taxonomy.
        #[arg(long = "taxonomy-id")]
        taxonomy_id: Option<String>,
    },
    /// Export one finalized experiment, or every experiment as a JSON backup.
    Export {
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        experiment: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate => commands::validate(cli.taxonomy.as_deref()),
        Command::Assess {
            sheet,
            mode,
            format,
            out,
            at,
        } => commands::assess(cli.taxonomy.as_deref(), &sheet, mode.into(), format, out.as_deref(), at.as_deref()),
        Command::Serve { bind, static_dir } => commands::serve(cli.taxonomy.as_deref(), &cli.store, bind, static_dir),
        Command::History { user, taxonomy_id } => {
            commands::history(cli.taxonomy.as_deref(), &cli.store, &user, taxonomy_id.as_deref())
        }
        Command::Export {
            experiment,
            all,
            format,
            out,
        } => commands::export(
            cli.taxonomy.as_deref(),
            &cli.store,
            experiment.as_deref().filter(|_| !all),
            format,
            out.as_deref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
