//! Command-line front end.
//!
//! Every subcommand renders its full output in memory and writes it only on
//! success, so a failing run never leaves a partial document on stdout.
//! Failures print `{"error": {"code", "message"}}` on stderr and exit 1.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{load_items, load_precomputed, round3, write_matrices, EvaluationRun};
use crate::error::{Error, Result};
use crate::matrix::{class_metrics, Format, Vocabulary};
use crate::semsim::Measure;
use crate::taxonomy::{ConceptId, Taxonomy};
use crate::AlignmentSet;

#[derive(Debug, Parser)]
#[command(name = "semconf", version, about = "Semantic alignment and confusion matrices for multi-label classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CommandKind {
    Sim,
    Align,
    Matrix,
    Metrics,
    Validate,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit per-item similarity matrices
    Sim(RunArgs),
    /// Emit one alignment record per item (JSON lines)
    Align(RunArgs),
    /// Emit the confusion matrix
    Matrix(RunArgs),
    /// Emit per-class counts, precision/recall/F1, Hamming loss and accuracy
    Metrics(RunArgs),
    /// Emit the taxonomy validation report
    Validate(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureArg {
    Feature,
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Taxonomy JSON document
    #[arg(long, value_name = "PATH")]
    taxonomy: Option<PathBuf>,
    /// Items JSON document
    #[arg(long, value_name = "PATH")]
    items: Option<PathBuf>,
    /// Precomputed similarity matrices (JSON array)
    #[arg(long, value_name = "PATH")]
    precomputed: Option<PathBuf>,
    /// Similarity measure used with --taxonomy [default: feature]
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
    /// Alignment threshold [default: midpoint of the measure's range]
    #[arg(long, value_name = "R")]
    threshold: Option<f64>,
    /// Confusion matrix output format
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Add a column counting unmatched predicted labels
    #[arg(long)]
    spurious_column: bool,
    /// JSON array listing the closed class set
    #[arg(long, value_name = "PATH")]
    vocabulary: Option<PathBuf>,
    /// Worker threads
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,
}

/// Where similarity values come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Taxonomy { path: PathBuf, measure: Measure },
    Precomputed(PathBuf),
}

/// Validated configuration of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Option<Source>,
    pub items: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub format: Format,
    pub spurious_column: bool,
    pub vocabulary: Option<PathBuf>,
    pub jobs: usize,
}

impl RunConfig {
    fn from_args(args: RunArgs, command: CommandKind) -> Result<Self> {
        let measure = args.measure.map(|m| match m {
            MeasureArg::Feature => Measure::Feature,
            MeasureArg::Path => Measure::Path,
        });
        let source = match (args.taxonomy, args.precomputed) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("--taxonomy and --precomputed are mutually exclusive".into()))
            }
            (None, Some(_)) if measure.is_some() => {
                return Err(Error::Config("--measure cannot be combined with --precomputed".into()))
            }
            (Some(path), None) => Some(Source::Taxonomy {
                path,
                measure: measure.unwrap_or(Measure::Feature),
            }),
            (None, Some(path)) => Some(Source::Precomputed(path)),
            (None, None) => None,
        };
        if args.jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        if let Some(t) = args.threshold {
            if !t.is_finite() {
                return Err(Error::Config("--threshold must be a finite number".into()));
            }
        }
        match command {
            CommandKind::Sim | CommandKind::Align | CommandKind::Matrix => {
                if source.is_none() {
                    return Err(Error::Config("one of --taxonomy or --precomputed is required".into()));
                }
                if args.items.is_none() {
                    return Err(Error::Config("--items is required".into()));
                }
            }
            CommandKind::Metrics => {
                if args.items.is_none() {
                    return Err(Error::Config("--items is required".into()));
                }
            }
            CommandKind::Validate => {
                if !matches!(source, Some(Source::Taxonomy { .. })) {
                    return Err(Error::Config("validate requires --taxonomy".into()));
                }
            }
        }
        Ok(RunConfig {
            source,
            items: args.items,
            threshold: args.threshold,
            format: match args.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            },
            spurious_column: args.spurious_column,
            vocabulary: args.vocabulary,
            jobs: args.jobs,
        })
    }
}

/// Parses `argv` (including the program name), runs the command, and
/// returns the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{err}");
                return 0;
            }
            let text = err.render().to_string();
            let first = text.lines().next().unwrap_or_default();
            let message = first.strip_prefix("error: ").unwrap_or(first);
            return report(stderr, &Error::Config(message.to_string()));
        }
    };
    let (kind, args) = match cli.command {
        Command::Sim(a) => (CommandKind::Sim, a),
        Command::Align(a) => (CommandKind::Align, a),
        Command::Matrix(a) => (CommandKind::Matrix, a),
        Command::Metrics(a) => (CommandKind::Metrics, a),
        Command::Validate(a) => (CommandKind::Validate, a),
    };
    let output = RunConfig::from_args(args, kind).and_then(|config| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| execute(kind, &config))
    });
    match output {
        Ok(text) => match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
            Ok(()) => 0,
            Err(e) => report(stderr, &Error::from(e)),
        },
        Err(err) => report(stderr, &err),
    }
}

fn report(stderr: &mut dyn Write, err: &Error) -> i32 {
    let doc = serde_json::json!({ "error": { "code": err.code(), "message": err.to_string() } });
    let _ = writeln!(stderr, "{doc}");
    1
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn execute(kind: CommandKind, config: &RunConfig) -> Result<String> {
    if kind == CommandKind::Validate {
        let Some(Source::Taxonomy { path, .. }) = &config.source else {
            unreachable!("validated in RunConfig::from_args");
        };
        let report = Taxonomy::from_reader(open(path)?)?.validate();
        return Ok(serde_json::to_string_pretty(&report).expect("report serializes") + "\n");
    }

    let items_path = config.items.as_deref().expect("validated in RunConfig::from_args");
    let items = load_items(open(items_path)?)?;
    let mut vocab = Vocabulary::from_items(&items);
    if let Some(path) = &config.vocabulary {
        let labels: Vec<String> =
            serde_json::from_reader(open(path)?).map_err(|e| Error::parse("vocabulary", e))?;
        let labels = labels
            .into_iter()
            .map(ConceptId::new)
            .collect::<Result<BTreeSet<_>>>()?;
        vocab = vocab.with_labels(labels)?;
    }

    if kind == CommandKind::Metrics {
        let metrics = class_metrics(&items, vocab.labels())?;
        return Ok(serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n");
    }

    let run = match config.source.as_ref().expect("validated in RunConfig::from_args") {
        Source::Taxonomy { path, measure } => {
            let taxonomy = Taxonomy::from_reader(open(path)?)?;
            EvaluationRun::with_taxonomy(items, taxonomy, *measure)?
        }
        Source::Precomputed(path) => {
            let matrices = load_precomputed(open(path)?, &items)?;
            EvaluationRun::with_matrices(items, matrices)?
        }
    };
    let measure = run.measure();
    let threshold = match config.threshold {
        Some(t) if !measure.contains(t) => {
            return Err(Error::Config(format!(
                "--threshold {t} lies outside [{}, {}] of measure {}",
                measure.min, measure.max, measure.name
            )))
        }
        Some(t) => t,
        None => measure.threshold(),
    };

    match kind {
        CommandKind::Sim => Ok(write_matrices(&run.similarity_matrices()?)),
        CommandKind::Align => {
            let mut out = String::new();
            for mut alignment in run.alignments(threshold)? {
                round_similarities(&mut alignment);
                out.push_str(&serde_json::to_string(&alignment).expect("alignment serializes"));
                out.push('\n');
            }
            Ok(out)
        }
        CommandKind::Matrix => Ok(run
            .confusion_matrix(threshold, &vocab)?
            .render(config.format, config.spurious_column)),
        CommandKind::Metrics | CommandKind::Validate => unreachable!("handled above"),
    }
}

fn round_similarities(alignment: &mut AlignmentSet) {
    for pair in &mut alignment.pairs {
        pair.similarity = round3(pair.similarity);
    }
}
