//! Scores an automatically generated SRT subtitle file against a
//! reference SRT file.
//!
//! Exit codes: 0 on success, 1 when a metric cannot be computed (for
//! example against an empty reference), 2 when an input file cannot be
//! read, 3 when an input file is not valid SRT, 4 when an unknown metric
//! name is requested.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use subscore::metrics::MetricOptions;
use subscore::{
    compute_metric, pairs_for_metric, parse_srt_lenient, strip_file_markup, MetricError,
    PunctuationHandling, ScoreConfig, ShiftConfig, SubtitleFile, METRIC_NAMES,
};

mod report;
use report::{format_report, Format};

/// Tokens a single scoring region may hold before the quadratic edit
/// distance computation is refused (override with --allow-large-regions).
const REGION_TOKEN_LIMIT: usize = 20_000;

#[derive(Parser)]
#[command(
    name = "subscore",
    version,
    about = "Score an automatically generated subtitle file against a reference",
    after_help = "Metrics: SubER (default), SubER-cased, WER, WER-cased, WER-break, t-WER, \
                  BLEU-block, BLEU-sent, BLEU-sent-break, TER-block, TER-sent, TER-sent-break, \
                  chrF-sent, TER-br-block, TER-br-sent. `--metrics all` computes every one."
)]
struct Cli {
    /// Hypothesis SRT file (the file being evaluated)
    #[arg(short = 'H', long, value_name = "FILE")]
    hypothesis: PathBuf,

    /// Reference SRT file
    #[arg(short = 'R', long, value_name = "FILE")]
    reference: PathBuf,

    /// Metrics to compute (space- or comma-separated; "all" for every one)
    #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "SubER")]
    metrics: Vec<String>,

    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Keep HTML-like tags and ASS override blocks instead of stripping them
    #[arg(long)]
    no_markup_stripping: bool,

    /// Write the segment pairing of alignment-based metrics to stderr as JSON
    #[arg(long)]
    dump_alignment: bool,

    /// Longest phrase, in tokens, a single shift may move
    #[arg(long, value_name = "N", default_value_t = 10)]
    max_shift_size: usize,

    /// Furthest, in token positions, a shifted phrase may move
    #[arg(long, value_name = "N", default_value_t = 50)]
    max_shift_distance: usize,

    /// Score regions of any size (edit distance within a region is quadratic)
    #[arg(long)]
    allow_large_regions: bool,

    /// Lowercase text for every requested metric
    #[arg(long, conflicts_with = "keep_case")]
    lowercase: bool,

    /// Keep casing for every requested metric
    #[arg(long)]
    keep_case: bool,

    /// Punctuation handling for every requested metric
    #[arg(long, value_enum, value_name = "MODE")]
    punctuation: Option<PunctChoice>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum PunctChoice {
    /// Strip punctuation from word edges
    Remove,
    /// Keep punctuation glued to words
    Attach,
    /// Emit edge punctuation as separate tokens
    Split,
}

impl From<PunctChoice> for PunctuationHandling {
    fn from(choice: PunctChoice) -> Self {
        match choice {
            PunctChoice::Remove => PunctuationHandling::Remove,
            PunctChoice::Attach => PunctuationHandling::Attach,
            PunctChoice::Split => PunctuationHandling::Split,
        }
    }
}

enum CliError {
    Read(PathBuf, std::io::Error),
    Parse(PathBuf, usize, String),
    UnknownMetric(String),
    Metric(String, MetricError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Metric(..) => 1,
            CliError::Read(..) => 2,
            CliError::Parse(..) => 3,
            CliError::UnknownMetric(..) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Read(path, err) => format!("cannot read {}: {}", path.display(), err),
            CliError::Parse(path, line, msg) => {
                format!("{}: line {}: {}", path.display(), line, msg)
            }
            CliError::UnknownMetric(name) => {
                format!("unknown metric {:?}; valid names: {}", name, METRIC_NAMES.join(", "))
            }
            CliError::Metric(name, err) => format!("cannot compute {}: {}", name, err),
        }
    }
}

fn load_file(path: &Path, strip_markup: bool) -> Result<SubtitleFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read(path.to_path_buf(), e))?;
    let parsed = parse_srt_lenient(&text);
    if let Some(issue) = parsed.errors().next() {
        return Err(CliError::Parse(path.to_path_buf(), issue.line, issue.message.clone()));
    }
    for warning in parsed.warnings() {
        eprintln!("warning: {}: line {}: {}", path.display(), warning.line, warning.message);
    }
    let file = parsed.file.with_source_name(path.display().to_string());
    Ok(if strip_markup { strip_file_markup(&file) } else { file })
}

fn expand_metric_names(requested: &[String]) -> Result<Vec<String>, CliError> {
    let mut names: Vec<String> = Vec::new();
    let push = |name: &str, names: &mut Vec<String>| {
        if !names.iter().any(|n| n == name) {
            names.push(name.to_string());
        }
    };
    for name in requested {
        if name == "all" {
            for known in METRIC_NAMES {
                push(known, &mut names);
            }
        } else if METRIC_NAMES.contains(&name.as_str()) {
            push(name, &mut names);
        } else {
            return Err(CliError::UnknownMetric(name.clone()));
        }
    }
    Ok(names)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let names = expand_metric_names(&cli.metrics)?;
    let hyp = load_file(&cli.hypothesis, !cli.no_markup_stripping)?;
    let reference = load_file(&cli.reference, !cli.no_markup_stripping)?;

    let options = MetricOptions {
        lowercase: match (cli.lowercase, cli.keep_case) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        },
        punctuation: cli.punctuation.map(Into::into),
        config: ScoreConfig {
            shifts: ShiftConfig {
                max_shift_size: cli.max_shift_size,
                max_shift_distance: cli.max_shift_distance,
            },
            max_region_tokens: (!cli.allow_large_regions).then_some(REGION_TOKEN_LIMIT),
        },
    };

    let mut scores = Vec::with_capacity(names.len());
    for name in &names {
        let score = compute_metric(name, &hyp, &reference, &options)
            .map_err(|e| CliError::Metric(name.clone(), e))?;
        for warning in &score.warnings {
            eprintln!("warning: [{}] {}", name, warning);
        }
        if cli.dump_alignment {
            if let Some(pairs) = pairs_for_metric(name, &hyp, &reference, &options)
                .map_err(|e| CliError::Metric(name.clone(), e))?
            {
                let dump = serde_json::json!({ "metric": name, "pairs": pairs });
                eprintln!("{}", serde_json::to_string(&dump).expect("pairs serialize"));
            }
        }
        scores.push(score);
    }

    print!(
        "{}",
        format_report(
            &cli.hypothesis.display().to_string(),
            &cli.reference.display().to_string(),
            &scores,
            cli.format,
        )
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
