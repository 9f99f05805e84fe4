//! Report rendering: a tab-separated text table or a JSON document.

use serde::Serialize;
use subscore::MetricScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Serialize)]
struct Report<'a> {
    hypothesis: &'a str,
    reference: &'a str,
    scores: &'a [MetricScore],
}

/// Renders the scores. Text format is one `NAME<TAB>VALUE` line per
/// metric with values rounded to two decimals; JSON carries full
/// precision and the per-score details, with a fixed field order.
pub fn format_report(
    hypothesis: &str,
    reference: &str,
    scores: &[MetricScore],
    format: Format,
) -> String {
    match format {
        Format::Text => {
            let mut out = String::new();
            for score in scores {
                out.push_str(&format!("{}\t{:.2}\n", score.metric, score.value));
            }
            out
        }
        Format::Json => {
            let report = Report { hypothesis, reference, scores };
            let mut out = serde_json::to_string_pretty(&report).expect("report serializes");
            out.push('\n');
            out
        }
    }
}
