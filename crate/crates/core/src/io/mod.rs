//! Line-delimited JSON file formats and report rendering.

mod records;
mod report;
mod suite_file;

use thiserror::Error;

pub use records::{
    parse_metrics, parse_scores, parse_translations, write_metrics, write_scores, write_translations,
    OrphanTranslation, TranslationRecord, Translations,
};
pub use report::{render_report, ReportFormat};
pub use suite_file::{parse_suite, write_suite, SlotRecord, SuiteRecord};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate record {key} on lines {first} and {second}")]
    DuplicateRecord { key: String, first: usize, second: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Non-blank lines with 1-based numbers.
fn jsonl_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_line<T: serde::de::DeserializeOwned>(line: usize, text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        line,
        message: e.to_string(),
    })
}

fn write_jsonl<T: serde::Serialize>(
    mut w: impl std::io::Write,
    items: impl IntoIterator<Item = T>,
) -> Result<(), IoError> {
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
