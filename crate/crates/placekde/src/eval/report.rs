//! Plain-text serialization of evaluation reports.
//!
//! Layout, in order: a version line, `key: value` header lines, an optional
//! block of `config.<key>` echo lines, the per-fold accuracies on one line,
//! the two derived accuracy lines, then ten `confusion.<label>` rows (truth
//! label per row, predicted counts in the fixed label order). Floats use
//! the shortest decimal form that parses back to the same value, so a
//! write/read round trip is lossless. Reading re-derives the two accuracy
//! lines and rejects files where they disagree with the data.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::classify::{SemanticLabel, LABEL_COUNT};
use crate::error::{Error, Result};

use super::EvalReport;

const VERSION_LINE: &str = "placekde report v1";

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct LineReader<R> {
    lines: std::io::Lines<R>,
    line_no: u64,
}

impl<R: BufRead> LineReader<R> {
    fn new(reader: R) -> Self {
        LineReader { lines: reader.lines(), line_no: 0 }
    }

    fn next_line(&mut self) -> Result<Option<String>> {
        match self.lines.next() {
            None => Ok(None),
            Some(line) => {
                self.line_no += 1;
                Ok(Some(line?))
            }
        }
    }

    fn expect_value(&mut self, key: &str) -> Result<String> {
        let line = self
            .next_line()?
            .ok_or_else(|| parse_err(self.line_no + 1, format!("missing `{key}:` line")))?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(':'))
            .map(|rest| rest.trim().to_string())
            .ok_or_else(|| parse_err(self.line_no, format!("expected `{key}:`, found `{line}`")))
    }
}

impl EvalReport {
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{VERSION_LINE}")?;
        writeln!(w, "method: {}", self.method_id)?;
        writeln!(w, "folds: {}", self.folds)?;
        writeln!(w, "seed: {}", self.seed)?;
        writeln!(w, "places: {}", self.place_count)?;
        for (key, value) in &self.config_echo {
            writeln!(w, "config.{key}: {value}")?;
        }
        let accuracies: Vec<String> =
            self.fold_accuracies.iter().map(|a| a.to_string()).collect();
        writeln!(w, "fold_accuracies: {}", accuracies.join(" "))?;
        writeln!(w, "mean_fold_accuracy: {}", self.mean_fold_accuracy())?;
        writeln!(w, "overall_accuracy: {}", self.overall_accuracy())?;
        for (label, row) in SemanticLabel::ALL.iter().zip(&self.confusion) {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(w, "confusion.{label}: {}", cells.join(" "))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut file)?;
        use std::io::Write as _;
        file.flush()?;
        Ok(())
    }

    pub fn read_from(reader: impl BufRead) -> Result<Self> {
        let mut r = LineReader::new(reader);

        let version = r
            .next_line()?
            .ok_or_else(|| parse_err(1, "empty report file"))?;
        if version != VERSION_LINE {
            return Err(parse_err(1, format!("expected `{VERSION_LINE}`, found `{version}`")));
        }

        let method_id = r.expect_value("method")?;
        let folds: usize = r
            .expect_value("folds")?
            .parse()
            .map_err(|_| parse_err(r.line_no, "invalid fold count"))?;
        let seed: u64 = r
            .expect_value("seed")?
            .parse()
            .map_err(|_| parse_err(r.line_no, "invalid seed"))?;
        let place_count: usize = r
            .expect_value("places")?
            .parse()
            .map_err(|_| parse_err(r.line_no, "invalid place count"))?;

        // Config echo lines run until the fold-accuracy line.
        let mut config_echo = Vec::new();
        let accuracy_line = loop {
            let line = r
                .next_line()?
                .ok_or_else(|| parse_err(r.line_no + 1, "missing `fold_accuracies:` line"))?;
            if let Some(rest) = line.strip_prefix("config.") {
                let (key, value) = rest
                    .split_once(": ")
                    .ok_or_else(|| parse_err(r.line_no, format!("malformed config line `{line}`")))?;
                config_echo.push((key.to_string(), value.to_string()));
            } else {
                break line;
            }
        };
        let accuracies_text = accuracy_line
            .strip_prefix("fold_accuracies:")
            .ok_or_else(|| {
                parse_err(r.line_no, format!("expected `fold_accuracies:`, found `{accuracy_line}`"))
            })?;
        let fold_accuracies: Vec<f64> = accuracies_text
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(r.line_no, format!("invalid accuracy `{t}`"))))
            .collect::<Result<_>>()?;
        if fold_accuracies.is_empty() {
            return Err(parse_err(r.line_no, "report contains no fold accuracies"));
        }
        if fold_accuracies.len() > folds {
            return Err(parse_err(
                r.line_no,
                format!("{} fold accuracies for {folds} folds", fold_accuracies.len()),
            ));
        }

        let mean: f64 = r
            .expect_value("mean_fold_accuracy")?
            .parse()
            .map_err(|_| parse_err(r.line_no, "invalid mean fold accuracy"))?;
        let overall: f64 = r
            .expect_value("overall_accuracy")?
            .parse()
            .map_err(|_| parse_err(r.line_no, "invalid overall accuracy"))?;

        let mut confusion = [[0u64; LABEL_COUNT]; LABEL_COUNT];
        for (label, row) in SemanticLabel::ALL.iter().zip(confusion.iter_mut()) {
            let cells = r.expect_value(&format!("confusion.{label}"))?;
            let parsed: Vec<u64> = cells
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| parse_err(r.line_no, format!("invalid count `{t}`"))))
                .collect::<Result<_>>()?;
            if parsed.len() != LABEL_COUNT {
                return Err(parse_err(
                    r.line_no,
                    format!("expected {LABEL_COUNT} counts, found {}", parsed.len()),
                ));
            }
            row.copy_from_slice(&parsed);
        }

        let report = EvalReport {
            method_id,
            folds,
            seed,
            place_count,
            config_echo,
            fold_accuracies,
            confusion,
        };

        // The derived lines must agree with the data they were derived from.
        let total: u64 = report.confusion.iter().flatten().sum();
        if total != report.place_count as u64 {
            return Err(parse_err(
                0,
                format!("confusion matrix counts {total} predictions for {} places", report.place_count),
            ));
        }
        if (report.mean_fold_accuracy() - mean).abs() > 1e-12 {
            return Err(parse_err(0, "mean_fold_accuracy disagrees with fold accuracies"));
        }
        if (report.overall_accuracy() - overall).abs() > 1e-12 {
            return Err(parse_err(0, "overall_accuracy disagrees with the confusion matrix"));
        }
        Ok(report)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
