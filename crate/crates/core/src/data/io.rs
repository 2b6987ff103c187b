//! Line-oriented dataset files.
//!
//! ```text
//! # optional comment lines, anywhere
//! dirconf-dataset 1 <dim> <num_classes>
//! example <id> <label> <T>
//! <dim whitespace-separated numbers>      (T rows)
//! example ...
//! ```
//!
//! Numbers are written with Rust's shortest round-trip float formatting, so
//! save/load is lossless. An empty file (or one with only comments) is an
//! empty dataset.

use std::fmt::Write as _;
use std::path::Path;

use super::example::{Dataset, DialogueExample};
use crate::error::{Error, Result};

pub const DATASET_MAGIC: &str = "dirconf-dataset";
pub const DATASET_VERSION: u32 = 1;

pub fn format_examples(ds: &Dataset, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(
        out,
        "{DATASET_MAGIC} {DATASET_VERSION} {} {}",
        ds.dim, ds.num_classes
    );
    for ex in &ds.examples {
        let _ = writeln!(out, "example {} {} {}", ex.id, ex.label, ex.len());
        for row in &ex.features {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

pub fn save_examples(ds: &Dataset, path: &Path, comments: &[String]) -> Result<()> {
    ds.validate()?;
    std::fs::write(path, format_examples(ds, comments)).map_err(|e| Error::io(path, e))
}

pub fn load_examples(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_examples(&text, &path.display().to_string())
}

pub fn parse_examples(text: &str, source: &str) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, msg: String| Error::parse(source, line, msg);

    let Some((hline, header)) = lines.next() else {
        return Ok(Dataset::default());
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != DATASET_MAGIC {
        return Err(err(
            hline,
            format!("expected `{DATASET_MAGIC} <version> <dim> <classes>`"),
        ));
    }
    let version: u32 = fields[1]
        .parse()
        .map_err(|_| err(hline, "bad version".into()))?;
    if version != DATASET_VERSION {
        return Err(err(hline, format!("unsupported dataset version {version}")));
    }
    let dim: usize = fields[2]
        .parse()
        .map_err(|_| err(hline, "bad dimension".into()))?;
    let num_classes: usize = fields[3]
        .parse()
        .map_err(|_| err(hline, "bad class count".into()))?;

    let mut examples = Vec::new();
    while let Some((line, text)) = lines.next() {
        let f: Vec<&str> = text.split_whitespace().collect();
        if f.len() != 4 || f[0] != "example" {
            return Err(err(line, "expected `example <id> <label> <T>`".into()));
        }
        let id = f[1].to_string();
        let label: usize = f[2]
            .parse()
            .map_err(|_| err(line, format!("bad label {:?}", f[2])))?;
        if label >= num_classes {
            return Err(err(
                line,
                format!("label {label} outside {num_classes} classes"),
            ));
        }
        let t: usize = f[3]
            .parse()
            .map_err(|_| err(line, format!("bad length {:?}", f[3])))?;
        if t == 0 {
            return Err(err(
                line,
                "dialogue must contain at least one sentence".into(),
            ));
        }
        let mut features = Vec::with_capacity(t);
        for _ in 0..t {
            let (rline, row) = lines
                .next()
                .ok_or_else(|| err(line, format!("example {id} ends before its {t} rows")))?;
            let values = row
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(rline, format!("bad number: {e}")))?;
            if values.len() != dim {
                return Err(err(
                    rline,
                    format!("row has {} values, expected {dim}", values.len()),
                ));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(err(rline, "non-finite feature value".into()));
            }
            features.push(values);
        }
        examples.push(DialogueExample {
            id,
            features,
            label,
        });
    }
    Dataset::new(dim, num_classes, examples)
}
