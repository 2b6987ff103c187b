//! Prediction log: one tab-separated record per line.
//!
//! Columns: `id method seed pi_0 … pi_{K−1} predicted confidence true`.
//! Extra trailing columns (such as `calibrated`) are preserved by writers
//! that add them and ignored by [`parse_log`].

use std::path::Path;

use super::record::PredictionRecord;
use crate::error::{Error, Result};
use crate::numeric::SimplexVector;
use crate::table::{fmt_f64, Table};

pub fn log_header(num_classes: usize) -> Vec<String> {
    let mut h = vec!["id".to_string(), "method".into(), "seed".into()];
    h.extend((0..num_classes).map(|k| format!("pi_{k}")));
    h.extend(["predicted".into(), "confidence".into(), "true".into()]);
    h
}

pub fn log_row(r: &PredictionRecord) -> Vec<String> {
    let mut row = vec![r.id.clone(), r.method.clone(), r.seed.to_string()];
    row.extend(r.pi_hat.as_slice().iter().map(|&p| fmt_f64(p)));
    row.extend([
        r.predicted_class.to_string(),
        fmt_f64(r.confidence),
        r.true_class.to_string(),
    ]);
    row
}

/// Builds the log table; every record must share one class count.
pub fn log_table(records: &[PredictionRecord], comments: &[String]) -> Result<Table> {
    let k = records.first().map_or(2, PredictionRecord::num_classes);
    let mut table = Table::new(log_header(k)).with_comments(comments);
    for r in records {
        if r.num_classes() != k {
            return Err(Error::contract("records disagree on class count"));
        }
        table.push(log_row(r));
    }
    Ok(table)
}

pub fn write_log(path: &Path, records: &[PredictionRecord], comments: &[String]) -> Result<()> {
    log_table(records, comments)?.write(path)
}

pub fn parse_log(text: &str, source: &str) -> Result<Vec<PredictionRecord>> {
    let table = Table::parse(text, source)?;
    records_from_table(&table, source)
}

pub fn read_log(path: &Path) -> Result<Vec<PredictionRecord>> {
    let table = Table::read(path)?;
    records_from_table(&table, &path.display().to_string())
}

fn records_from_table(table: &Table, source: &str) -> Result<Vec<PredictionRecord>> {
    let header_line = table.comments.len() + 1;
    let k = table.header.iter().filter(|h| h.starts_with("pi_")).count();
    let expected = log_header(k);
    if k < 2
        || table.header.len() < expected.len()
        || table.header[..expected.len()] != expected[..]
    {
        return Err(Error::parse(
            source,
            header_line,
            "unexpected prediction-log header",
        ));
    }
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = header_line + 1 + i;
            let bad = |m: String| Error::parse(source, line, m);
            let num = |j: usize| {
                row[j]
                    .parse::<f64>()
                    .map_err(|e| bad(format!("column {}: {e}", expected[j])))
            };
            let int = |j: usize| {
                row[j]
                    .parse::<u64>()
                    .map_err(|e| bad(format!("column {}: {e}", expected[j])))
            };
            let pi = (0..k).map(|c| num(3 + c)).collect::<Result<Vec<_>>>()?;
            let pi_hat = SimplexVector::new(pi).map_err(|e| bad(e.to_string()))?;
            let record = PredictionRecord::new(
                row[0].clone(),
                row[1].clone(),
                int(2)?,
                pi_hat,
                int(5 + k)? as usize,
            );
            if record.predicted_class != int(3 + k)? as usize
                || record.confidence.to_bits() != num(4 + k)?.to_bits()
            {
                return Err(bad("predicted class or confidence disagrees with pi".into()));
            }
            if record.true_class >= k {
                return Err(bad(format!(
                    "true class {} outside {k} classes",
                    record.true_class
                )));
            }
            Ok(record)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let pi = SimplexVector::new(vec![0.1, 0.7, 0.2]).unwrap();
        let recs = vec![
            PredictionRecord::new("a", "l2", 3, pi.clone(), 1),
            PredictionRecord::new("b", "l2", 3, pi, 0),
        ];
        let text = log_table(&recs, &["config-hash: 0".into()])
            .unwrap()
            .render();
        assert_eq!(parse_log(&text, "mem").unwrap(), recs);
    }

    #[test]
    fn inconsistent_confidence_rejected() {
        let text = "id\tmethod\tseed\tpi_0\tpi_1\tpredicted\tconfidence\ttrue\na\tl2\t1\t0.25\t0.75\t1\t0.7\t1\n";
        assert!(matches!(
            parse_log(text, "f"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
