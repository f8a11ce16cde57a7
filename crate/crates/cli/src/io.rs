//! CSV ingestion and emission.
//!
//! Data files are plain numeric CSV, observations in rows and features in
//! columns. A single header row is auto-detected: the first row is a header
//! exactly when it contains a token that does not parse as a number. Truth
//! labels live in a separate single-column file of 1s and 2s, with the same
//! header rule.

use anyhow::{bail, Context, Result};
use knnclust::{DataMatrix, LabelVector};
use std::fmt::Write as _;
use std::path::Path;

pub fn read_data_csv(path: &Path) -> Result<DataMatrix> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_data_csv(&text).with_context(|| format!("malformed CSV in {}", path.display()))
}

pub fn parse_data_csv(text: &str) -> Result<DataMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            tokens.iter().map(|t| t.parse::<f64>()).collect();
        match parsed {
            Err(_) if rows.is_empty() && width.is_none() => {
                // header row
                width = Some(tokens.len());
                continue;
            }
            Err(_) => {
                let bad = tokens.iter().find(|t| t.parse::<f64>().is_err()).unwrap();
                bail!("line {}: token `{bad}` is not a number", lineno + 1);
            }
            Ok(values) => {
                if let Some(w) = width {
                    if values.len() != w {
                        bail!("line {}: {} columns, expected {w}", lineno + 1, values.len());
                    }
                } else {
                    width = Some(values.len());
                }
                rows.push(values);
            }
        }
    }
    if rows.is_empty() {
        bail!("no data rows");
    }
    DataMatrix::from_rows(rows).map_err(Into::into)
}

pub fn read_labels(path: &Path) -> Result<LabelVector> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_labels(&text).with_context(|| format!("malformed labels in {}", path.display()))
}

pub fn parse_labels(text: &str) -> Result<LabelVector> {
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let token = line.trim().trim_end_matches(',');
        if token.is_empty() {
            continue;
        }
        match token.parse::<u8>() {
            Err(_) if labels.is_empty() && lineno == 0 => continue, // header
            Err(_) => bail!("line {}: token `{token}` is not a label", lineno + 1),
            Ok(v) => labels.push(v),
        }
    }
    if labels.is_empty() {
        bail!("no labels");
    }
    LabelVector::new(labels).map_err(Into::into)
}

pub fn data_to_csv(data: &DataMatrix) -> String {
    let mut out = String::new();
    for i in 0..data.n_obs() {
        let mut first = true;
        for v in data.row(i) {
            if !first {
                out.push(',');
            }
            write!(out, "{v}").expect("string write");
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn labels_to_lines(labels: &LabelVector) -> String {
    let mut out = String::new();
    for &l in labels.labels() {
        writeln!(out, "{l}").expect("string write");
    }
    out
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_auto_detected() {
        let with = parse_data_csv("f0,f1\n1.5,2\n3,4\n").unwrap();
        let without = parse_data_csv("1.5,2\n3,4\n").unwrap();
        assert_eq!(with.values(), without.values());
        assert_eq!(with.n_obs(), 2);
    }

    #[test]
    fn ragged_and_bad_tokens_are_rejected_with_line_numbers() {
        let e = parse_data_csv("1,2\n3\n").unwrap_err();
        assert!(e.to_string().contains("line 2"));
        let e = parse_data_csv("1,2\n3,x\n").unwrap_err();
        assert!(e.to_string().contains("`x`"));
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let e = parse_data_csv("1,2\n3,nan\n").unwrap_err();
        assert!(e.to_string().contains("row 1"), "{e}");
    }

    #[test]
    fn labels_parse_and_validate() {
        let l = parse_labels("label\n1\n2\n1\n").unwrap();
        assert_eq!(l.labels(), &[1, 2, 1]);
        assert!(parse_labels("1\n3\n").is_err());
    }

    #[test]
    fn csv_round_trips_exactly() {
        // shortest round-trip formatting: parsing what we wrote restores the
        // exact bits
        let values = [0.1, -3.25, 1e-17, 12345.678901234567, 2.0 / 3.0, -0.0];
        let data = DataMatrix::new(values.to_vec(), 3, 2).unwrap();
        let text = data_to_csv(&data);
        let back = parse_data_csv(&text).unwrap();
        assert_eq!(back.values(), data.values());
        assert_eq!(data_to_csv(&back), text);
    }
}
