//! File formats: parameter JSON, 0/1 matrices (CSV and contiguous text),
//! label columns, and the experiment CSVs.
//!
//! All text is UTF-8 with `\n` line endings. Floating-point output uses
//! the shortest representation that round-trips.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{ReplicateRecord, SummaryRow};
use crate::model::{BinaryMatrix, LBMParameters, LabelAssignment};

/// Reads and validates an LBM parameter document (fields `g`, `m`, `pi`,
/// `rho`, `alpha` row-major).
pub fn read_params(path: &Path) -> Result<LBMParameters> {
    let text = std::fs::read_to_string(path)?;
    let params: LBMParameters = serde_json::from_str(&text)?;
    params.ensure_valid()?;
    Ok(params)
}

fn parse_matrix_lines<'a, I: Iterator<Item = &'a str>>(
    lines: I,
    csv: bool,
) -> Result<BinaryMatrix> {
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let mut row = Vec::new();
        if csv {
            for field in line.split(',') {
                match field {
                    "0" => row.push(0),
                    "1" => row.push(1),
                    other => {
                        return Err(Error::Parse(format!(
                            "line {}: invalid entry {other:?}",
                            lineno + 1
                        )))
                    }
                }
            }
        } else {
            for ch in line.chars() {
                match ch {
                    '0' => row.push(0),
                    '1' => row.push(1),
                    other => {
                        return Err(Error::Parse(format!(
                            "line {}: invalid character {other:?}",
                            lineno + 1
                        )))
                    }
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != d) {
        return Err(Error::Parse(format!(
            "line {}: expected {d} entries, got {}",
            bad + 1,
            rows[bad].len()
        )));
    }
    BinaryMatrix::new(rows.len(), d, rows.concat())
}

/// Parses a matrix from text, auto-detecting the format: a comma in the
/// first line means CSV, otherwise contiguous '0'/'1' characters.
pub fn parse_matrix(text: &str) -> Result<BinaryMatrix> {
    let mut lines = text.lines().peekable();
    let csv = lines
        .peek()
        .ok_or(Error::EmptyInput)?
        .contains(',');
    parse_matrix_lines(lines, csv)
}

pub fn read_matrix(path: &Path) -> Result<BinaryMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

/// CSV of integer 0/1 entries, one matrix row per line, no header.
pub fn matrix_to_csv(x: &BinaryMatrix) -> String {
    let mut out = String::with_capacity(x.n() * (2 * x.d() + 1));
    for i in 0..x.n() {
        for (j, &e) in x.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push(if e == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Compact format: contiguous '0'/'1' characters, one matrix row per line.
pub fn matrix_to_raw(x: &BinaryMatrix) -> String {
    let mut out = String::with_capacity(x.n() * (x.d() + 1));
    for i in 0..x.n() {
        for &e in x.row(i) {
            out.push(if e == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Single-column CSV of class indices, no header.
pub fn labels_to_csv(labels: &LabelAssignment) -> String {
    let mut out = String::new();
    for &l in &labels.labels {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn parse_labels(text: &str) -> Result<LabelAssignment> {
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let value: usize = line
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: invalid label {line:?}", lineno + 1)))?;
        labels.push(value);
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let class_count = labels.iter().max().unwrap() + 1;
    LabelAssignment::new(labels, class_count)
}

pub fn read_labels(path: &Path) -> Result<LabelAssignment> {
    parse_labels(&std::fs::read_to_string(path)?)
}

/// Header of the replicate records CSV. `fit_millis` is deliberately not a
/// column: wall time is not a function of the config and would break the
/// byte-identical reproducibility contract.
pub const RECORDS_HEADER: &str = "design,epsilon,n,d,strategy,replicate_index,seed,g_hat,m_hat,\
g_correct,m_correct,z_equivalent,w_equivalent,dinf,compound_failure";

pub fn records_to_csv(records: &[ReplicateRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.design,
            r.epsilon,
            r.n,
            r.d,
            r.strategy,
            r.replicate_index,
            r.seed,
            r.g_hat,
            r.m_hat,
            r.g_correct,
            r.m_correct,
            r.z_equivalent,
            r.w_equivalent,
            r.dinf,
            r.compound_failure
        );
    }
    out
}

/// Parses a records CSV back into replicate records. `fit_millis` is not
/// stored in the CSV and comes back as zero.
pub fn parse_records(text: &str) -> Result<Vec<ReplicateRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == RECORDS_HEADER => {}
        _ => return Err(Error::Parse("missing records header".to_string())),
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 15 {
            return Err(Error::Parse(format!(
                "record line {}: expected 15 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let field = |idx: usize, what: &str| -> Result<&str> {
            fields.get(idx).copied().ok_or_else(|| {
                Error::Parse(format!("record line {}: missing {what}", lineno + 2))
            })
        };
        fn parse<T: std::str::FromStr>(raw: &str, what: &str) -> Result<T> {
            raw.parse().map_err(|_| {
                Error::Parse(format!("cannot parse {what} from {raw:?}"))
            })
        }
        records.push(ReplicateRecord {
            design: parse(field(0, "design")?, "design")?,
            epsilon: parse(field(1, "epsilon")?, "epsilon")?,
            n: parse(field(2, "n")?, "n")?,
            d: parse(field(3, "d")?, "d")?,
            strategy: parse(field(4, "strategy")?, "strategy")?,
            replicate_index: parse(field(5, "replicate_index")?, "replicate_index")?,
            seed: parse(field(6, "seed")?, "seed")?,
            g_hat: parse(field(7, "g_hat")?, "g_hat")?,
            m_hat: parse(field(8, "m_hat")?, "m_hat")?,
            g_correct: parse(field(9, "g_correct")?, "g_correct")?,
            m_correct: parse(field(10, "m_correct")?, "m_correct")?,
            z_equivalent: parse(field(11, "z_equivalent")?, "z_equivalent")?,
            w_equivalent: parse(field(12, "w_equivalent")?, "w_equivalent")?,
            dinf: parse(field(13, "dinf")?, "dinf")?,
            compound_failure: parse(field(14, "compound_failure")?, "compound_failure")?,
            fit_millis: 0.0,
        });
    }
    Ok(records)
}

pub const SUMMARY_HEADER: &str = "design,epsilon,n,d,strategy,replicates,g_correct_rate,\
m_correct_rate,z_equivalent_rate,w_equivalent_rate,compound_success_rate,mean_dinf_success";

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.design,
            r.epsilon,
            r.n,
            r.d,
            r.strategy,
            r.replicates,
            r.g_correct_rate,
            r.m_correct_rate,
            r.z_equivalent_rate,
            r.w_equivalent_rate,
            r.compound_success_rate,
            r.mean_dinf_success
        );
    }
    out
}
