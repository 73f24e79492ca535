//! Labelled collections of partial rankings and their text formats.
//!
//! `rankings-text`:
//!
//! ```text
//! n=4
//! 3>1,2>4
//! 2>4|rest,WestJapan
//! ```
//!
//! One ranking per line after an `n=<degree>` header; items within a block
//! are comma separated, blocks are separated by `>`, and `|rest` appends
//! the unmentioned items as a final block. An optional label follows the
//! last comma when that token is not an item number. Blank lines and lines
//! starting with `#` are ignored.
//!
//! `csv-permutations`: each row is a full ranking `σ(1),…,σ(n)` with an
//! optional trailing label; no header.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::partial::PartialRanking;
use crate::perm::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    RankingsText,
    CsvPermutations,
}

impl FromStr for DatasetFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rankings-text" => Ok(Self::RankingsText),
            "csv-permutations" => Ok(Self::CsvPermutations),
            _ => invalid(format!(
                "unknown dataset format `{s}` (expected rankings-text or csv-permutations)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub ranking: PartialRanking,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingDataset {
    pub degree: usize,
    pub records: Vec<Record>,
}

impl RankingDataset {
    pub fn new(degree: usize, records: Vec<Record>) -> Result<Self> {
        if degree == 0 {
            return invalid("dataset degree must be >= 1");
        }
        for (i, r) in records.iter().enumerate() {
            if r.ranking.degree() != degree {
                return invalid(format!(
                    "record {} has degree {}, dataset has {degree}",
                    i + 1,
                    r.ranking.degree()
                ));
            }
        }
        Ok(Self { degree, records })
    }

    pub fn from_rankings(degree: usize, rankings: Vec<PartialRanking>) -> Result<Self> {
        Self::new(
            degree,
            rankings
                .into_iter()
                .map(|ranking| Record { ranking, label: None })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn rankings(&self) -> Vec<PartialRanking> {
        self.records.iter().map(|r| r.ranking.clone()).collect()
    }

    /// Labels of all records, or `None` if any record is unlabelled.
    pub fn labels(&self) -> Option<Vec<String>> {
        self.records.iter().map(|r| r.label.clone()).collect()
    }

    pub fn parse(text: &str, format: DatasetFormat) -> Result<Self> {
        match format {
            DatasetFormat::RankingsText => parse_rankings_text(text),
            DatasetFormat::CsvPermutations => parse_csv_permutations(text),
        }
    }

    pub fn read(path: &Path, format: DatasetFormat) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, format)
    }

    pub fn serialize(&self, format: DatasetFormat) -> Result<String> {
        for r in &self.records {
            if let Some(l) = &r.label {
                check_label(l, format)?;
            }
        }
        match format {
            DatasetFormat::RankingsText => {
                let mut out = format!("n={}\n", self.degree);
                for r in &self.records {
                    write!(out, "{}", r.ranking).unwrap();
                    if let Some(l) = &r.label {
                        write!(out, ",{l}").unwrap();
                    }
                    out.push('\n');
                }
                Ok(out)
            }
            DatasetFormat::CsvPermutations => {
                let mut w = csv::WriterBuilder::new()
                    .flexible(true)
                    .has_headers(false)
                    .from_writer(Vec::new());
                for (i, r) in self.records.iter().enumerate() {
                    if r.ranking.cardinality_big() != 1u32.into() {
                        return invalid(format!(
                            "record {} (`{}`) is not a full ranking",
                            i + 1,
                            r.ranking
                        ));
                    }
                    let mut row: Vec<String> =
                        r.ranking.blocks().iter().map(|b| b[0].to_string()).collect();
                    if row.len() < self.degree {
                        // a single trailing free item
                        row.extend(r.ranking.unranked_items().iter().map(ToString::to_string));
                    }
                    row.extend(r.label.clone());
                    w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
        }
    }

    pub fn write(&self, path: &Path, format: DatasetFormat) -> Result<()> {
        std::fs::write(path, self.serialize(format)?)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn check_label(label: &str, format: DatasetFormat) -> Result<()> {
    let bad = label.trim() != label
        || label.is_empty()
        || label.parse::<usize>().is_ok()
        || label.contains('\n')
        || label.contains('\r')
        || (format == DatasetFormat::RankingsText
            && (label.contains(',') || label.contains('>') || label.contains('|') || label.starts_with('#')));
    if bad {
        return invalid(format!("label `{label}` cannot be written unambiguously"));
    }
    Ok(())
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_rankings_text(text: &str) -> Result<RankingDataset> {
    let mut degree = None;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(n) = degree else {
            let value = line
                .strip_prefix("n=")
                .ok_or_else(|| parse_error(line_no, "expected header `n=<degree>`"))?;
            let n: usize = value
                .trim()
                .parse()
                .map_err(|_| parse_error(line_no, format!("bad degree `{}`", value.trim())))?;
            if n == 0 {
                return Err(parse_error(line_no, "degree must be >= 1"));
            }
            degree = Some(n);
            continue;
        };
        let (body, label) = split_label(line);
        let ranking = PartialRanking::parse(body, n).map_err(|e| parse_error(line_no, strip_kind(e)))?;
        records.push(Record {
            ranking,
            label: label.map(str::to_owned),
        });
    }
    let degree = degree.ok_or_else(|| parse_error(1, "missing header `n=<degree>`"))?;
    RankingDataset::new(degree, records)
}

/// Splits off a trailing `,label` when the last token is not an item.
fn split_label(line: &str) -> (&str, Option<&str>) {
    if let Some((body, last)) = line.rsplit_once(',') {
        let last = last.trim();
        let is_item = last.parse::<usize>().is_ok();
        if !is_item && !last.contains('>') && !last.contains('|') && !last.is_empty() {
            return (body, Some(last));
        }
    }
    (line, None)
}

fn strip_kind(e: Error) -> String {
    match e {
        Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}

fn parse_csv_permutations(text: &str) -> Result<RankingDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut degree = None;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, e.to_string())
        })?;
        let line_no = row.position().map_or(0, |p| p.line() as usize);
        if row.iter().all(str::is_empty) {
            continue;
        }
        let fields: Vec<&str> = row.iter().collect();
        let numeric = fields.iter().take_while(|f| f.parse::<usize>().is_ok()).count();
        let (items, label) = match fields.len() - numeric {
            0 => (&fields[..], None),
            1 => (&fields[..numeric], Some(fields[numeric].to_owned())),
            _ => {
                return Err(parse_error(
                    line_no,
                    format!("field {} (`{}`) is not an item number", numeric + 1, fields[numeric]),
                ))
            }
        };
        let n = *degree.get_or_insert(items.len());
        if items.len() != n {
            return Err(parse_error(
                line_no,
                format!("row has {} items, expected {n}", items.len()),
            ));
        }
        let mapping: Vec<usize> = items.iter().map(|f| f.parse().unwrap()).collect();
        let sigma = Permutation::new(mapping).map_err(|e| parse_error(line_no, strip_kind(e)))?;
        records.push(Record {
            ranking: PartialRanking::from_permutation(&sigma),
            label,
        });
    }
    let degree = degree.ok_or_else(|| parse_error(1, "no rows"))?;
    RankingDataset::new(degree, records)
}
