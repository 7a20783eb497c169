//! Streaming parsers and validators that turn external files into a
//! validated [`Corpus`], with per-line diagnostics instead of silent
//! drops. Rejected rows never abort a run; ingestion is total and the
//! report accounts for every data row.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::model::{DocType, ModelError, PublicationRecord};

/// Supported input formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// Tab-separated export with a header row of field tags (UT, PY,
    /// DT, TC, WC, C1, ...). Unknown tags are preserved then ignored.
    WosTab,
    /// One JSON object per line with exactly the fields id, year,
    /// doctype, citations, categories, countries. Unknown keys are
    /// rejected.
    CanonicalLines,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wostab" => Ok(ExportFormat::WosTab),
            "canonical" => Ok(ExportFormat::CanonicalLines),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// Fatal ingestion failures. Row-level problems are diagnosed in the
/// [`IngestReport`] instead.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing header row")]
    MissingHeader,
    #[error("duplicate tag `{0}` in header")]
    DuplicateHeaderTag(String),
    #[error("duplicate record id `{0}`")]
    DuplicateRecordId(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reason codes for rejected rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReasonCode {
    DuplicateId,
    MissingRequiredField,
    MalformedNumber,
    MalformedRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowRejection {
    pub line: usize,
    pub code: ReasonCode,
    pub message: String,
}

/// Accounting for one ingestion run: accepted + rejected equals the
/// number of data rows, with one reason entry per rejected row.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: usize,
    pub reasons: Vec<RowRejection>,
}

/// A tokenized input row before validation.
#[derive(Debug, Clone)]
pub struct RawRow {
    pub source_line: usize,
    pub fields: Vec<(String, String)>,
}

impl RawRow {
    fn get(&self, tag: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, v)| v.as_str())
            .filter(|v| !v.trim().is_empty())
    }
}

/// An ordered, id-indexed collection of validated records. Iteration
/// order equals ingestion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    records: Vec<PublicationRecord>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new() -> Self {
        Corpus::default()
    }

    /// Builds a corpus from already-validated records, rejecting
    /// duplicate ids outright.
    pub fn from_records(records: Vec<PublicationRecord>) -> Result<Self, IngestError> {
        let mut corpus = Corpus::new();
        for rec in records {
            corpus
                .push(rec)
                .map_err(IngestError::DuplicateRecordId)?;
        }
        Ok(corpus)
    }

    /// Appends a record; fails with the offending id when it is
    /// already present.
    pub fn push(&mut self, rec: PublicationRecord) -> Result<(), String> {
        if self.by_id.contains_key(&rec.id) {
            return Err(rec.id);
        }
        self.by_id.insert(rec.id.clone(), self.records.len());
        self.records.push(rec);
        Ok(())
    }

    pub fn records(&self) -> &[PublicationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&PublicationRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &PublicationRecord> {
        self.records.iter()
    }

    /// All distinct country labels, sorted.
    pub fn all_countries(&self) -> Vec<String> {
        let mut set: Vec<String> = self
            .records
            .iter()
            .flat_map(|r| r.countries.iter().cloned())
            .collect();
        set.sort();
        set.dedup();
        set
    }
}

const CANONICAL_KEYS: [&str; 6] = ["id", "year", "doctype", "citations", "categories", "countries"];

/// Parses a stream into a corpus plus a per-row diagnostic report.
/// Single pass; memory grows only with retained records.
pub fn parse_export<R: BufRead>(
    reader: R,
    format: ExportFormat,
) -> Result<(Corpus, IngestReport), IngestError> {
    let mut corpus = Corpus::new();
    let mut report = IngestReport::default();
    let mut lines = reader.lines();
    let mut line_no = 0usize;

    let header: Option<Vec<String>> = match format {
        ExportFormat::WosTab => {
            let first = loop {
                match lines.next() {
                    None => return Err(IngestError::MissingHeader),
                    Some(line) => {
                        line_no += 1;
                        let line = line?;
                        let trimmed = line.trim_end_matches(['\r', '\n']);
                        if !trimmed.trim().is_empty() {
                            break trimmed.to_string();
                        }
                    }
                }
            };
            let tags: Vec<String> = first.split('\t').map(|t| t.trim().to_string()).collect();
            for (i, t) in tags.iter().enumerate() {
                if tags[..i].contains(t) {
                    return Err(IngestError::DuplicateHeaderTag(t.clone()));
                }
            }
            if !tags.contains(&"UT".to_string()) {
                return Err(IngestError::MissingHeader);
            }
            Some(tags)
        }
        ExportFormat::CanonicalLines => None,
    };

    for line in lines {
        line_no += 1;
        let line = line?;
        let content = line.trim_end_matches('\r');
        if content.trim().is_empty() {
            continue;
        }
        let outcome = match (&header, format) {
            (Some(tags), ExportFormat::WosTab) => {
                let raw = tokenize_wostab(line_no, content, tags);
                match raw {
                    Ok(raw) => validate(&raw, format),
                    Err(rej) => Err(rej),
                }
            }
            (_, ExportFormat::CanonicalLines) => {
                let raw = RawRow {
                    source_line: line_no,
                    fields: vec![("record".to_string(), content.to_string())],
                };
                validate(&raw, format)
            }
            _ => unreachable!(),
        };
        match outcome {
            Ok(rec) => match corpus.push(rec) {
                Ok(()) => report.accepted += 1,
                Err(id) => {
                    report.rejected += 1;
                    report.reasons.push(RowRejection {
                        line: line_no,
                        code: ReasonCode::DuplicateId,
                        message: format!("id `{id}` already seen; first occurrence kept"),
                    });
                }
            },
            Err(mut rej) => {
                rej.line = line_no;
                report.rejected += 1;
                report.reasons.push(rej);
            }
        }
    }
    Ok((corpus, report))
}

fn tokenize_wostab(line_no: usize, content: &str, tags: &[String]) -> Result<RawRow, RowRejection> {
    let values: Vec<&str> = content.split('\t').collect();
    if values.len() > tags.len() {
        return Err(RowRejection {
            line: line_no,
            code: ReasonCode::MalformedRow,
            message: format!("row has {} fields, header has {}", values.len(), tags.len()),
        });
    }
    let fields = tags
        .iter()
        .zip(values.iter().chain(std::iter::repeat(&"")))
        .map(|(t, v)| (t.clone(), v.to_string()))
        .collect();
    Ok(RawRow {
        source_line: line_no,
        fields,
    })
}

/// Validates one tokenized row into a record, or explains why not.
/// For `CanonicalLines` the row carries the raw line under the tag
/// `record`.
pub fn validate(raw: &RawRow, format: ExportFormat) -> Result<PublicationRecord, RowRejection> {
    match format {
        ExportFormat::WosTab => validate_wostab(raw),
        ExportFormat::CanonicalLines => {
            let line = raw
                .get("record")
                .ok_or_else(|| reject(raw.source_line, ReasonCode::MalformedRow, "empty row"))?;
            validate_canonical(raw.source_line, line)
        }
    }
}

fn reject(line: usize, code: ReasonCode, message: impl Into<String>) -> RowRejection {
    RowRejection {
        line,
        code,
        message: message.into(),
    }
}

fn validate_wostab(raw: &RawRow) -> Result<PublicationRecord, RowRejection> {
    let line = raw.source_line;
    let id = raw
        .get("UT")
        .ok_or_else(|| reject(line, ReasonCode::MissingRequiredField, "missing UT (id)"))?;
    let year: i32 = raw
        .get("PY")
        .ok_or_else(|| reject(line, ReasonCode::MissingRequiredField, "missing PY (year)"))?
        .trim()
        .parse::<u32>()
        .map_err(|_| reject(line, ReasonCode::MalformedNumber, "PY is not a non-negative integer"))?
        as i32;
    let citations: u64 = raw
        .get("TC")
        .ok_or_else(|| reject(line, ReasonCode::MissingRequiredField, "missing TC (citations)"))?
        .trim()
        .parse()
        .map_err(|_| reject(line, ReasonCode::MalformedNumber, "TC is not a non-negative integer"))?;
    let doctype = raw.get("DT").map(DocType::from_source).unwrap_or(DocType::Other);
    let categories = split_multi(
        raw.get("WC")
            .ok_or_else(|| reject(line, ReasonCode::MissingRequiredField, "missing WC (categories)"))?,
    );
    if categories.is_empty() {
        return Err(reject(line, ReasonCode::MissingRequiredField, "WC has no categories"));
    }
    let countries = raw.get("C1").map(extract_countries).unwrap_or_default();
    build_record(line, id, year, doctype, citations, categories, countries)
}

/// Splits a multi-valued WoS field on ";", trimming and de-duplicating
/// while preserving first occurrence.
fn split_multi(value: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for part in value.split(';') {
        let part = part.trim();
        if !part.is_empty() && !out.iter().any(|p| p == part) {
            out.push(part.to_string());
        }
    }
    out
}

/// Country extraction from a C1 address field: split on ";", take the
/// text after the last "," of each segment, trim and uppercase.
pub fn extract_countries(c1: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for segment in c1.split(';') {
        let tail = segment.rsplit(',').next().unwrap_or("").trim().to_uppercase();
        if !tail.is_empty() && !out.contains(&tail) {
            out.push(tail);
        }
    }
    out
}

fn validate_canonical(line: usize, content: &str) -> Result<PublicationRecord, RowRejection> {
    let value: serde_json::Value = serde_json::from_str(content)
        .map_err(|e| reject(line, ReasonCode::MalformedRow, format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| reject(line, ReasonCode::MalformedRow, "row is not an object"))?;
    for key in obj.keys() {
        if !CANONICAL_KEYS.contains(&key.as_str()) {
            return Err(reject(line, ReasonCode::MalformedRow, format!("unknown key `{key}`")));
        }
    }
    let field = |k: &str| {
        obj.get(k)
            .ok_or_else(|| reject(line, ReasonCode::MissingRequiredField, format!("missing `{k}`")))
    };
    let id = field("id")?
        .as_str()
        .ok_or_else(|| reject(line, ReasonCode::MalformedRow, "`id` must be a string"))?;
    let year = field("year")?
        .as_u64()
        .ok_or_else(|| reject(line, ReasonCode::MalformedNumber, "`year` is not a non-negative integer"))?
        as i32;
    let doctype = field("doctype")?
        .as_str()
        .map(DocType::from_source)
        .ok_or_else(|| reject(line, ReasonCode::MalformedRow, "`doctype` must be a string"))?;
    let citations = field("citations")?
        .as_u64()
        .ok_or_else(|| reject(line, ReasonCode::MalformedNumber, "`citations` is not a non-negative integer"))?;
    let categories = string_array(line, field("categories")?, "categories")?;
    if categories.is_empty() {
        return Err(reject(line, ReasonCode::MissingRequiredField, "`categories` is empty"));
    }
    let countries = string_array(line, field("countries")?, "countries")?;
    build_record(line, id, year, doctype, citations, categories, countries)
}

fn string_array(line: usize, v: &serde_json::Value, name: &str) -> Result<Vec<String>, RowRejection> {
    let arr = v
        .as_array()
        .ok_or_else(|| reject(line, ReasonCode::MalformedRow, format!("`{name}` must be an array")))?;
    let mut out = Vec::with_capacity(arr.len());
    for item in arr {
        let s = item
            .as_str()
            .ok_or_else(|| reject(line, ReasonCode::MalformedRow, format!("`{name}` items must be strings")))?;
        let s = s.trim().to_string();
        if !s.is_empty() && !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

fn build_record(
    line: usize,
    id: &str,
    year: i32,
    doctype: DocType,
    citations: u64,
    categories: Vec<String>,
    countries: Vec<String>,
) -> Result<PublicationRecord, RowRejection> {
    PublicationRecord::new(id, year, doctype, citations, categories, countries).map_err(|e| {
        let code = match e {
            ModelError::EmptyCategories => ReasonCode::MissingRequiredField,
            _ => ReasonCode::MalformedRow,
        };
        reject(line, code, e.to_string())
    })
}

#[derive(Serialize)]
struct CanonicalRecord<'a> {
    id: &'a str,
    year: i32,
    doctype: DocType,
    citations: u64,
    categories: &'a [String],
    countries: &'a [String],
}

/// Writes one canonical line per record, in corpus order. Re-parsing
/// the output reproduces the corpus exactly.
pub fn write_canonical<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<usize> {
    let mut written = 0usize;
    for rec in corpus.iter() {
        let line = serde_json::to_string(&CanonicalRecord {
            id: &rec.id,
            year: rec.year,
            doctype: rec.doctype,
            citations: rec.citations,
            categories: &rec.categories,
            countries: &rec.countries,
        })?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
        written += 1;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str, format: ExportFormat) -> (Corpus, IngestReport) {
        parse_export(Cursor::new(text), format).unwrap()
    }

    #[test]
    fn wostab_splits_categories_on_semicolon() {
        let text = "UT\tPY\tDT\tTC\tWC\tC1\n\
                    W1\t2012\tArticle\t5\tPlant Sciences; Ecology\t\n";
        let (corpus, report) = parse(text, ExportFormat::WosTab);
        assert_eq!(report.accepted, 1);
        assert_eq!(
            corpus.records()[0].categories,
            vec!["Plant Sciences", "Ecology"]
        );
    }

    #[test]
    fn wostab_extracts_countries_after_last_comma() {
        let text = "UT\tPY\tDT\tTC\tWC\tC1\n\
                    W1\t2012\tArticle\t5\tEcology\t[A] Univ X, Sao Paulo, Brazil; [B] Univ Y, Columbus, OH, USA\n";
        let (corpus, _) = parse(text, ExportFormat::WosTab);
        assert_eq!(corpus.records()[0].countries, vec!["BRAZIL", "USA"]);
    }

    #[test]
    fn negative_citations_rejected_as_malformed_number() {
        let text = "UT\tPY\tDT\tTC\tWC\n\
                    W1\t2012\tArticle\t-3\tEcology\n";
        let (corpus, report) = parse(text, ExportFormat::WosTab);
        assert_eq!(corpus.len(), 0);
        assert_eq!(report.accepted, 0);
        assert_eq!(report.rejected, 1);
        assert_eq!(report.reasons[0].code, ReasonCode::MalformedNumber);
    }

    #[test]
    fn doctype_mapped_case_insensitively() {
        let text = "UT\tPY\tDT\tTC\tWC\n\
                    W1\t2012\tARTICLE\t5\tEcology\n";
        let (corpus, _) = parse(text, ExportFormat::WosTab);
        assert_eq!(corpus.records()[0].doctype, DocType::Article);
    }

    #[test]
    fn duplicate_categories_deduplicated() {
        let text = "UT\tPY\tDT\tTC\tWC\n\
                    W1\t2012\tArticle\t5\tEcology; Ecology\n";
        let (corpus, report) = parse(text, ExportFormat::WosTab);
        assert_eq!(report.accepted, 1);
        assert_eq!(corpus.records()[0].categories, vec!["Ecology"]);
    }

    #[test]
    fn empty_categories_rejected() {
        let text = "UT\tPY\tDT\tTC\tWC\n\
                    W1\t2012\tArticle\t5\t\n";
        let (_, report) = parse(text, ExportFormat::WosTab);
        assert_eq!(report.rejected, 1);
        assert_eq!(report.reasons[0].code, ReasonCode::MissingRequiredField);
    }

    #[test]
    fn duplicate_id_keeps_first() {
        let text = "UT\tPY\tDT\tTC\tWC\n\
                    W1\t2012\tArticle\t5\tEcology\n\
                    W1\t2013\tReview\t9\tZoology\n";
        let (corpus, report) = parse(text, ExportFormat::WosTab);
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.records()[0].year, 2012);
        assert_eq!(report.reasons[0].code, ReasonCode::DuplicateId);
        assert_eq!(report.reasons[0].line, 3);
    }

    #[test]
    fn missing_header_is_fatal() {
        let err = parse_export(Cursor::new(""), ExportFormat::WosTab);
        assert!(matches!(err, Err(IngestError::MissingHeader)));
    }

    #[test]
    fn accounting_is_conserved() {
        let text = "UT\tPY\tDT\tTC\tWC\n\
                    W1\t2012\tArticle\t5\tEcology\n\
                    W2\tbad\tArticle\t5\tEcology\n\
                    \n\
                    W3\t2012\tArticle\tx\tEcology\n";
        let (_, report) = parse(text, ExportFormat::WosTab);
        assert_eq!(report.accepted + report.rejected, 3);
        assert_eq!(report.reasons.len(), report.rejected);
    }

    #[test]
    fn write_canonical_empty_corpus() {
        let mut buf = Vec::new();
        assert_eq!(write_canonical(&Corpus::new(), &mut buf).unwrap(), 0);
        assert!(buf.is_empty());
    }

    #[test]
    fn canonical_round_trip_single_record() {
        let rec = PublicationRecord::new(
            "W1",
            2012,
            DocType::Review,
            53,
            vec!["Plant Sciences".into(), "Ecology".into()],
            vec!["Brazil".into()],
        )
        .unwrap();
        let corpus = Corpus::from_records(vec![rec]).unwrap();
        let mut buf = Vec::new();
        assert_eq!(write_canonical(&corpus, &mut buf).unwrap(), 1);
        let (reparsed, report) = parse_export(Cursor::new(&buf), ExportFormat::CanonicalLines).unwrap();
        assert_eq!(report.rejected, 0);
        assert_eq!(reparsed, corpus);
    }

    #[test]
    fn canonical_rejects_unknown_keys() {
        let text = r#"{"id":"W1","year":2012,"doctype":"article","citations":5,"categories":["Ecology"],"countries":[],"extra":1}"#;
        let (_, report) = parse(text, ExportFormat::CanonicalLines);
        assert_eq!(report.rejected, 1);
        assert_eq!(report.reasons[0].code, ReasonCode::MalformedRow);
    }
}
