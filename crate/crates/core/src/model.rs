//! Core domain vocabulary shared by every other module: publication
//! records, normalization strata, threshold specifications, counting
//! schemes, and indicator results.
//!
//! All types are immutable values after construction and safe to share
//! across threads.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("categories must be non-empty")]
    EmptyCategories,
    #[error("duplicate category `{0}`")]
    DuplicateCategory(String),
    #[error("duplicate country `{0}`")]
    DuplicateCountry(String),
    #[error("k must lie in (0, 1), got {0}")]
    InvalidK(f64),
}

/// Document type of a record. Unknown source strings map to `Other`
/// rather than being rejected; the article/review/letter filter is
/// applied downstream.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Letter,
    Other,
}

impl DocType {
    /// Case-insensitive mapping from a source string; anything outside
    /// {article, review, letter} becomes `Other`.
    pub fn from_source(s: &str) -> Self {
        match s.trim().to_ascii_lowercase().as_str() {
            "article" => DocType::Article,
            "review" => DocType::Review,
            "letter" => DocType::Letter,
            _ => DocType::Other,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Letter => "letter",
            DocType::Other => "other",
        }
    }

    pub const ALL: [DocType; 4] = [
        DocType::Article,
        DocType::Review,
        DocType::Letter,
        DocType::Other,
    ];
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "article" => Ok(DocType::Article),
            "review" => Ok(DocType::Review),
            "letter" => Ok(DocType::Letter),
            "other" => Ok(DocType::Other),
            other => Err(format!("unknown doctype `{other}`")),
        }
    }
}

/// One bibliographic item. Country labels are normalized to trimmed,
/// uppercased strings at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub id: String,
    pub year: i32,
    pub doctype: DocType,
    pub citations: u64,
    pub categories: Vec<String>,
    pub countries: Vec<String>,
}

impl PublicationRecord {
    /// Validates the record invariants: categories non-empty and
    /// duplicate-free, countries duplicate-free after normalization.
    pub fn new(
        id: impl Into<String>,
        year: i32,
        doctype: DocType,
        citations: u64,
        categories: Vec<String>,
        countries: Vec<String>,
    ) -> Result<Self, ModelError> {
        if categories.is_empty() {
            return Err(ModelError::EmptyCategories);
        }
        for (i, c) in categories.iter().enumerate() {
            if categories[..i].contains(c) {
                return Err(ModelError::DuplicateCategory(c.clone()));
            }
        }
        let countries: Vec<String> = countries
            .into_iter()
            .map(|c| c.trim().to_uppercase())
            .collect();
        for (i, c) in countries.iter().enumerate() {
            if countries[..i].contains(c) {
                return Err(ModelError::DuplicateCountry(c.clone()));
            }
        }
        Ok(PublicationRecord {
            id: id.into(),
            year,
            doctype,
            citations,
            categories,
            countries,
        })
    }

    /// Uniform fractional weights over the record's categories: each of
    /// the m categories receives 1/m. The support equals the category
    /// set exactly and the weights sum to 1 within 1e-12.
    pub fn fractional_weights(&self) -> BTreeMap<String, f64> {
        let w = 1.0 / self.categories.len() as f64;
        self.categories.iter().map(|c| (c.clone(), w)).collect()
    }

    pub fn has_country(&self, label: &str) -> bool {
        self.countries.iter().any(|c| c == label)
    }
}

/// A normalization cell: (publication year, document type, subject
/// category). Ordered lexicographically for deterministic iteration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StratumKey {
    pub year: i32,
    pub doctype: DocType,
    pub category: String,
}

impl StratumKey {
    pub fn new(year: i32, doctype: DocType, category: impl Into<String>) -> Self {
        StratumKey {
            year,
            doctype,
            category: category.into(),
        }
    }
}

impl fmt::Display for StratumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.year, self.doctype, self.category)
    }
}

/// Lexicographic comparison over (year, doctype, category).
pub fn compare_strata(a: &StratumKey, b: &StratumKey) -> Ordering {
    a.cmp(b)
}

/// Rule for records whose citation count equals the cell threshold
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TiePolicy {
    /// Every record at or above the threshold is highly cited
    /// ("cited t or more times").
    IncludeTies,
    /// Exactly the nearest-rank quota, ties at the threshold broken by
    /// ascending record id.
    StrictRank,
    /// Records tied at the threshold are excluded when a genuine tie
    /// exists there.
    ExcludeTies,
}

impl FromStr for TiePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "include" => Ok(TiePolicy::IncludeTies),
            "strict" => Ok(TiePolicy::StrictRank),
            "exclude" => Ok(TiePolicy::ExcludeTies),
            other => Err(format!("unknown tie policy `{other}`")),
        }
    }
}

/// Target top fraction plus tie policy. k defaults to 0.01 (top 1%).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub k: f64,
    pub tie_policy: TiePolicy,
}

impl ThresholdSpec {
    pub fn new(k: f64, tie_policy: TiePolicy) -> Result<Self, ModelError> {
        if !(k > 0.0 && k < 1.0) {
            return Err(ModelError::InvalidK(k));
        }
        Ok(ThresholdSpec { k, tie_policy })
    }
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec {
            k: 0.01,
            tie_policy: TiePolicy::IncludeTies,
        }
    }
}

/// Per-cell top-k% threshold: the citation value at nearest rank
/// r = ceil(k * n_cell), plus the size of the highly-cited set under
/// the active tie policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellThreshold {
    pub key: StratumKey,
    pub n_cell: usize,
    pub rank: usize,
    pub threshold: u64,
    pub n_top: usize,
}

/// Attribution weights for (record, category) incidences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountingScheme {
    /// Weight 1 per incidence; inflates aggregates for multi-category
    /// records.
    IntegerCount,
    /// Weight 1/m per incidence with m = |categories|, so each record
    /// contributes total weight 1.
    FractionalWC,
}

impl FromStr for CountingScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "integer" => Ok(CountingScheme::IntegerCount),
            "fractional" => Ok(CountingScheme::FractionalWC),
            other => Err(format!("unknown counting scheme `{other}`")),
        }
    }
}

/// A group's activity and excellence metrics against the world
/// reference set. `pp_top` and `world_share` are absent (not zero)
/// when their denominators are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupIndicator {
    pub group: String,
    pub group_total: f64,
    pub world_total: f64,
    pub group_top: f64,
    pub world_top: f64,
    pub activity: f64,
    pub pp_top: Option<f64>,
    pub world_share: Option<f64>,
    pub expected_top: f64,
}
