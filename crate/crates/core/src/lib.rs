//! Field-, year-, and document-type-normalized top-k% citation
//! indicators over bibliographic corpora, under integer and fractional
//! counting, with independent brute-force oracles for every result.
//!
//! - [`model`]: records, strata, threshold specs, schemes, indicators
//! - [`ingest`]: streaming parsers (WoS tab exports, canonical lines)
//! - [`engine`]: stratification, per-cell thresholds, marking,
//!   group aggregation
//! - [`synth`]: seeded corpus generation and brute-force oracles
//! - [`render`]: CSV / markdown / JSON-lines report serialization

pub mod engine;
pub mod ingest;
pub mod model;
pub mod render;
pub mod synth;

pub use engine::{
    aggregate_report, cell_threshold, compute_thresholds, group_indicator, mark_top, stratify,
    EngineError, MarkSet, StratifiedView, ThresholdStats, ThresholdTable, WORLD_LABEL,
};
pub use ingest::{
    parse_export, validate, write_canonical, Corpus, ExportFormat, IngestError, IngestReport,
    RawRow, ReasonCode,
};
pub use model::{
    compare_strata, CellThreshold, CountingScheme, DocType, GroupIndicator, ModelError,
    PublicationRecord, StratumKey, ThresholdSpec, TiePolicy,
};
pub use render::OutputFormat;
pub use synth::{
    gen_corpus, gen_paper_fixture, oracle_group_share, oracle_threshold, GenParams,
    OracleThreshold, SynthError,
};
