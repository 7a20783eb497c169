//! The method core: stratify a corpus into (year, doctype, category)
//! normalization cells, compute per-cell top-k% thresholds with
//! explicit tie policies, mark highly cited records, and aggregate
//! group indicators under integer or fractional counting.
//!
//! Thresholds are computed on unweighted cell membership; fractional
//! weights apply only to aggregation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::ingest::Corpus;
use crate::model::{
    CellThreshold, CountingScheme, DocType, GroupIndicator, StratumKey, ThresholdSpec, TiePolicy,
};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("doctype filter must be non-empty")]
    EmptyFilter,
    #[error("year range must be non-empty")]
    EmptyYearRange,
    #[error("cell has no members")]
    EmptyCell,
    #[error("threshold table cell {0} absent from view")]
    InconsistentTable(StratumKey),
}

/// One (record, weight) incidence inside a cell. Records are addressed
/// by corpus position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub record: usize,
    pub weight: f64,
}

/// The corpus partitioned into normalization cells. Each admitted
/// record appears in exactly one cell per category. Cell membership is
/// ordered by ascending record id, so aggregation is independent of
/// input order.
#[derive(Debug, Clone)]
pub struct StratifiedView {
    cells: BTreeMap<StratumKey, Vec<Incidence>>,
    scheme: CountingScheme,
    doctype_filter: BTreeSet<DocType>,
    years: RangeInclusive<i32>,
}

impl StratifiedView {
    pub fn cells(&self) -> &BTreeMap<StratumKey, Vec<Incidence>> {
        &self.cells
    }

    pub fn scheme(&self) -> CountingScheme {
        self.scheme
    }

    pub fn doctype_filter(&self) -> &BTreeSet<DocType> {
        &self.doctype_filter
    }

    pub fn years(&self) -> &RangeInclusive<i32> {
        &self.years
    }
}

/// Partitions admitted records into cells. Records outside the doctype
/// filter or year range are excluded entirely; empty cells are absent.
pub fn stratify(
    corpus: &Corpus,
    scheme: CountingScheme,
    filter: &BTreeSet<DocType>,
    years: RangeInclusive<i32>,
) -> Result<StratifiedView, EngineError> {
    if filter.is_empty() {
        return Err(EngineError::EmptyFilter);
    }
    if years.is_empty() {
        return Err(EngineError::EmptyYearRange);
    }
    let mut cells: BTreeMap<StratumKey, Vec<Incidence>> = BTreeMap::new();
    for (idx, rec) in corpus.iter().enumerate() {
        if !filter.contains(&rec.doctype) || !years.contains(&rec.year) {
            continue;
        }
        let weight = match scheme {
            CountingScheme::IntegerCount => 1.0,
            CountingScheme::FractionalWC => 1.0 / rec.categories.len() as f64,
        };
        for cat in &rec.categories {
            cells
                .entry(StratumKey::new(rec.year, rec.doctype, cat.clone()))
                .or_default()
                .push(Incidence { record: idx, weight });
        }
    }
    let records = corpus.records();
    for members in cells.values_mut() {
        members.sort_by(|a, b| records[a.record].id.cmp(&records[b.record].id));
    }
    Ok(StratifiedView {
        cells,
        scheme,
        doctype_filter: filter.clone(),
        years,
    })
}

/// Nearest rank r = ceil(k * n), clamped to [1, n].
pub fn nearest_rank(k: f64, n: usize) -> usize {
    ((k * n as f64).ceil() as usize).clamp(1, n)
}

/// Threshold statistics for one cell under every tie policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdStats {
    pub n_cell: usize,
    pub rank: usize,
    pub threshold: u64,
    pub n_top_include: usize,
    pub n_top_strict: usize,
    pub n_top_exclude: usize,
}

impl ThresholdStats {
    pub fn n_top(&self, policy: TiePolicy) -> usize {
        match policy {
            TiePolicy::IncludeTies => self.n_top_include,
            TiePolicy::StrictRank => self.n_top_strict,
            TiePolicy::ExcludeTies => self.n_top_exclude,
        }
    }
}

/// Sorts the multiset from most to least cited and reads the citation
/// value at the nearest rank. Equivalent closed form:
/// t = max{v : |{c >= v}| >= r}.
pub fn cell_threshold(citations: &[u64], spec: &ThresholdSpec) -> Result<ThresholdStats, EngineError> {
    if citations.is_empty() {
        return Err(EngineError::EmptyCell);
    }
    let n = citations.len();
    let rank = nearest_rank(spec.k, n);
    let mut sorted = citations.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let threshold = sorted[rank - 1];
    let n_at = sorted.iter().filter(|&&c| c == threshold).count();
    let n_above = sorted.iter().filter(|&&c| c > threshold).count();
    Ok(ThresholdStats {
        n_cell: n,
        rank,
        threshold,
        n_top_include: n_above + n_at,
        n_top_strict: rank,
        // A unique value at the threshold is not a tie; nothing is
        // excluded then and the top set is exactly the rank prefix.
        n_top_exclude: if n_at >= 2 { n_above } else { rank },
    })
}

/// Per-cell thresholds for a whole view, iterated in stratum order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    cells: BTreeMap<StratumKey, CellThreshold>,
    spec: ThresholdSpec,
}

impl ThresholdTable {
    pub fn cells(&self) -> &BTreeMap<StratumKey, CellThreshold> {
        &self.cells
    }

    pub fn spec(&self) -> &ThresholdSpec {
        &self.spec
    }

    pub fn get(&self, key: &StratumKey) -> Option<&CellThreshold> {
        self.cells.get(key)
    }
}

/// Computes one [`CellThreshold`] per non-empty cell. Thresholds use
/// unweighted membership regardless of the view's counting scheme.
pub fn compute_thresholds(corpus: &Corpus, view: &StratifiedView, spec: &ThresholdSpec) -> ThresholdTable {
    let records = corpus.records();
    let mut cells = BTreeMap::new();
    for (key, members) in view.cells() {
        let citations: Vec<u64> = members.iter().map(|m| records[m.record].citations).collect();
        // cells in a view are non-empty by construction
        let stats = cell_threshold(&citations, spec).expect("non-empty cell");
        cells.insert(
            key.clone(),
            CellThreshold {
                key: key.clone(),
                n_cell: stats.n_cell,
                rank: stats.rank,
                threshold: stats.threshold,
                n_top: stats.n_top(spec.tie_policy),
            },
        );
    }
    ThresholdTable {
        cells,
        spec: *spec,
    }
}

/// Which records are highly cited, and in which cells.
#[derive(Debug, Clone)]
pub struct MarkSet {
    marks: HashMap<usize, BTreeSet<StratumKey>>,
    spec: ThresholdSpec,
}

impl MarkSet {
    pub fn is_marked(&self, record: usize, key: &StratumKey) -> bool {
        self.marks.get(&record).is_some_and(|s| s.contains(key))
    }

    pub fn cells_for(&self, record: usize) -> Option<&BTreeSet<StratumKey>> {
        self.marks.get(&record)
    }

    pub fn marked_records(&self) -> impl Iterator<Item = usize> + '_ {
        self.marks.keys().copied()
    }

    pub fn spec(&self) -> &ThresholdSpec {
        &self.spec
    }
}

/// Marks each record in every cell where its citations satisfy the tie
/// policy relative to that cell's threshold.
pub fn mark_top(
    corpus: &Corpus,
    view: &StratifiedView,
    table: &ThresholdTable,
    spec: &ThresholdSpec,
) -> Result<MarkSet, EngineError> {
    let records = corpus.records();
    let mut marks: HashMap<usize, BTreeSet<StratumKey>> = HashMap::new();
    for (key, cell) in table.cells() {
        let members = view
            .cells()
            .get(key)
            .ok_or_else(|| EngineError::InconsistentTable(key.clone()))?;
        let t = cell.threshold;
        let n_at = members
            .iter()
            .filter(|m| records[m.record].citations == t)
            .count();
        let mut mark = |idx: usize| {
            marks.entry(idx).or_default().insert(key.clone());
        };
        match spec.tie_policy {
            TiePolicy::IncludeTies => {
                for m in members {
                    if records[m.record].citations >= t {
                        mark(m.record);
                    }
                }
            }
            TiePolicy::ExcludeTies => {
                // a unique value at t is not a tie; it stays included
                for m in members {
                    let c = records[m.record].citations;
                    if c > t || (c == t && n_at < 2) {
                        mark(m.record);
                    }
                }
            }
            TiePolicy::StrictRank => {
                let mut tied: Vec<usize> = Vec::new();
                let mut above = 0usize;
                for m in members {
                    let c = records[m.record].citations;
                    if c > t {
                        above += 1;
                        mark(m.record);
                    } else if c == t {
                        tied.push(m.record);
                    }
                }
                // fill the quota from ties in ascending id order
                tied.sort_by(|&a, &b| records[a].id.cmp(&records[b].id));
                for &idx in tied.iter().take(cell.rank.saturating_sub(above)) {
                    mark(idx);
                }
            }
        }
    }
    Ok(MarkSet { marks, spec: *spec })
}

fn weighted_sums(
    corpus: &Corpus,
    view: &StratifiedView,
    marks: &MarkSet,
    group: Option<&str>,
) -> (f64, f64) {
    let records = corpus.records();
    let mut total = 0.0;
    let mut top = 0.0;
    for (key, members) in view.cells() {
        for m in members {
            if let Some(label) = group {
                if !records[m.record].has_country(label) {
                    continue;
                }
            }
            total += m.weight;
            if marks.is_marked(m.record, key) {
                top += m.weight;
            }
        }
    }
    (total, top)
}

/// Computes a group's activity and excellence metrics against the world
/// reference set. An unknown group is not an error: it yields
/// `group_total = 0` with absent ratios.
pub fn group_indicator(
    corpus: &Corpus,
    view: &StratifiedView,
    marks: &MarkSet,
    group: &str,
    spec: &ThresholdSpec,
) -> GroupIndicator {
    let label = group.trim().to_uppercase();
    let (world_total, world_top) = weighted_sums(corpus, view, marks, None);
    let (group_total, group_top) = weighted_sums(corpus, view, marks, Some(&label));
    build_indicator(label, group_total, world_total, group_top, world_top, spec)
}

pub(crate) fn build_indicator(
    group: String,
    group_total: f64,
    world_total: f64,
    group_top: f64,
    world_top: f64,
    spec: &ThresholdSpec,
) -> GroupIndicator {
    GroupIndicator {
        group,
        group_total,
        world_total,
        group_top,
        world_top,
        activity: if world_total > 0.0 { group_total / world_total } else { 0.0 },
        pp_top: (group_total > 0.0).then(|| group_top / group_total),
        world_share: (world_top > 0.0).then(|| group_top / world_top),
        expected_top: spec.k * group_total,
    }
}

/// Label used for the reference-set row in reports.
pub const WORLD_LABEL: &str = "WORLD";

/// One indicator row per requested group, plus a world row (the whole
/// reference set, activity = 1) appended last.
pub fn aggregate_report(
    corpus: &Corpus,
    view: &StratifiedView,
    marks: &MarkSet,
    groups: &[String],
    spec: &ThresholdSpec,
) -> Vec<GroupIndicator> {
    let mut rows: Vec<GroupIndicator> = groups
        .iter()
        .map(|g| group_indicator(corpus, view, marks, g, spec))
        .collect();
    let (world_total, world_top) = weighted_sums(corpus, view, marks, None);
    rows.push(build_indicator(
        WORLD_LABEL.to_string(),
        world_total,
        world_total,
        world_top,
        world_top,
        spec,
    ));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DocType, PublicationRecord};

    fn rec(id: &str, year: i32, dt: DocType, tc: u64, cats: &[&str], ctys: &[&str]) -> PublicationRecord {
        PublicationRecord::new(
            id,
            year,
            dt,
            tc,
            cats.iter().map(|s| s.to_string()).collect(),
            ctys.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    fn arl() -> BTreeSet<DocType> {
        [DocType::Article, DocType::Review, DocType::Letter].into()
    }

    #[test]
    fn stratify_one_record_two_cells_integer() {
        let corpus = Corpus::from_records(vec![rec("a", 2012, DocType::Article, 3, &["A", "B"], &[])]).unwrap();
        let view = stratify(&corpus, CountingScheme::IntegerCount, &arl(), 2012..=2012).unwrap();
        assert_eq!(view.cells().len(), 2);
        for members in view.cells().values() {
            assert_eq!(members.len(), 1);
            assert_eq!(members[0].weight, 1.0);
        }
    }

    #[test]
    fn stratify_fractional_halves_weights() {
        let corpus = Corpus::from_records(vec![rec("a", 2012, DocType::Article, 3, &["A", "B"], &[])]).unwrap();
        let view = stratify(&corpus, CountingScheme::FractionalWC, &arl(), 2012..=2012).unwrap();
        for members in view.cells().values() {
            assert_eq!(members[0].weight, 0.5);
        }
    }

    #[test]
    fn stratify_excludes_filtered_doctype() {
        let corpus = Corpus::from_records(vec![rec("a", 2012, DocType::Other, 3, &["A"], &[])]).unwrap();
        let view = stratify(&corpus, CountingScheme::IntegerCount, &arl(), 2012..=2012).unwrap();
        assert!(view.cells().is_empty());
    }

    #[test]
    fn stratify_rejects_empty_filter() {
        let corpus = Corpus::new();
        let err = stratify(&corpus, CountingScheme::IntegerCount, &BTreeSet::new(), 2012..=2012);
        assert_eq!(err.unwrap_err(), EngineError::EmptyFilter);
    }

    #[test]
    fn threshold_rank_one_selects_maximum() {
        let spec = ThresholdSpec::new(0.10, TiePolicy::IncludeTies).unwrap();
        let stats = cell_threshold(&[5, 4, 3, 2, 1, 0, 0, 0, 0, 0], &spec).unwrap();
        assert_eq!(stats.rank, 1);
        assert_eq!(stats.threshold, 5);
        assert_eq!(stats.n_top_include, 1);
    }

    #[test]
    fn threshold_all_ties_case() {
        let spec = ThresholdSpec::new(0.20, TiePolicy::IncludeTies).unwrap();
        let stats = cell_threshold(&[7; 10], &spec).unwrap();
        assert_eq!(stats.rank, 2);
        assert_eq!(stats.threshold, 7);
        assert_eq!(stats.n_top_include, 10);
        assert_eq!(stats.n_top_strict, 2);
        assert_eq!(stats.n_top_exclude, 0);
    }

    #[test]
    fn threshold_empty_cell_errors() {
        let spec = ThresholdSpec::default();
        assert_eq!(cell_threshold(&[], &spec).unwrap_err(), EngineError::EmptyCell);
    }

    #[test]
    fn compute_thresholds_single_cell_lift() {
        let spec = ThresholdSpec::new(0.10, TiePolicy::IncludeTies).unwrap();
        let records: Vec<_> = [5u64, 4, 3, 2, 1, 0, 0, 0, 0, 0]
            .iter()
            .enumerate()
            .map(|(i, &tc)| rec(&format!("r{i}"), 2012, DocType::Article, tc, &["A"], &[]))
            .collect();
        let corpus = Corpus::from_records(records).unwrap();
        let view = stratify(&corpus, CountingScheme::IntegerCount, &arl(), 2012..=2012).unwrap();
        let table = compute_thresholds(&corpus, &view, &spec);
        assert_eq!(table.cells().len(), 1);
        let cell = table.cells().values().next().unwrap();
        assert_eq!(cell.threshold, 5);
        assert_eq!(cell.n_cell, 10);
    }

    #[test]
    fn thresholds_invariant_under_record_permutation() {
        let spec = ThresholdSpec::default();
        let mut records: Vec<_> = (0..50)
            .map(|i| {
                let cat = if i % 2 == 0 { "A" } else { "B" };
                rec(&format!("r{i:02}"), 2012, DocType::Article, (i * 7 % 23) as u64, &[cat], &[])
            })
            .collect();
        let corpus1 = Corpus::from_records(records.clone()).unwrap();
        records.reverse();
        let corpus2 = Corpus::from_records(records).unwrap();
        let v1 = stratify(&corpus1, CountingScheme::IntegerCount, &arl(), 2012..=2012).unwrap();
        let v2 = stratify(&corpus2, CountingScheme::IntegerCount, &arl(), 2012..=2012).unwrap();
        assert_eq!(
            compute_thresholds(&corpus1, &v1, &spec),
            compute_thresholds(&corpus2, &v2, &spec)
        );
    }

    #[test]
    fn below_threshold_unmarked_under_every_policy() {
        for policy in [TiePolicy::IncludeTies, TiePolicy::StrictRank, TiePolicy::ExcludeTies] {
            let spec = ThresholdSpec::new(0.10, policy).unwrap();
            let records: Vec<_> = (0..10)
                .map(|i| rec(&format!("r{i}"), 2012, DocType::Article, 10 - i as u64, &["A"], &[]))
                .collect();
            let corpus = Corpus::from_records(records).unwrap();
            let view = stratify(&corpus, CountingScheme::IntegerCount, &arl(), 2012..=2012).unwrap();
            let table = compute_thresholds(&corpus, &view, &spec);
            let t = table.cells().values().next().unwrap().threshold;
            let marks = mark_top(&corpus, &view, &table, &spec).unwrap();
            for (idx, r) in corpus.iter().enumerate() {
                if r.citations == t - 1 {
                    assert!(marks.cells_for(idx).is_none());
                }
            }
        }
    }

    #[test]
    fn world_total_double_counting() {
        let records = vec![
            rec("a", 2012, DocType::Article, 1, &["A", "B"], &[]),
            rec("b", 2012, DocType::Article, 2, &["A"], &[]),
            rec("c", 2012, DocType::Article, 3, &["B"], &[]),
        ];
        let corpus = Corpus::from_records(records).unwrap();
        let spec = ThresholdSpec::default();

        let view = stratify(&corpus, CountingScheme::IntegerCount, &arl(), 2012..=2012).unwrap();
        let table = compute_thresholds(&corpus, &view, &spec);
        let marks = mark_top(&corpus, &view, &table, &spec).unwrap();
        let rows = aggregate_report(&corpus, &view, &marks, &[], &spec);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].group, WORLD_LABEL);
        assert_eq!(rows[0].group_total, 4.0);

        let view = stratify(&corpus, CountingScheme::FractionalWC, &arl(), 2012..=2012).unwrap();
        let table = compute_thresholds(&corpus, &view, &spec);
        let marks = mark_top(&corpus, &view, &table, &spec).unwrap();
        let rows = aggregate_report(&corpus, &view, &marks, &[], &spec);
        assert!((rows[0].group_total - 3.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_group_yields_zero_total_absent_ratios() {
        let corpus = Corpus::from_records(vec![rec("a", 2012, DocType::Article, 3, &["A"], &["USA"])]).unwrap();
        let spec = ThresholdSpec::default();
        let view = stratify(&corpus, CountingScheme::IntegerCount, &arl(), 2012..=2012).unwrap();
        let table = compute_thresholds(&corpus, &view, &spec);
        let marks = mark_top(&corpus, &view, &table, &spec).unwrap();
        let ind = group_indicator(&corpus, &view, &marks, "ATLANTIS", &spec);
        assert_eq!(ind.group_total, 0.0);
        assert_eq!(ind.pp_top, None);
        assert_eq!(ind.world_share, Some(0.0));
    }
}
