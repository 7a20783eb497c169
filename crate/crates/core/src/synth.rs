//! Seeded synthetic-corpus generation and independent brute-force
//! oracles. The oracles re-derive thresholds and group shares by
//! exhaustive scanning and naive enumeration; they share no computation
//! with the engine module.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::build_indicator;
use crate::ingest::Corpus;
use crate::model::{
    CountingScheme, DocType, GroupIndicator, PublicationRecord, StratumKey, ThresholdSpec,
    TiePolicy,
};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("doctype mix must sum to 1, got {0}")]
    BadDoctypeMix(f64),
    #[error("alpha must exceed 1, got {0}")]
    BadAlpha(f64),
    #[error("probability out of [0, 1]: {0}")]
    BadProbability(f64),
    #[error("category pool must be non-empty")]
    EmptyCategoryPool,
    #[error("year range must be non-empty")]
    EmptyYearRange,
    #[error("cell has no members")]
    EmptyCell,
}

/// Parameters for seeded corpus generation. Citation counts follow the
/// truncated discrete law P(C = c) proportional to (c+1)^(-alpha) on
/// [0, cmax].
#[derive(Debug, Clone)]
pub struct GenParams {
    pub seed: u64,
    pub n: usize,
    pub alpha: f64,
    pub cmax: u64,
    pub years: RangeInclusive<i32>,
    pub doctype_mix: [f64; 4],
    pub categories: Vec<String>,
    pub p_multi: f64,
    pub countries: Vec<String>,
    pub p_multi_country: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 42,
            n: 1000,
            alpha: 2.0,
            cmax: 1000,
            years: 2010..=2014,
            doctype_mix: [0.70, 0.15, 0.05, 0.10],
            categories: vec![
                "Plant Sciences".into(),
                "Ecology".into(),
                "Zoology".into(),
                "Mathematics".into(),
                "Physics, Applied".into(),
            ],
            p_multi: 0.4,
            countries: vec![
                "BRAZIL".into(),
                "USA".into(),
                "GERMANY".into(),
                "CHINA".into(),
                "NETHERLANDS".into(),
            ],
            p_multi_country: 0.2,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let mix_sum: f64 = self.doctype_mix.iter().sum();
        if (mix_sum - 1.0).abs() > 1e-9 {
            return Err(SynthError::BadDoctypeMix(mix_sum));
        }
        if self.doctype_mix.iter().any(|&p| p < 0.0) {
            return Err(SynthError::BadDoctypeMix(mix_sum));
        }
        if self.alpha <= 1.0 {
            return Err(SynthError::BadAlpha(self.alpha));
        }
        for p in [self.p_multi, self.p_multi_country] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::BadProbability(p));
            }
        }
        if self.categories.is_empty() {
            return Err(SynthError::EmptyCategoryPool);
        }
        if self.years.is_empty() {
            return Err(SynthError::EmptyYearRange);
        }
        Ok(())
    }
}

/// Normalized pmf of the truncated shifted power law, for independent
/// checks of the sampler.
pub fn citation_pmf(alpha: f64, cmax: u64) -> Vec<f64> {
    let weights: Vec<f64> = (0..=cmax).map(|c| ((c + 1) as f64).powf(-alpha)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Generates exactly n records with fresh sequential ids from a
/// deterministic pseudo-random stream. Same params imply an identical
/// corpus.
pub fn gen_corpus(params: &GenParams) -> Result<Corpus, SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // inverse-CDF table for the citation law
    let mut cdf = Vec::with_capacity(params.cmax as usize + 1);
    let mut acc = 0.0f64;
    for c in 0..=params.cmax {
        acc += ((c + 1) as f64).powf(-params.alpha);
        cdf.push(acc);
    }
    let total = acc;

    let mut records = Vec::with_capacity(params.n);
    for i in 0..params.n {
        let u: f64 = rng.gen::<f64>() * total;
        let citations = cdf.partition_point(|&x| x <= u) as u64;

        let year = rng.gen_range(params.years.clone());

        let d: f64 = rng.gen();
        let mut doctype = DocType::Other;
        let mut cum = 0.0;
        for (j, &p) in params.doctype_mix.iter().enumerate() {
            cum += p;
            if d < cum {
                doctype = DocType::ALL[j];
                break;
            }
        }

        let categories = pick_labels(&mut rng, &params.categories, params.p_multi);
        let countries = if params.countries.is_empty() {
            Vec::new()
        } else {
            pick_labels(&mut rng, &params.countries, params.p_multi_country)
        };

        let rec = PublicationRecord::new(
            format!("S{i:07}"),
            year,
            doctype,
            citations,
            categories,
            countries,
        )
        .expect("generated record is valid");
        records.push(rec);
    }
    Ok(Corpus::from_records(records).expect("sequential ids are unique"))
}

/// One label, or two distinct labels with probability p_multi.
fn pick_labels(rng: &mut ChaCha8Rng, pool: &[String], p_multi: f64) -> Vec<String> {
    let first = rng.gen_range(0..pool.len());
    if pool.len() >= 2 && rng.gen::<f64>() < p_multi {
        let mut second = rng.gen_range(0..pool.len() - 1);
        if second >= first {
            second += 1;
        }
        vec![pool[first].clone(), pool[second].clone()]
    } else {
        vec![pool[first].clone()]
    }
}

/// Threshold and top-set sizes re-derived by exhaustion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleThreshold {
    pub rank: usize,
    pub threshold: u64,
    pub n_top_include: usize,
    pub n_top_strict: usize,
    pub n_top_exclude: usize,
}

/// Finds t as the largest v in [0, max] with |{c >= v}| >= r by
/// scanning every candidate value, then counts top-set sizes directly.
pub fn oracle_threshold(citations: &[u64], spec: &ThresholdSpec) -> Result<OracleThreshold, SynthError> {
    if citations.is_empty() {
        return Err(SynthError::EmptyCell);
    }
    let n = citations.len();
    // smallest integer r with r >= k*n, at least 1
    let mut rank = 1usize;
    while (rank as f64) < spec.k * n as f64 {
        rank += 1;
    }
    if rank > n {
        rank = n;
    }
    let max = *citations.iter().max().unwrap();
    let mut threshold = 0u64;
    for v in 0..=max {
        let at_least = citations.iter().filter(|&&c| c >= v).count();
        if at_least >= rank {
            threshold = v;
        }
    }
    let n_at = citations.iter().filter(|&&c| c == threshold).count();
    let n_above = citations.iter().filter(|&&c| c > threshold).count();
    Ok(OracleThreshold {
        rank,
        threshold,
        n_top_include: n_above + n_at,
        n_top_strict: rank,
        n_top_exclude: if n_at >= 2 { n_above } else { rank },
    })
}

/// Recomputes a group indicator by naive single-threaded enumeration
/// over (record, category) incidences, independent of the engine's
/// stratified pipeline.
pub fn oracle_group_share(
    corpus: &Corpus,
    spec: &ThresholdSpec,
    scheme: CountingScheme,
    filter: &[DocType],
    years: RangeInclusive<i32>,
    group: &str,
) -> GroupIndicator {
    let label = group.trim().to_uppercase();

    // admitted (record, cell) incidences
    let mut cells: BTreeMap<StratumKey, Vec<usize>> = BTreeMap::new();
    for (idx, rec) in corpus.iter().enumerate() {
        if !filter.contains(&rec.doctype) || !years.contains(&rec.year) {
            continue;
        }
        for cat in &rec.categories {
            cells
                .entry(StratumKey::new(rec.year, rec.doctype, cat.clone()))
                .or_default()
                .push(idx);
        }
    }

    let records = corpus.records();
    let mut world_total = 0.0f64;
    let mut world_top = 0.0f64;
    let mut group_total = 0.0f64;
    let mut group_top = 0.0f64;

    for members in cells.values() {
        let citations: Vec<u64> = members.iter().map(|&i| records[i].citations).collect();
        let ot = oracle_threshold(&citations, spec).expect("non-empty cell");
        let t = ot.threshold;
        let n_at = citations.iter().filter(|&&c| c == t).count();

        // which members are highly cited in this cell
        let marked: Vec<bool> = match spec.tie_policy {
            TiePolicy::IncludeTies => members.iter().map(|&i| records[i].citations >= t).collect(),
            TiePolicy::ExcludeTies => members
                .iter()
                .map(|&i| {
                    let c = records[i].citations;
                    c > t || (c == t && n_at < 2)
                })
                .collect(),
            TiePolicy::StrictRank => {
                let above = citations.iter().filter(|&&c| c > t).count();
                let mut tied_ids: Vec<&str> = members
                    .iter()
                    .filter(|&&i| records[i].citations == t)
                    .map(|&i| records[i].id.as_str())
                    .collect();
                tied_ids.sort();
                let quota = ot.rank.saturating_sub(above);
                let admitted: Vec<&str> = tied_ids.into_iter().take(quota).collect();
                members
                    .iter()
                    .map(|&i| {
                        let c = records[i].citations;
                        c > t || (c == t && admitted.contains(&records[i].id.as_str()))
                    })
                    .collect()
            }
        };

        let mut order: Vec<usize> = (0..members.len()).collect();
        order.sort_by(|&a, &b| records[members[a]].id.cmp(&records[members[b]].id));
        for pos in order {
            let idx = members[pos];
            let w = match scheme {
                CountingScheme::IntegerCount => 1.0,
                CountingScheme::FractionalWC => 1.0 / records[idx].categories.len() as f64,
            };
            world_total += w;
            if marked[pos] {
                world_top += w;
            }
            if records[idx].has_country(&label) {
                group_total += w;
                if marked[pos] {
                    group_top += w;
                }
            }
        }
    }

    build_indicator(label, group_total, world_total, group_top, world_top, spec)
}

const FIXTURE_TOTAL: usize = 1_320_618;
const FIXTURE_RANK_54: usize = 13_000;
const FIXTURE_RANK_53: usize = 13_300;
const FIXTURE_BRAZIL_TOTAL: usize = 36_927;
const FIXTURE_BRAZIL_TOP: usize = 195;
const FIXTURE_CATEGORY: &str = "Multidisciplinary Sciences";

/// A deterministic corpus reproducing the worked-example arithmetic:
/// 1,320,618 articles for 2012 in one category, with the top-1%
/// nearest-rank threshold landing on citation value 53, and a BRAZIL
/// group of 36,927 records of which exactly 195 reach the threshold.
pub fn gen_paper_fixture() -> Corpus {
    let mut records = Vec::with_capacity(FIXTURE_TOTAL);
    let brazil_low_end = FIXTURE_RANK_53 + (FIXTURE_BRAZIL_TOTAL - FIXTURE_BRAZIL_TOP);
    for i in 1..=FIXTURE_TOTAL {
        let citations: u64 = if i <= FIXTURE_RANK_54 {
            54
        } else if i <= FIXTURE_RANK_53 {
            53
        } else {
            (i % 53) as u64
        };
        let brazil = i <= FIXTURE_BRAZIL_TOP || (i > FIXTURE_RANK_53 && i <= brazil_low_end);
        let countries = if brazil { vec!["BRAZIL".to_string()] } else { Vec::new() };
        records.push(
            PublicationRecord::new(
                format!("WOS:{i:07}"),
                2012,
                DocType::Article,
                citations,
                vec![FIXTURE_CATEGORY.to_string()],
                countries,
            )
            .expect("fixture record is valid"),
        );
    }

    // stated count constraints hold exactly, by construction
    assert_eq!(records.len(), FIXTURE_TOTAL);
    let brazil_total = records.iter().filter(|r| r.has_country("BRAZIL")).count();
    assert_eq!(brazil_total, FIXTURE_BRAZIL_TOTAL);
    let brazil_top = records
        .iter()
        .filter(|r| r.has_country("BRAZIL") && r.citations >= 53)
        .count();
    assert_eq!(brazil_top, FIXTURE_BRAZIL_TOP);
    let at_or_above_53 = records.iter().filter(|r| r.citations >= 53).count();
    assert_eq!(at_or_above_53, FIXTURE_RANK_53);

    Corpus::from_records(records).expect("fixture ids are unique")
}
