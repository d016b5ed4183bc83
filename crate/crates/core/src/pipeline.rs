//! Orchestration shared by the CLI and the acceptance harness:
//! exclusions, field tables, national averages, discipline tables and the
//! pairwise ranking comparisons.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{
    compute_uda_table, national_averages, AggregateError, NationalAverages, UdaTable,
};
use crate::compare::{
    assign_quartiles, compare_rankings, correlation_summary, default_thresholds, quartile_shifts,
    CompareError, CorrelationSummary, RankComparisonReport, Ranking,
};
use crate::config::RunConfig;
use crate::corpus::{Basis, Corpus, ExclusionReport};
use crate::credit::CreditError;
use crate::ids::UniversityId;
use crate::indicators::{
    compute_sds_table, CitationBaseline, Indicator, IndicatorError, IndicatorTable,
};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("empty analysis set: no fields survive the exclusion rules")]
    EmptyAnalysisSet,
    #[error(transparent)]
    Credit(#[from] CreditError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Compare(#[from] CompareError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Sds,
    Uda,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Sds => "sds",
            Level::Uda => "uda",
        })
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sds" => Ok(Level::Sds),
            "uda" => Ok(Level::Uda),
            other => Err(format!("unknown level {other:?} (expected sds or uda)")),
        }
    }
}

/// Benchmark and alternative indicator, written `wfi:i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pair {
    pub benchmark: Indicator,
    pub alternative: Indicator,
}

impl Pair {
    pub const fn new(benchmark: Indicator, alternative: Indicator) -> Self {
        Self {
            benchmark,
            alternative,
        }
    }

    /// Impact pairs compare on the impact non-nil subset, output pairs on
    /// the output one.
    pub fn basis(self) -> Basis {
        if self.benchmark.basis() == Basis::Impact || self.alternative.basis() == Basis::Impact {
            Basis::Impact
        } else {
            Basis::Output
        }
    }

    /// File-name fragment, e.g. `wfi_vs_i`.
    pub fn tag(self) -> String {
        format!("{}_vs_{}", self.benchmark, self.alternative)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.benchmark, self.alternative)
    }
}

impl FromStr for Pair {
    type Err = IndicatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| IndicatorError::UnknownIndicator(s.to_owned()))?;
        Ok(Pair::new(a.parse()?, b.parse()?))
    }
}

impl Serialize for Pair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub const DEFAULT_PAIRS: [Pair; 6] = [
    Pair::new(Indicator::Wfi, Indicator::I),
    Pair::new(Indicator::Wfi, Indicator::Fi),
    Pair::new(Indicator::Fi, Indicator::I),
    Pair::new(Indicator::Wfo, Indicator::O),
    Pair::new(Indicator::Wfo, Indicator::Fo),
    Pair::new(Indicator::Fo, Indicator::O),
];

/// Comma-separated pair list.
pub fn parse_pairs(s: &str) -> Result<Vec<Pair>, IndicatorError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse())
        .collect()
}

#[derive(Clone, Debug)]
pub struct Analysis<T> {
    /// The corpus after exclusions.
    pub corpus: Corpus,
    pub exclusions: ExclusionReport,
    pub sds: IndicatorTable<T>,
    pub averages: NationalAverages<T>,
    pub uda: UdaTable<T>,
}

pub fn analyze<T: Real>(corpus: &Corpus, cfg: &RunConfig) -> Result<Analysis<T>, PipelineError> {
    let (corpus, exclusions) = corpus.apply_exclusions(&cfg.exclusions);
    if corpus.taxonomy().is_empty() {
        return Err(PipelineError::EmptyAnalysisSet);
    }
    let icfg = cfg.indicator_config::<T>()?;
    let baseline = CitationBaseline::build(&corpus)?;
    let sds = compute_sds_table(&corpus, &icfg, &baseline)?;
    let averages = national_averages(&sds, cfg.switches.national_average_subset);
    let uda = compute_uda_table(&sds, &averages, corpus.taxonomy())?;
    Ok(Analysis {
        corpus,
        exclusions,
        sds,
        averages,
        uda,
    })
}

impl<T: Real> Analysis<T> {
    /// Scope code to its discipline: a field maps to its UDA, a UDA to
    /// itself.
    pub fn group_of(&self, level: Level, scope: &str) -> Option<String> {
        match level {
            Level::Sds => self
                .corpus
                .taxonomy()
                .uda_of(&scope.into())
                .map(|u| u.to_string()),
            Level::Uda => Some(scope.to_owned()),
        }
    }

    /// `(scope, university, values)` for units in `basis`'s non-nil subset.
    fn scope_values(
        &self,
        level: Level,
        basis: Basis,
    ) -> BTreeMap<String, Vec<(UniversityId, [T; 6])>> {
        let mut out: BTreeMap<String, Vec<_>> = BTreeMap::new();
        match level {
            Level::Sds => {
                for r in self.sds.rows().iter().filter(|r| r.in_subset(basis)) {
                    out.entry(r.sds.to_string())
                        .or_default()
                        .push((r.university.clone(), r.values.0));
                }
            }
            Level::Uda => {
                for r in self.uda.rows().iter().filter(|r| r.in_subset(basis)) {
                    out.entry(r.uda.to_string())
                        .or_default()
                        .push((r.university.clone(), r.values.0));
                }
            }
        }
        out
    }

    pub fn rankings(&self, level: Level, basis: Basis, indicator: Indicator) -> Vec<Ranking<T>> {
        self.scope_values(level, basis)
            .into_iter()
            .map(|(scope, rows)| {
                let vals = rows
                    .into_iter()
                    .map(|(u, v)| (u, v[indicator.index()]))
                    .collect();
                Ranking::new(scope, vals)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScopeComparison<T> {
    pub group: Option<String>,
    #[serde(flatten)]
    pub report: RankComparisonReport<T>,
    /// Universities whose quartile differs between the two indicators.
    pub shifted_universities: Vec<UniversityId>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PooledShifts<T> {
    pub universities: usize,
    pub shifted: usize,
    pub pct_shifted: T,
    pub shifted_ge2: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairReport<T> {
    pub pair: Pair,
    pub level: Level,
    pub basis: Basis,
    pub scopes: Vec<ScopeComparison<T>>,
    pub correlations: CorrelationSummary<T>,
    pub pooled: PooledShifts<T>,
}

pub fn compare_pair<T: Real>(
    analysis: &Analysis<T>,
    level: Level,
    pair: Pair,
) -> Result<PairReport<T>, PipelineError> {
    let basis = pair.basis();
    let a = analysis.rankings(level, basis, pair.benchmark);
    let b = analysis.rankings(level, basis, pair.alternative);
    let scopes = a
        .par_iter()
        .zip(b.par_iter())
        .map(|(ra, rb)| -> Result<ScopeComparison<T>, CompareError> {
            let report = compare_rankings((pair.benchmark, ra), (pair.alternative, rb))?;
            let shifted_universities =
                quartile_shifts(&assign_quartiles(ra), &assign_quartiles(rb))?
                    .into_iter()
                    .filter(|(_, s)| *s > 0)
                    .map(|(u, _)| u)
                    .collect();
            Ok(ScopeComparison {
                group: analysis.group_of(level, &ra.scope),
                report,
                shifted_universities,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rhos: BTreeMap<String, T> = scopes
        .iter()
        .filter_map(|s| s.report.rho.map(|r| (s.report.scope.clone(), r)))
        .collect();
    let correlations = correlation_summary(
        &rhos,
        |s| analysis.group_of(level, s),
        &default_thresholds(),
    );

    let universities: usize = scopes.iter().map(|s| s.report.universities).sum();
    let shifted: usize = scopes.iter().map(|s| s.report.shifts.shifted).sum();
    let pooled = PooledShifts {
        universities,
        shifted,
        pct_shifted: if universities == 0 {
            T::zero()
        } else {
            T::hundred() * T::from_count(shifted) / T::from_count(universities)
        },
        shifted_ge2: scopes.iter().map(|s| s.report.shifts.shifted_ge2).sum(),
    };
    Ok(PairReport {
        pair,
        level,
        basis,
        scopes,
        correlations,
        pooled,
    })
}

/// Per scope, the universities ranked under any pair and those whose
/// quartile moved under at least one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnyPairShift {
    pub scope: String,
    pub universities: usize,
    pub shifted_any_pair: usize,
}

pub fn any_pair_shifts<T: Real>(reports: &[PairReport<T>]) -> Vec<AnyPairShift> {
    let mut seen: BTreeMap<&str, (usize, BTreeSet<&UniversityId>)> = BTreeMap::new();
    for s in reports.iter().flat_map(|r| &r.scopes) {
        let e = seen.entry(s.report.scope.as_str()).or_default();
        // impact subsets nest inside output subsets, so the largest
        // ranking is the union
        e.0 = e.0.max(s.report.universities);
        e.1.extend(&s.shifted_universities);
    }
    seen.into_iter()
        .map(|(scope, (universities, shifted))| AnyPairShift {
            scope: scope.to_owned(),
            universities,
            shifted_any_pair: shifted.len(),
        })
        .collect()
}

/// Quartile of each university under each indicator, within the
/// indicator's own non-nil subset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuartileRow {
    pub scope: String,
    pub university: UniversityId,
    pub quartiles: [Option<u8>; 6],
}

pub fn quartile_table<T: Real>(analysis: &Analysis<T>, level: Level) -> Vec<QuartileRow> {
    let mut rows: BTreeMap<(String, UniversityId), [Option<u8>; 6]> = BTreeMap::new();
    for ind in Indicator::ALL {
        for ranking in analysis.rankings(level, ind.basis(), ind) {
            for (u, q) in assign_quartiles(&ranking).0 {
                rows.entry((ranking.scope.clone(), u)).or_default()[ind.index()] = Some(q);
            }
        }
    }
    rows.into_iter()
        .map(|((scope, university), quartiles)| QuartileRow {
            scope,
            university,
            quartiles,
        })
        .collect()
}
