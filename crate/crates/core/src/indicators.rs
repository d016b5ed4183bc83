//! Field-level productivity indicators.
//!
//! Six indicators come from crossing three counting modes (positional,
//! plain fractional, full) with two bases (publication output, normalized
//! citation impact). Each is a per-capita sum over the unit's publications:
//!
//! ```text
//! value(u, s) = (1 / RS_s) * sum_i share_i * weight_i
//! ```
//!
//! where `weight_i` is 1 on the output basis and `c_i / Me_i` on the impact
//! basis, `Me_i` being the median citation count of cited publications of the
//! same year and subject category.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Basis, Corpus, PublicationRecord, StaffBasis};
use crate::credit::{self, CreditScheme, FullCounting};
use crate::ids::{SdsCode, UniversityId};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndicatorError {
    #[error("no cited publications in year {year}: citation baseline unavailable")]
    BaselineUnavailable { year: i32 },
    #[error("productivity undefined for {university} in {sds}: no research staff")]
    UndefinedProductivity {
        university: UniversityId,
        sds: SdsCode,
    },
    #[error("unknown indicator {0:?} (expected one of wfo, fo, o, wfi, fi, i)")]
    UnknownIndicator(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CountingMode {
    Weighted,
    Fractional,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    Wfo,
    Fo,
    O,
    Wfi,
    Fi,
    I,
}

impl Indicator {
    pub const ALL: [Indicator; 6] = [
        Indicator::Wfo,
        Indicator::Fo,
        Indicator::O,
        Indicator::Wfi,
        Indicator::Fi,
        Indicator::I,
    ];

    pub fn mode(self) -> CountingMode {
        match self {
            Indicator::Wfo | Indicator::Wfi => CountingMode::Weighted,
            Indicator::Fo | Indicator::Fi => CountingMode::Fractional,
            Indicator::O | Indicator::I => CountingMode::Full,
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            Indicator::Wfo | Indicator::Fo | Indicator::O => Basis::Output,
            _ => Basis::Impact,
        }
    }

    pub fn from_parts(mode: CountingMode, basis: Basis) -> Self {
        match (mode, basis) {
            (CountingMode::Weighted, Basis::Output) => Indicator::Wfo,
            (CountingMode::Fractional, Basis::Output) => Indicator::Fo,
            (CountingMode::Full, Basis::Output) => Indicator::O,
            (CountingMode::Weighted, Basis::Impact) => Indicator::Wfi,
            (CountingMode::Fractional, Basis::Impact) => Indicator::Fi,
            (CountingMode::Full, Basis::Impact) => Indicator::I,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Indicator::Wfo => "wfo",
            Indicator::Fo => "fo",
            Indicator::O => "o",
            Indicator::Wfi => "wfi",
            Indicator::Fi => "fi",
            Indicator::I => "i",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Indicator {
    type Err = IndicatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Indicator::ALL
            .into_iter()
            .find(|i| i.name() == lower)
            .ok_or_else(|| IndicatorError::UnknownIndicator(s.to_owned()))
    }
}

/// One value per [`Indicator`], indexed in `Indicator::ALL` order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndicatorValues<T>(pub [T; 6]);

impl<T: Copy> IndicatorValues<T> {
    pub fn get(&self, indicator: Indicator) -> T {
        self.0[indicator.index()]
    }

    pub fn set(&mut self, indicator: Indicator, v: T) {
        self.0[indicator.index()] = v;
    }
}

/// Counting switches shared by every indicator computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndicatorConfig<T> {
    pub scheme: CreditScheme<T>,
    pub staff_basis: StaffBasis,
    pub full_counting: FullCounting,
}

impl<T: Real> Default for IndicatorConfig<T> {
    fn default() -> Self {
        Self {
            scheme: CreditScheme::default(),
            staff_basis: StaffBasis::FullRoster,
            full_counting: FullCounting::PerInstitution,
        }
    }
}

/// Median citations of cited publications per (year, subject category),
/// with a per-year fallback for categories absent from a year.
#[derive(Clone, Debug, PartialEq)]
pub struct CitationBaseline<T> {
    cells: BTreeMap<(i32, String), T>,
    years: BTreeMap<i32, T>,
}

/// Median of a non-empty sample; mean of the middle pair for even sizes.
pub fn median<T: Real>(values: &mut [u64]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let n = values.len();
    let hi = T::from_u64(values[n / 2])?;
    if n % 2 == 1 {
        Some(hi)
    } else {
        let lo = T::from_u64(values[n / 2 - 1])?;
        Some((lo + hi) / (T::one() + T::one()))
    }
}

impl<T: Real> CitationBaseline<T> {
    /// Baselines from the corpus itself, which stands for the national
    /// publication population. Uncited publications are left out of every
    /// median; a multi-category publication enters each of its cells.
    pub fn build(corpus: &Corpus) -> Result<Self, IndicatorError> {
        let mut cells: BTreeMap<(i32, String), Vec<u64>> = BTreeMap::new();
        let mut years: BTreeMap<i32, Vec<u64>> = BTreeMap::new();
        for p in corpus.publications() {
            let year = years.entry(p.year).or_default();
            if p.citations == 0 {
                continue;
            }
            year.push(p.citations);
            for cat in &p.categories {
                cells
                    .entry((p.year, cat.clone()))
                    .or_default()
                    .push(p.citations);
            }
        }
        let years = years
            .into_iter()
            .map(|(y, mut v)| {
                median(&mut v)
                    .map(|m| (y, m))
                    .ok_or(IndicatorError::BaselineUnavailable { year: y })
            })
            .collect::<Result<_, _>>()?;
        let cells = cells
            .into_iter()
            .map(|(k, mut v)| (k, median(&mut v).expect("cells are non-empty")))
            .collect();
        Ok(Self { cells, years })
    }

    pub fn cell(&self, year: i32, category: &str) -> Option<T> {
        self.cells.get(&(year, category.to_owned())).copied()
    }

    pub fn year(&self, year: i32) -> Option<T> {
        self.years.get(&year).copied()
    }

    /// `Me_i`: mean of the publication's category medians, each falling back
    /// to the year median when its cell is empty.
    pub fn reference_median(&self, publication: &PublicationRecord) -> Result<T, IndicatorError> {
        let year = publication.year;
        let fallback = self
            .year(year)
            .ok_or(IndicatorError::BaselineUnavailable { year })?;
        if publication.categories.is_empty() {
            return Ok(fallback);
        }
        let total = publication
            .categories
            .iter()
            .map(|c| self.cell(year, c).unwrap_or(fallback))
            .fold(T::zero(), |a, b| a + b);
        Ok(total / T::from_count(publication.categories.len()))
    }
}

pub fn build_citation_baseline<T: Real>(
    corpus: &Corpus,
) -> Result<CitationBaseline<T>, IndicatorError> {
    CitationBaseline::build(corpus)
}

/// `c_i / Me_i`.
pub fn normalized_citation_score<T: Real>(
    publication: &PublicationRecord,
    baseline: &CitationBaseline<T>,
) -> Result<T, IndicatorError> {
    let me = baseline.reference_median(publication)?;
    if publication.citations == 0 {
        return Ok(T::zero());
    }
    Ok(T::from_u64(publication.citations).expect("count representable") / me)
}

/// One indicator for one `(university, sds)` unit, straight from the
/// definition. [`compute_sds_table`] produces the same numbers for every
/// unit at once.
pub fn sds_indicator<T: Real>(
    corpus: &Corpus,
    university: &UniversityId,
    sds: &SdsCode,
    indicator: Indicator,
    config: &IndicatorConfig<T>,
    baseline: &CitationBaseline<T>,
) -> Result<T, IndicatorError> {
    let staff = corpus.staff_count(university, sds, config.staff_basis);
    if staff == 0 {
        return Err(IndicatorError::UndefinedProductivity {
            university: university.clone(),
            sds: sds.clone(),
        });
    }
    let mut total = T::zero();
    for p in corpus.unit_publications(university, sds) {
        let share = match indicator.mode() {
            CountingMode::Weighted => {
                credit::weighted_fraction(p, corpus, university, sds, &config.scheme)
            }
            CountingMode::Fractional => credit::plain_fraction(p, corpus, university, sds),
            CountingMode::Full => {
                credit::full_share(p, corpus, university, sds, config.full_counting)
            }
        };
        let weight = match indicator.basis() {
            Basis::Output => T::one(),
            Basis::Impact => normalized_citation_score(p, baseline)?,
        };
        total = total + share * weight;
    }
    Ok(total / T::from_count(staff))
}

/// Ranks values best-first onto 0..=100. Tied values share the mean
/// percentile of the rank block they occupy. A single value maps to 100.
///
/// Output is in input order.
pub fn percentile_scale<K: Clone, T: Real>(values: &[(K, T)]) -> Vec<(K, T)> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![(values[0].0.clone(), T::hundred())];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .1
            .partial_cmp(&values[a].1)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let span = T::from_count(n - 1);
    let pct_at = |rank: usize| T::hundred() * T::from_count(n - rank) / span;

    let mut out: Vec<Option<T>> = vec![None; n];
    let mut start = 0;
    while start < n {
        let v = values[order[start]].1;
        let mut end = start + 1;
        while end < n && values[order[end]].1 == v {
            end += 1;
        }
        // ranks start+1 ..= end
        let sum = (start + 1..=end).map(pct_at).fold(T::zero(), |a, b| a + b);
        let mean = sum / T::from_count(end - start);
        for &i in &order[start..end] {
            out[i] = Some(mean);
        }
        start = end;
    }
    values
        .iter()
        .zip(out)
        .map(|((k, _), p)| (k.clone(), p.expect("every index ranked")))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorRow<T> {
    pub university: UniversityId,
    pub sds: SdsCode,
    /// `RS_s` under the configured staff basis.
    pub staff: usize,
    /// Distinct publications `N_s`.
    pub publications: usize,
    pub cited_publications: usize,
    pub values: IndicatorValues<T>,
    /// Percentiles within the field, over units with non-nil output.
    /// `None` for units outside that set.
    pub percentiles: [Option<T>; 6],
}

impl<T: Real> IndicatorRow<T> {
    pub fn in_subset(&self, basis: Basis) -> bool {
        match basis {
            Basis::Output => self.publications > 0,
            Basis::Impact => self.cited_publications > 0,
        }
    }
}

/// Indicator values for every staffed `(university, sds)` unit, sorted by
/// field then university.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorTable<T> {
    rows: Vec<IndicatorRow<T>>,
}

impl<T: Real> IndicatorTable<T> {
    pub fn from_rows(mut rows: Vec<IndicatorRow<T>>) -> Self {
        rows.sort_by(|a, b| (&a.sds, &a.university).cmp(&(&b.sds, &b.university)));
        assign_percentiles(&mut rows);
        Self { rows }
    }

    pub fn rows(&self) -> &[IndicatorRow<T>] {
        &self.rows
    }

    pub fn get(&self, university: &UniversityId, sds: &SdsCode) -> Option<&IndicatorRow<T>> {
        self.rows
            .binary_search_by(|r| (&r.sds, &r.university).cmp(&(sds, university)))
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn fields(&self) -> Vec<&SdsCode> {
        let mut v: Vec<&SdsCode> = self.rows.iter().map(|r| &r.sds).collect();
        v.dedup();
        v
    }

    pub fn rows_in<'a>(
        &'a self,
        sds: &'a SdsCode,
    ) -> impl Iterator<Item = &'a IndicatorRow<T>> + 'a {
        self.rows.iter().filter(move |r| &r.sds == sds)
    }
}

fn assign_percentiles<T: Real>(rows: &mut [IndicatorRow<T>]) {
    let mut start = 0;
    while start < rows.len() {
        let mut end = start + 1;
        while end < rows.len() && rows[end].sds == rows[start].sds {
            end += 1;
        }
        let block = &mut rows[start..end];
        for ind in Indicator::ALL {
            let vals: Vec<(usize, T)> = block
                .iter()
                .enumerate()
                .filter(|(_, r)| r.in_subset(Basis::Output))
                .map(|(i, r)| (i, r.values.get(ind)))
                .collect();
            for r in block.iter_mut() {
                r.percentiles[ind.index()] = None;
            }
            for (i, p) in percentile_scale(&vals) {
                block[i].percentiles[ind.index()] = Some(p);
            }
        }
        start = end;
    }
}

/// Every indicator for every staffed unit, in one pass over publications.
/// Units with no staff under the configured basis are omitted.
pub fn compute_sds_table<T: Real>(
    corpus: &Corpus,
    config: &IndicatorConfig<T>,
    baseline: &CitationBaseline<T>,
) -> Result<IndicatorTable<T>, IndicatorError> {
    struct Acc<T> {
        sums: [T; 6],
        pubs: usize,
        cited: usize,
    }

    let mut acc: BTreeMap<(&UniversityId, &SdsCode), Acc<T>> = BTreeMap::new();
    for p in corpus.publications() {
        let shares = credit::unit_shares(p, corpus, &config.scheme, config.full_counting);
        if shares.is_empty() {
            continue;
        }
        let score = normalized_citation_score(p, baseline)?;
        for (unit, sh) in shares {
            let a = acc.entry(unit).or_insert_with(|| Acc {
                sums: [T::zero(); 6],
                pubs: 0,
                cited: 0,
            });
            let contributions = [
                sh.weighted,
                sh.plain,
                sh.full,
                sh.weighted * score,
                sh.plain * score,
                sh.full * score,
            ];
            for (sum, c) in a.sums.iter_mut().zip(contributions) {
                *sum = *sum + c;
            }
            a.pubs += 1;
            if p.citations >= 1 {
                a.cited += 1;
            }
        }
    }

    let mut rows = Vec::new();
    for (u, s) in corpus.units() {
        let staff = corpus.staff_count(u, s, config.staff_basis);
        if staff == 0 {
            continue;
        }
        let rs = T::from_count(staff);
        let (sums, pubs, cited) = match acc.get(&(u, s)) {
            Some(a) => (a.sums, a.pubs, a.cited),
            None => ([T::zero(); 6], 0, 0),
        };
        rows.push(IndicatorRow {
            university: u.clone(),
            sds: s.clone(),
            staff,
            publications: pubs,
            cited_publications: cited,
            values: IndicatorValues(sums.map(|v| v / rs)),
            percentiles: [None; 6],
        });
    }
    Ok(IndicatorTable::from_rows(rows))
}
