//! Rank distortion between two indicators over the same universities.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::ids::UniversityId;
use crate::indicators::Indicator;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompareError {
    #[error("rankings cover different universities")]
    MismatchedUniversities,
    #[error("rank correlation needs at least 2 universities, got {0}")]
    TooFew(usize),
    #[error("rank correlation undefined: every value tied in one ranking")]
    ConstantRanking,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedEntry<T> {
    pub university: UniversityId,
    pub value: T,
    /// Display rank, 1 = best; ties broken by university id.
    pub rank: usize,
    /// Mean display rank of the entry's tie block.
    pub average_rank: T,
}

/// Universities ordered best-first by one indicator within one scope.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranking<T> {
    pub scope: String,
    entries: Vec<RankedEntry<T>>,
}

impl<T: Real> Ranking<T> {
    pub fn new(scope: impl Into<String>, mut values: Vec<(UniversityId, T)>) -> Self {
        values.sort_by(|(ua, a), (ub, b)| {
            b.partial_cmp(a)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| ua.cmp(ub))
        });
        let mut entries: Vec<RankedEntry<T>> = values
            .into_iter()
            .enumerate()
            .map(|(i, (university, value))| RankedEntry {
                university,
                value,
                rank: i + 1,
                average_rank: T::from_count(i + 1),
            })
            .collect();
        let mut start = 0;
        while start < entries.len() {
            let mut end = start + 1;
            while end < entries.len() && entries[end].value == entries[start].value {
                end += 1;
            }
            // ranks start+1 ..= end average to (start + 1 + end) / 2
            let avg = T::from_count(start + 1 + end) / T::from_count(2);
            for e in &mut entries[start..end] {
                e.average_rank = avg;
            }
            start = end;
        }
        Self {
            scope: scope.into(),
            entries,
        }
    }

    pub fn entries(&self) -> &[RankedEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn universities(&self) -> BTreeSet<&UniversityId> {
        self.entries.iter().map(|e| &e.university).collect()
    }

    fn average_ranks(&self) -> BTreeMap<&UniversityId, T> {
        self.entries
            .iter()
            .map(|e| (&e.university, e.average_rank))
            .collect()
    }
}

fn same_universities<T: Real>(a: &Ranking<T>, b: &Ranking<T>) -> Result<(), CompareError> {
    if a.universities() == b.universities() {
        Ok(())
    } else {
        Err(CompareError::MismatchedUniversities)
    }
}

/// Spearman's rho as the Pearson correlation of tie-averaged ranks.
pub fn spearman_rho<T: Real>(a: &Ranking<T>, b: &Ranking<T>) -> Result<T, CompareError> {
    same_universities(a, b)?;
    let n = a.len();
    if n < 2 {
        return Err(CompareError::TooFew(n));
    }
    let ra = a.average_ranks();
    let rb = b.average_ranks();
    // both rank vectors are permutations-with-ties of 1..N, mean (N+1)/2
    let mean = T::from_count(n + 1) / T::from_count(2);
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (u, &x) in &ra {
        let y = rb[u];
        let (dx, dy) = (x - mean, y - mean);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if saa == T::zero() || sbb == T::zero() {
        return Err(CompareError::ConstantRanking);
    }
    let rho = sab / (saa * sbb).sqrt();
    Ok(rho.max(-T::one()).min(T::one()))
}

/// Quartile (1 = top) for display rank `rank` of `n`: the smallest `q`
/// with `rank <= ceil(q * n / 4)`.
pub fn quartile_of(rank: usize, n: usize) -> u8 {
    (1..=4u8)
        .find(|&q| rank <= (q as usize * n).div_ceil(4))
        .unwrap_or(4)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QuartileAssignment(pub BTreeMap<UniversityId, u8>);

impl QuartileAssignment {
    pub fn get(&self, u: &UniversityId) -> Option<u8> {
        self.0.get(u).copied()
    }

    pub fn members(&self, quartile: u8) -> BTreeSet<&UniversityId> {
        self.0
            .iter()
            .filter(|(_, &q)| q == quartile)
            .map(|(u, _)| u)
            .collect()
    }
}

pub fn assign_quartiles<T: Real>(ranking: &Ranking<T>) -> QuartileAssignment {
    let n = ranking.len();
    QuartileAssignment(
        ranking
            .entries()
            .iter()
            .map(|e| (e.university.clone(), quartile_of(e.rank, n)))
            .collect(),
    )
}

/// `|q_a - q_b|` per university.
pub fn quartile_shifts(
    qa: &QuartileAssignment,
    qb: &QuartileAssignment,
) -> Result<BTreeMap<UniversityId, u8>, CompareError> {
    if qa.0.len() != qb.0.len() || qa.0.keys().ne(qb.0.keys()) {
        return Err(CompareError::MismatchedUniversities);
    }
    Ok(qa
        .0
        .iter()
        .map(|(u, &a)| (u.clone(), a.abs_diff(qb.0[u])))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftStats<T> {
    pub universities: usize,
    /// Universities whose quartile changed.
    pub shifted: usize,
    pub pct_shifted: T,
    pub avg_shift: T,
    pub max_shift: u8,
    /// Sum of absolute quartile shifts.
    pub total_shift: usize,
    pub shifted_ge2: usize,
}

pub fn quartile_shift_stats<T: Real>(
    qa: &QuartileAssignment,
    qb: &QuartileAssignment,
) -> Result<ShiftStats<T>, CompareError> {
    let shifts = quartile_shifts(qa, qb)?;
    let n = shifts.len();
    let shifted = shifts.values().filter(|&&s| s > 0).count();
    let total: usize = shifts.values().map(|&s| s as usize).sum();
    let (pct, avg) = if n == 0 {
        (T::zero(), T::zero())
    } else {
        (
            T::hundred() * T::from_count(shifted) / T::from_count(n),
            T::from_count(total) / T::from_count(n),
        )
    };
    Ok(ShiftStats {
        universities: n,
        shifted,
        pct_shifted: pct,
        avg_shift: avg,
        max_shift: shifts.values().copied().max().unwrap_or(0),
        total_shift: total,
        shifted_ge2: shifts.values().filter(|&&s| s >= 2).count(),
    })
}

/// Universities whose quartile differs in at least one of the given
/// assignment pairs.
pub fn shifted_in_any(
    pairs: &[(&QuartileAssignment, &QuartileAssignment)],
) -> Result<usize, CompareError> {
    let mut any = BTreeSet::new();
    for (a, b) in pairs {
        for (u, s) in quartile_shifts(a, b)? {
            if s > 0 {
                any.insert(u);
            }
        }
    }
    Ok(any.len())
}

/// Percentage of the top quartile under `a` that is not top under `b`.
pub fn top_quartile_churn<T: Real>(a: &Ranking<T>, b: &Ranking<T>) -> Result<T, CompareError> {
    same_universities(a, b)?;
    let qa = assign_quartiles(a);
    let qb = assign_quartiles(b);
    let top_a = qa.members(1);
    if top_a.is_empty() {
        return Ok(T::zero());
    }
    let top_b = qb.members(1);
    let lost = top_a.difference(&top_b).count();
    Ok(T::hundred() * T::from_count(lost) / T::from_count(top_a.len()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankComparisonReport<T> {
    pub scope: String,
    pub benchmark: Indicator,
    pub alternative: Indicator,
    pub universities: usize,
    /// `None` when undefined (fewer than two universities or a constant
    /// ranking).
    pub rho: Option<T>,
    pub shifts: ShiftStats<T>,
    pub churn_pct: T,
}

pub fn compare_rankings<T: Real>(
    benchmark: (Indicator, &Ranking<T>),
    alternative: (Indicator, &Ranking<T>),
) -> Result<RankComparisonReport<T>, CompareError> {
    let (bi, a) = benchmark;
    let (ai, b) = alternative;
    same_universities(a, b)?;
    let rho = match spearman_rho(a, b) {
        Ok(r) => Some(r),
        Err(CompareError::TooFew(_) | CompareError::ConstantRanking) => None,
        Err(e) => return Err(e),
    };
    Ok(RankComparisonReport {
        scope: a.scope.clone(),
        benchmark: bi,
        alternative: ai,
        universities: a.len(),
        rho,
        shifts: quartile_shift_stats(&assign_quartiles(a), &assign_quartiles(b))?,
        churn_pct: top_quartile_churn(a, b)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdCount<T> {
    pub threshold: T,
    /// Scopes with rho strictly above the threshold.
    pub count: usize,
    pub pct: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationSummary<T> {
    pub scopes: usize,
    pub above: Vec<ThresholdCount<T>>,
    pub group_means: BTreeMap<String, T>,
    pub min: Option<(String, T)>,
}

pub fn default_thresholds<T: Real>() -> Vec<T> {
    vec![T::ratio(80, 100), T::ratio(90, 100), T::ratio(95, 100)]
}

/// Distribution of per-scope correlations: counts above each threshold,
/// mean per group (e.g. per discipline), and the weakest scope.
pub fn correlation_summary<T: Real>(
    per_scope: &BTreeMap<String, T>,
    group_of: impl Fn(&str) -> Option<String>,
    thresholds: &[T],
) -> CorrelationSummary<T> {
    let n = per_scope.len();
    let above = thresholds
        .iter()
        .map(|&t| {
            let count = per_scope.values().filter(|&&r| r > t).count();
            ThresholdCount {
                threshold: t,
                count,
                pct: if n == 0 {
                    T::zero()
                } else {
                    T::hundred() * T::from_count(count) / T::from_count(n)
                },
            }
        })
        .collect();

    let mut groups: BTreeMap<String, (T, usize)> = BTreeMap::new();
    for (scope, &r) in per_scope {
        if let Some(g) = group_of(scope) {
            let e = groups.entry(g).or_insert((T::zero(), 0));
            e.0 = e.0 + r;
            e.1 += 1;
        }
    }
    let group_means = groups
        .into_iter()
        .map(|(g, (s, k))| (g, s / T::from_count(k)))
        .collect();

    let min = per_scope
        .iter()
        .fold(None::<(&String, T)>, |best, (s, &r)| match best {
            Some((_, b)) if b <= r => best,
            _ => Some((s, r)),
        })
        .map(|(s, r)| (s.clone(), r));

    CorrelationSummary {
        scopes: n,
        above,
        group_means,
        min,
    }
}
