//! Field-level exclusion rules applied before any indicator is computed.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AuthorSlot, Corpus, PublicationRecord, Taxonomy};
use crate::ids::{SdsCode, UdaCode, UniversityId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExclusionRules {
    /// Fields where a smaller share of staff has published are dropped.
    pub min_publishing_fraction: f64,
    /// Fields whose staff spans fewer universities are dropped.
    pub min_universities: usize,
}

impl Default for ExclusionRules {
    fn default() -> Self {
        Self {
            min_publishing_fraction: 0.5,
            min_universities: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ExclusionReason {
    LowPublishingFraction {
        fraction: f64,
        threshold: f64,
    },
    TooFewUniversities {
        universities: usize,
        threshold: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcludedSds {
    pub sds_code: SdsCode,
    pub uda_code: UdaCode,
    pub staff: usize,
    pub publishing_staff: usize,
    pub universities: usize,
    pub reasons: Vec<ExclusionReason>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub removed: Vec<ExcludedSds>,
    pub retained: Vec<SdsCode>,
}

#[derive(Default)]
struct FieldStats {
    staff: usize,
    publishing: usize,
    universities: BTreeSet<UniversityId>,
}

impl Corpus {
    /// Drops every field failing `rules`.
    ///
    /// Staff of dropped fields leave the roster; their byline slots stay in
    /// place as external co-authors (affiliation kept), so positional weights
    /// and the citation baseline population are unchanged.
    pub fn apply_exclusions(&self, rules: &ExclusionRules) -> (Corpus, ExclusionReport) {
        let mut stats: BTreeMap<&SdsCode, FieldStats> = self
            .taxonomy()
            .entries()
            .map(|(s, _)| (s, FieldStats::default()))
            .collect();
        for m in self.roster() {
            let st = stats.entry(&m.sds_code).or_default();
            st.staff += 1;
            if self.is_publishing(&m.researcher_id) {
                st.publishing += 1;
            }
            st.universities.insert(m.university_id.clone());
        }

        let mut report = ExclusionReport::default();
        let mut dropped = BTreeSet::new();
        for (sds, st) in &stats {
            let fraction = if st.staff == 0 {
                0.0
            } else {
                st.publishing as f64 / st.staff as f64
            };
            let mut reasons = Vec::new();
            if fraction < rules.min_publishing_fraction {
                reasons.push(ExclusionReason::LowPublishingFraction {
                    fraction,
                    threshold: rules.min_publishing_fraction,
                });
            }
            if st.universities.len() < rules.min_universities {
                reasons.push(ExclusionReason::TooFewUniversities {
                    universities: st.universities.len(),
                    threshold: rules.min_universities,
                });
            }
            if reasons.is_empty() {
                report.retained.push((*sds).clone());
            } else {
                dropped.insert((*sds).clone());
                report.removed.push(ExcludedSds {
                    sds_code: (*sds).clone(),
                    uda_code: self
                        .taxonomy()
                        .uda_of(sds)
                        .cloned()
                        .unwrap_or_else(|| "".into()),
                    staff: st.staff,
                    publishing_staff: st.publishing,
                    universities: st.universities.len(),
                    reasons,
                });
            }
        }

        if dropped.is_empty() {
            return (self.clone(), report);
        }

        let taxonomy = Taxonomy::new(
            self.taxonomy()
                .entries()
                .filter(|(s, _)| !dropped.contains(*s))
                .map(|(s, u)| (s.clone(), u.clone())),
        )
        .expect("subset of a valid taxonomy");
        let roster: Vec<_> = self
            .roster()
            .iter()
            .filter(|m| !dropped.contains(&m.sds_code))
            .cloned()
            .collect();
        let publications = self
            .publications()
            .iter()
            .map(|p| PublicationRecord {
                byline: p
                    .byline
                    .iter()
                    .map(|slot| match self.slot_unit(slot) {
                        Some((_, sds)) if dropped.contains(sds) => AuthorSlot {
                            researcher_id: None,
                            ..slot.clone()
                        },
                        _ => slot.clone(),
                    })
                    .collect(),
                ..p.clone()
            })
            .collect();
        let mut filtered =
            Corpus::new(taxonomy, roster, publications).expect("exclusion preserves invariants");
        filtered.census_date = self.census_date.clone();
        (filtered, report)
    }
}
