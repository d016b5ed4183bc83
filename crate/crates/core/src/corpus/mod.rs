//! Evaluation corpus: field taxonomy, staff roster and publications with
//! their ordered bylines.
//!
//! A [`Corpus`] is only constructed through [`Corpus::new`] (or the CSV
//! loader built on it), which checks every cross-reference and collects all
//! integrity violations rather than stopping at the first one.

mod exclusions;
mod io;
mod summary;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use exclusions::{ExcludedSds, ExclusionReason, ExclusionReport, ExclusionRules};
pub(crate) use io::canonical_bytes;
pub use io::{
    load_corpus, write_corpus, CorpusPaths, BYLINE_FILE, PUBLICATIONS_FILE, STAFF_FILE,
    TAXONOMY_FILE,
};
pub use summary::{CorpusSummary, UdaSummary};

use crate::ids::{PubId, ResearcherId, SdsCode, UdaCode, UniversityId};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },
    #[error("{}", integrity_message(.0))]
    Integrity(Vec<Violation>),
    #[error("unknown scope code {0:?}")]
    UnknownScope(String),
}

fn integrity_message(v: &[Violation]) -> String {
    match v {
        [] => "integrity error".to_owned(),
        [one] => format!("integrity error: {one}"),
        [first, rest @ ..] => format!("integrity error: {first} (and {} more)", rest.len()),
    }
}

/// One broken corpus invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateSds {
        sds_code: SdsCode,
    },
    DuplicateResearcher {
        researcher_id: ResearcherId,
    },
    UnknownSds {
        researcher_id: ResearcherId,
        sds_code: SdsCode,
    },
    DuplicatePubId {
        pub_id: PubId,
    },
    NoCategories {
        pub_id: PubId,
    },
    EmptyByline {
        pub_id: PubId,
    },
    PositionGap {
        pub_id: PubId,
        missing: u32,
    },
    DuplicatePosition {
        pub_id: PubId,
        position: u32,
    },
    RepeatedAuthor {
        pub_id: PubId,
        researcher_id: ResearcherId,
    },
    UnresolvedResearcher {
        pub_id: PubId,
        researcher_id: ResearcherId,
    },
    AffiliationMismatch {
        pub_id: PubId,
        researcher_id: ResearcherId,
        roster: UniversityId,
        byline: UniversityId,
    },
    UnknownPublication {
        pub_id: PubId,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::DuplicateSds { .. } => "duplicate_sds",
            Violation::DuplicateResearcher { .. } => "duplicate_researcher_id",
            Violation::UnknownSds { .. } => "unknown_sds",
            Violation::DuplicatePubId { .. } => "duplicate_pub_id",
            Violation::NoCategories { .. } => "no_categories",
            Violation::EmptyByline { .. } => "empty_byline",
            Violation::PositionGap { .. } => "position_gap",
            Violation::DuplicatePosition { .. } => "duplicate_position",
            Violation::RepeatedAuthor { .. } => "repeated_author",
            Violation::UnresolvedResearcher { .. } => "unresolved_researcher",
            Violation::AffiliationMismatch { .. } => "affiliation_mismatch",
            Violation::UnknownPublication { .. } => "unknown_pub_id",
        }
    }

    pub fn pub_id(&self) -> Option<&PubId> {
        match self {
            Violation::DuplicatePubId { pub_id }
            | Violation::NoCategories { pub_id }
            | Violation::EmptyByline { pub_id }
            | Violation::PositionGap { pub_id, .. }
            | Violation::DuplicatePosition { pub_id, .. }
            | Violation::RepeatedAuthor { pub_id, .. }
            | Violation::UnresolvedResearcher { pub_id, .. }
            | Violation::AffiliationMismatch { pub_id, .. }
            | Violation::UnknownPublication { pub_id } => Some(pub_id),
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateSds { sds_code } => write!(f, "duplicate sds_code {sds_code}"),
            Violation::DuplicateResearcher { researcher_id } => {
                write!(f, "duplicate researcher_id {researcher_id}")
            }
            Violation::UnknownSds {
                researcher_id,
                sds_code,
            } => write!(f, "researcher {researcher_id} assigned to unknown sds {sds_code}"),
            Violation::DuplicatePubId { pub_id } => write!(f, "duplicate pub_id {pub_id}"),
            Violation::NoCategories { pub_id } => {
                write!(f, "publication {pub_id} has no subject category")
            }
            Violation::EmptyByline { pub_id } => write!(f, "publication {pub_id} has an empty byline"),
            Violation::PositionGap { pub_id, missing } => {
                write!(f, "position gap in byline of {pub_id}: position {missing} missing")
            }
            Violation::DuplicatePosition { pub_id, position } => {
                write!(f, "duplicate position {position} in byline of {pub_id}")
            }
            Violation::RepeatedAuthor {
                pub_id,
                researcher_id,
            } => write!(f, "researcher {researcher_id} appears twice in byline of {pub_id}"),
            Violation::UnresolvedResearcher {
                pub_id,
                researcher_id,
            } => write!(f, "byline of {pub_id} references unknown researcher {researcher_id}"),
            Violation::AffiliationMismatch {
                pub_id,
                researcher_id,
                roster,
                byline,
            } => write!(
                f,
                "byline of {pub_id}: researcher {researcher_id} listed at {byline} but rostered at {roster}"
            ),
            Violation::UnknownPublication { pub_id } => {
                write!(f, "byline rows reference unknown pub_id {pub_id}")
            }
        }
    }
}

/// Output or impact side of the indicator family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Output,
    Impact,
}

/// Which staff count as research staff in productivity denominators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaffBasis {
    #[default]
    FullRoster,
    PublishingOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Sds(SdsCode),
    Uda(UdaCode),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Taxonomy {
    entries: BTreeMap<SdsCode, UdaCode>,
    udas: BTreeSet<UdaCode>,
}

impl Taxonomy {
    pub fn new(entries: impl IntoIterator<Item = (SdsCode, UdaCode)>) -> Result<Self, CorpusError> {
        let mut map = BTreeMap::new();
        let mut violations = Vec::new();
        for (sds, uda) in entries {
            match map.entry(sds) {
                std::collections::btree_map::Entry::Occupied(e) => {
                    violations.push(Violation::DuplicateSds {
                        sds_code: e.key().clone(),
                    })
                }
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(uda);
                }
            }
        }
        if !violations.is_empty() {
            return Err(CorpusError::Integrity(violations));
        }
        let udas = map.values().cloned().collect();
        Ok(Self { entries: map, udas })
    }

    pub fn uda_of(&self, sds: &SdsCode) -> Option<&UdaCode> {
        self.entries.get(sds)
    }

    pub fn contains_sds(&self, sds: &SdsCode) -> bool {
        self.entries.contains_key(sds)
    }

    pub fn udas(&self) -> &BTreeSet<UdaCode> {
        &self.udas
    }

    /// Fields in `uda`, sorted by code.
    pub fn sds_in<'a>(&'a self, uda: &'a UdaCode) -> impl Iterator<Item = &'a SdsCode> + 'a {
        self.entries
            .iter()
            .filter(move |(_, u)| *u == uda)
            .map(|(s, _)| s)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&SdsCode, &UdaCode)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaffMember {
    pub researcher_id: ResearcherId,
    pub university_id: UniversityId,
    pub sds_code: SdsCode,
}

/// One byline position. Slots without a roster reference are external
/// co-authors: they take positional weight but never institutional credit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthorSlot {
    pub position: u32,
    pub researcher_id: Option<ResearcherId>,
    pub university_id: Option<UniversityId>,
}

impl AuthorSlot {
    pub fn staff(position: u32, researcher: &str, university: &str) -> Self {
        Self {
            position,
            researcher_id: Some(researcher.into()),
            university_id: Some(university.into()),
        }
    }

    pub fn external(position: u32, university: Option<&str>) -> Self {
        Self {
            position,
            researcher_id: None,
            university_id: university.map(UniversityId::from),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicationRecord {
    pub pub_id: PubId,
    pub year: i32,
    pub categories: Vec<String>,
    pub citations: u64,
    /// Sorted by position once the record is part of a [`Corpus`].
    pub byline: Vec<AuthorSlot>,
}

impl PublicationRecord {
    pub fn byline_len(&self) -> usize {
        self.byline.len()
    }
}

/// Validated, cross-linked corpus. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Corpus {
    taxonomy: Taxonomy,
    roster: Vec<StaffMember>,
    publications: Vec<PublicationRecord>,
    census_date: Option<String>,
    staff_index: HashMap<ResearcherId, usize>,
    publishing: Vec<bool>,
    unit_staff: BTreeMap<(UniversityId, SdsCode), Vec<usize>>,
    unit_pubs: BTreeMap<(UniversityId, SdsCode), Vec<usize>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.taxonomy == other.taxonomy
            && self.roster == other.roster
            && self.publications == other.publications
            && self.census_date == other.census_date
    }
}

impl Corpus {
    /// Validates all invariants and builds the lookup indices.
    ///
    /// Byline slots naming a researcher but no university inherit the
    /// roster affiliation.
    pub fn new(
        taxonomy: Taxonomy,
        roster: Vec<StaffMember>,
        mut publications: Vec<PublicationRecord>,
    ) -> Result<Self, CorpusError> {
        let mut violations = Vec::new();

        let mut staff_index = HashMap::with_capacity(roster.len());
        for (i, m) in roster.iter().enumerate() {
            if staff_index.insert(m.researcher_id.clone(), i).is_some() {
                violations.push(Violation::DuplicateResearcher {
                    researcher_id: m.researcher_id.clone(),
                });
            }
            if !taxonomy.contains_sds(&m.sds_code) {
                violations.push(Violation::UnknownSds {
                    researcher_id: m.researcher_id.clone(),
                    sds_code: m.sds_code.clone(),
                });
            }
        }

        let mut seen_pubs = HashSet::with_capacity(publications.len());
        for p in publications.iter_mut() {
            if !seen_pubs.insert(p.pub_id.clone()) {
                violations.push(Violation::DuplicatePubId {
                    pub_id: p.pub_id.clone(),
                });
            }
            if p.categories.is_empty() {
                violations.push(Violation::NoCategories {
                    pub_id: p.pub_id.clone(),
                });
            }
            check_byline(p, &roster, &staff_index, &mut violations);
        }

        if !violations.is_empty() {
            return Err(CorpusError::Integrity(violations));
        }

        let mut publishing = vec![false; roster.len()];
        let mut unit_staff: BTreeMap<(UniversityId, SdsCode), Vec<usize>> = BTreeMap::new();
        for (i, m) in roster.iter().enumerate() {
            unit_staff
                .entry((m.university_id.clone(), m.sds_code.clone()))
                .or_default()
                .push(i);
        }
        let mut unit_pubs: BTreeMap<(UniversityId, SdsCode), Vec<usize>> = BTreeMap::new();
        for (pi, p) in publications.iter().enumerate() {
            for slot in &p.byline {
                let Some(rid) = &slot.researcher_id else {
                    continue;
                };
                let si = staff_index[rid];
                publishing[si] = true;
                let m = &roster[si];
                let list = unit_pubs
                    .entry((m.university_id.clone(), m.sds_code.clone()))
                    .or_default();
                if list.last() != Some(&pi) {
                    list.push(pi);
                }
            }
        }

        Ok(Self {
            taxonomy,
            roster,
            publications,
            census_date: None,
            staff_index,
            publishing,
            unit_staff,
            unit_pubs,
        })
    }

    pub fn with_census_date(mut self, date: impl Into<String>) -> Self {
        self.census_date = Some(date.into());
        self
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn roster(&self) -> &[StaffMember] {
        &self.roster
    }

    pub fn publications(&self) -> &[PublicationRecord] {
        &self.publications
    }

    pub fn census_date(&self) -> Option<&str> {
        self.census_date.as_deref()
    }

    pub fn staff(&self, id: &ResearcherId) -> Option<&StaffMember> {
        self.staff_index.get(id).map(|&i| &self.roster[i])
    }

    /// Whether a rostered researcher appears on at least one byline.
    pub fn is_publishing(&self, id: &ResearcherId) -> bool {
        self.staff_index
            .get(id)
            .is_some_and(|&i| self.publishing[i])
    }

    /// `(university, sds)` of the rostered researcher in `slot`, if any.
    pub fn slot_unit(&self, slot: &AuthorSlot) -> Option<(&UniversityId, &SdsCode)> {
        let m = self.staff(slot.researcher_id.as_ref()?)?;
        Some((&m.university_id, &m.sds_code))
    }

    /// Every `(university, sds)` pair with at least one staff member.
    pub fn units(&self) -> impl Iterator<Item = (&UniversityId, &SdsCode)> {
        self.unit_staff.keys().map(|(u, s)| (u, s))
    }

    /// Publications co-authored by staff of `(university, sds)`, in corpus order.
    pub fn unit_publications<'a>(
        &'a self,
        university: &UniversityId,
        sds: &SdsCode,
    ) -> impl Iterator<Item = &'a PublicationRecord> + 'a {
        self.unit_pubs
            .get(&(university.clone(), sds.clone()))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.publications[i])
    }

    /// Distinct publication count `N_s` of `(university, sds)`.
    pub fn unit_publication_count(&self, university: &UniversityId, sds: &SdsCode) -> usize {
        self.unit_pubs
            .get(&(university.clone(), sds.clone()))
            .map_or(0, Vec::len)
    }

    pub fn universities(&self) -> BTreeSet<&UniversityId> {
        self.roster.iter().map(|m| &m.university_id).collect()
    }

    /// Staff of `(university, sds)` under the given counting basis.
    pub fn staff_count(
        &self,
        university: &UniversityId,
        sds: &SdsCode,
        basis: StaffBasis,
    ) -> usize {
        let Some(members) = self.unit_staff.get(&(university.clone(), sds.clone())) else {
            return 0;
        };
        match basis {
            StaffBasis::FullRoster => members.len(),
            StaffBasis::PublishingOnly => members.iter().filter(|&&i| self.publishing[i]).count(),
        }
    }

    /// Distinct roster members of `university` in a field or discipline.
    pub fn research_staff_count(
        &self,
        university: &UniversityId,
        scope: &Scope,
    ) -> Result<usize, CorpusError> {
        self.research_staff_count_with(university, scope, StaffBasis::FullRoster)
    }

    pub fn research_staff_count_with(
        &self,
        university: &UniversityId,
        scope: &Scope,
        basis: StaffBasis,
    ) -> Result<usize, CorpusError> {
        match scope {
            Scope::Sds(sds) => {
                if !self.taxonomy.contains_sds(sds) {
                    return Err(CorpusError::UnknownScope(sds.to_string()));
                }
                Ok(self.staff_count(university, sds, basis))
            }
            Scope::Uda(uda) => {
                if !self.taxonomy.udas().contains(uda) {
                    return Err(CorpusError::UnknownScope(uda.to_string()));
                }
                Ok(self
                    .taxonomy
                    .sds_in(uda)
                    .map(|s| self.staff_count(university, s, basis))
                    .sum())
            }
        }
    }

    /// `(university, sds)` pairs with non-nil output (at least one
    /// publication) or non-nil impact (at least one cited publication).
    pub fn non_nil_subset(&self, basis: Basis) -> BTreeSet<(UniversityId, SdsCode)> {
        self.unit_pubs
            .iter()
            .filter(|(_, pubs)| match basis {
                Basis::Output => !pubs.is_empty(),
                Basis::Impact => pubs.iter().any(|&i| self.publications[i].citations >= 1),
            })
            .map(|(k, _)| k.clone())
            .collect()
    }
}

fn check_byline(
    p: &mut PublicationRecord,
    roster: &[StaffMember],
    staff_index: &HashMap<ResearcherId, usize>,
    violations: &mut Vec<Violation>,
) {
    let pub_id = &p.pub_id;
    if p.byline.is_empty() {
        violations.push(Violation::EmptyByline {
            pub_id: pub_id.clone(),
        });
        return;
    }
    p.byline.sort_by_key(|s| s.position);

    let mut expected = 1u32;
    for slot in &p.byline {
        if slot.position < expected {
            violations.push(Violation::DuplicatePosition {
                pub_id: pub_id.clone(),
                position: slot.position,
            });
            continue;
        }
        while expected < slot.position {
            violations.push(Violation::PositionGap {
                pub_id: pub_id.clone(),
                missing: expected,
            });
            expected += 1;
        }
        expected += 1;
    }

    let mut authors = HashSet::new();
    for slot in p.byline.iter_mut() {
        let Some(rid) = &slot.researcher_id else {
            continue;
        };
        if !authors.insert(rid.clone()) {
            violations.push(Violation::RepeatedAuthor {
                pub_id: pub_id.clone(),
                researcher_id: rid.clone(),
            });
        }
        let Some(&si) = staff_index.get(rid) else {
            violations.push(Violation::UnresolvedResearcher {
                pub_id: pub_id.clone(),
                researcher_id: rid.clone(),
            });
            continue;
        };
        let rostered = &roster[si].university_id;
        match &slot.university_id {
            None => slot.university_id = Some(rostered.clone()),
            Some(u) if u != rostered => violations.push(Violation::AffiliationMismatch {
                pub_id: pub_id.clone(),
                researcher_id: rid.clone(),
                roster: rostered.clone(),
                byline: u.clone(),
            }),
            Some(_) => {}
        }
    }
}
