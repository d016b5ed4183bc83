//! Publication credit allocation under the three counting modes.
//!
//! Positional credit depends on whether the first and last authors share an
//! institution. Intramural bylines give each end `intramural_end` and split
//! the rest evenly over the interior. Extramural bylines give the ends
//! `extramural_end`, the second and second-last positions
//! `extramural_adjacent`, and split the rest over the remaining interior.
//!
//! Short bylines where roles collide keep one role per position (end beats
//! adjacent). When no interior position is left to absorb the residual, the
//! assigned weights are rescaled to sum to one.

use std::collections::BTreeMap;

use crate::corpus::{Corpus, PublicationRecord};
use crate::ids::{SdsCode, UniversityId};
use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CreditError {
    #[error("byline length must be at least 1")]
    EmptyByline,
    #[error("invalid credit scheme: {0}")]
    InvalidScheme(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CollaborationClass {
    Intramural,
    Extramural,
}

/// End and adjacent position weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositionRule<T> {
    pub intramural_end: T,
    pub extramural_end: T,
    pub extramural_adjacent: T,
}

impl<T: Field> Default for PositionRule<T> {
    fn default() -> Self {
        Self {
            intramural_end: T::ratio(40, 100),
            extramural_end: T::ratio(30, 100),
            extramural_adjacent: T::ratio(15, 100),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CreditScheme<T> {
    Positional(PositionRule<T>),
    /// Every author gets `1/n`; positional counting degenerates to plain
    /// fractional counting.
    Uniform,
}

impl<T: Field> Default for CreditScheme<T> {
    fn default() -> Self {
        CreditScheme::Positional(PositionRule::default())
    }
}

impl<T: Field> CreditScheme<T> {
    pub fn positional(
        intramural_end: T,
        extramural_end: T,
        extramural_adjacent: T,
    ) -> Result<Self, CreditError> {
        let s = CreditScheme::Positional(PositionRule {
            intramural_end,
            extramural_end,
            extramural_adjacent,
        });
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CreditError> {
        let CreditScheme::Positional(r) = self else {
            return Ok(());
        };
        let unit = |w: T| w >= T::zero() && w <= T::one();
        if !(unit(r.intramural_end) && unit(r.extramural_end) && unit(r.extramural_adjacent)) {
            return Err(CreditError::InvalidScheme(format!(
                "weights must lie in [0, 1]: {r:?}"
            )));
        }
        let two = T::one() + T::one();
        if two * r.intramural_end > T::one() {
            return Err(CreditError::InvalidScheme(
                "2 x intramural_end exceeds 1".into(),
            ));
        }
        if two * (r.extramural_end + r.extramural_adjacent) > T::one() {
            return Err(CreditError::InvalidScheme(
                "2 x (extramural_end + extramural_adjacent) exceeds 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-position credit fractions of one byline; sums to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T>(Vec<T>);

impl<T: Field> WeightVector<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, &w| acc + w)
    }

    fn uniform(n: usize) -> Self {
        let w = T::one() / T::from_count(n);
        Self(vec![w; n])
    }
}

/// Intramural iff the first and last slots carry the same known
/// university. A sole author is always intramural.
pub fn classify_collaboration(publication: &PublicationRecord) -> CollaborationClass {
    let byline = &publication.byline;
    if byline.len() <= 1 {
        return CollaborationClass::Intramural;
    }
    match (
        &byline[0].university_id,
        &byline[byline.len() - 1].university_id,
    ) {
        (Some(first), Some(last)) if first == last => CollaborationClass::Intramural,
        _ => CollaborationClass::Extramural,
    }
}

pub fn position_weights<T: Field>(
    n: usize,
    class: CollaborationClass,
    scheme: &CreditScheme<T>,
) -> Result<WeightVector<T>, CreditError> {
    if n == 0 {
        return Err(CreditError::EmptyByline);
    }
    let rule = match scheme {
        CreditScheme::Uniform => return Ok(WeightVector::uniform(n)),
        CreditScheme::Positional(r) => r,
    };

    let mut weights = vec![T::zero(); n];
    let mut has_role = vec![false; n];
    let (end, adjacent) = match class {
        CollaborationClass::Intramural => (rule.intramural_end, None),
        CollaborationClass::Extramural => (rule.extramural_end, Some(rule.extramural_adjacent)),
    };
    for i in [0, n - 1] {
        weights[i] = end;
        has_role[i] = true;
    }
    if let Some(adj) = adjacent {
        for i in [1, n.saturating_sub(2)] {
            if i < n && !has_role[i] {
                weights[i] = adj;
                has_role[i] = true;
            }
        }
    }

    let assigned = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    let interior = has_role.iter().filter(|r| !**r).count();
    if interior > 0 {
        let share = (T::one() - assigned) / T::from_count(interior);
        for (w, _) in weights.iter_mut().zip(&has_role).filter(|(_, r)| !**r) {
            *w = share;
        }
    } else if assigned > T::zero() {
        for w in &mut weights {
            *w = *w / assigned;
        }
    } else {
        return Ok(WeightVector::uniform(n));
    }
    Ok(WeightVector(weights))
}

fn publication_weights<T: Field>(
    publication: &PublicationRecord,
    scheme: &CreditScheme<T>,
) -> Option<WeightVector<T>> {
    position_weights(
        publication.byline.len(),
        classify_collaboration(publication),
        scheme,
    )
    .ok()
}

fn matches(
    corpus: &Corpus,
    slot: &crate::corpus::AuthorSlot,
    university: &UniversityId,
    sds: &SdsCode,
) -> bool {
    corpus
        .slot_unit(slot)
        .is_some_and(|(u, s)| u == university && s == sds)
}

/// Positional credit of `(university, sds)` staff on one publication.
pub fn weighted_fraction<T: Field>(
    publication: &PublicationRecord,
    corpus: &Corpus,
    university: &UniversityId,
    sds: &SdsCode,
    scheme: &CreditScheme<T>,
) -> T {
    let Some(weights) = publication_weights(publication, scheme) else {
        return T::zero();
    };
    publication
        .byline
        .iter()
        .zip(weights.as_slice())
        .filter(|(slot, _)| matches(corpus, slot, university, sds))
        .fold(T::zero(), |acc, (_, &w)| acc + w)
}

/// `k / n`: matching authors over byline length.
pub fn plain_fraction<T: Field>(
    publication: &PublicationRecord,
    corpus: &Corpus,
    university: &UniversityId,
    sds: &SdsCode,
) -> T {
    let n = publication.byline.len();
    if n == 0 {
        return T::zero();
    }
    let k = publication
        .byline
        .iter()
        .filter(|slot| matches(corpus, slot, university, sds))
        .count();
    T::from_count(k) / T::from_count(n)
}

/// How full counting treats several staff of one unit on a byline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FullCounting {
    /// One credit per publication and unit.
    #[default]
    PerInstitution,
    /// One credit per matching author.
    PerStaff,
}

pub fn full_share<T: Field>(
    publication: &PublicationRecord,
    corpus: &Corpus,
    university: &UniversityId,
    sds: &SdsCode,
    counting: FullCounting,
) -> T {
    let k = publication
        .byline
        .iter()
        .filter(|slot| matches(corpus, slot, university, sds))
        .count();
    match counting {
        FullCounting::PerInstitution if k > 0 => T::one(),
        FullCounting::PerInstitution => T::zero(),
        FullCounting::PerStaff => T::from_count(k),
    }
}

/// Credit of one unit on one publication under all three modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitShares<T> {
    pub weighted: T,
    pub plain: T,
    pub full: T,
    /// Matching authors on the byline.
    pub authors: usize,
}

/// Shares of every `(university, sds)` unit on the byline, computed in one
/// pass. Equivalent to calling the three per-unit functions for each unit.
pub fn unit_shares<'c, T: Field>(
    publication: &PublicationRecord,
    corpus: &'c Corpus,
    scheme: &CreditScheme<T>,
    counting: FullCounting,
) -> BTreeMap<(&'c UniversityId, &'c SdsCode), UnitShares<T>> {
    let mut out = BTreeMap::new();
    let Some(weights) = publication_weights(publication, scheme) else {
        return out;
    };
    let n = T::from_count(publication.byline.len());
    for (slot, &w) in publication.byline.iter().zip(weights.as_slice()) {
        let Some(unit) = corpus.slot_unit(slot) else {
            continue;
        };
        let e = out.entry(unit).or_insert(UnitShares {
            weighted: T::zero(),
            plain: T::zero(),
            full: T::zero(),
            authors: 0,
        });
        e.weighted = e.weighted + w;
        e.authors += 1;
    }
    for e in out.values_mut() {
        e.plain = T::from_count(e.authors) / n;
        e.full = match counting {
            FullCounting::PerInstitution => T::one(),
            FullCounting::PerStaff => T::from_count(e.authors),
        };
    }
    out
}
