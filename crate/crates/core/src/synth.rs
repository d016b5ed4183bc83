//! Seeded synthetic corpora.
//!
//! Generator `chacha8-v1`: a single `ChaCha8Rng` seeded with
//! `seed_from_u64(seed)` drives every draw, in this order:
//!
//! 1. roster: for each university, for each field in `fields` order, a
//!    presence coin, then a uniform staff count;
//! 2. publications: for each researcher in roster order, a Poisson count of
//!    led publications; for each, the byline length, the lead's end
//!    (first or last), the collaboration class, the other end, the interior
//!    slots, the year, the categories and the citation count.
//!
//! Byline length is `min + Poisson(mean - min)`, redrawn while above `max`.
//! Citations are negative binomial: `Poisson(Gamma(k, mean / k))` with
//! `k = dispersion`. Reproducibility is promised at the level of the
//! exported files, not the random stream.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    write_corpus, AuthorSlot, Corpus, CorpusError, PublicationRecord, StaffMember, Taxonomy,
};
use crate::ids::{PubId, ResearcherId, UniversityId};

pub const GENERATOR: &str = "chacha8-v1";
pub const PARAMS_FILE: &str = "params.json";

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub sds_code: String,
    pub uda_code: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaffRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BylineLength {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CitationModel {
    pub mean: f64,
    /// Negative-binomial shape; smaller is more skewed.
    pub dispersion: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub first: i32,
    pub last: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub seed: u64,
    pub n_universities: usize,
    pub fields: Vec<FieldSpec>,
    /// Chance that a university has staff in a given field.
    pub presence_probability: f64,
    pub staff_per_unit: StaffRange,
    /// Mean number of publications each researcher leads.
    pub pubs_per_researcher_mean: f64,
    pub byline_length: BylineLength,
    /// Chance that the two byline ends share the lead's university.
    pub intramural_probability: f64,
    /// Chance that a non-lead slot holds a non-roster author.
    pub external_author_rate: f64,
    /// Chance that a roster co-author in an interior slot comes from the
    /// lead's own university.
    pub local_coauthor_probability: f64,
    pub citations: CitationModel,
    pub years: YearRange,
    /// Subject categories available to each discipline.
    pub categories_per_uda: usize,
    pub categories_per_pub: usize,
    pub census_date: Option<String>,
}

/// Life-science fields: BIO/01..19 and MED/01..50 without MED/02, 43, 47, 48.
pub fn default_fields() -> Vec<FieldSpec> {
    let bio = (1..=19).map(|i| FieldSpec {
        sds_code: format!("BIO/{i:02}"),
        uda_code: "Biology".into(),
    });
    let med = (1..=50)
        .filter(|i| ![2, 43, 47, 48].contains(i))
        .map(|i| FieldSpec {
            sds_code: format!("MED/{i:02}"),
            uda_code: "Medicine".into(),
        });
    bio.chain(med).collect()
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 2010,
            n_universities: 64,
            fields: default_fields(),
            presence_probability: 0.55,
            staff_per_unit: StaffRange { min: 1, max: 11 },
            pubs_per_researcher_mean: 5.1,
            byline_length: BylineLength {
                min: 1,
                max: 40,
                mean: 6.0,
            },
            intramural_probability: 0.6,
            external_author_rate: 0.3,
            local_coauthor_probability: 0.5,
            citations: CitationModel {
                mean: 8.0,
                dispersion: 0.8,
            },
            years: YearRange {
                first: 2004,
                last: 2008,
            },
            categories_per_uda: 12,
            categories_per_pub: 1,
            census_date: Some("2009-06-30".into()),
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidParams(m));
        let rate = |name: &str, v: f64| -> Result<(), SynthError> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                bad(format!("{name} must lie in [0, 1], got {v}"))
            }
        };
        rate("presence_probability", self.presence_probability)?;
        rate("intramural_probability", self.intramural_probability)?;
        rate("external_author_rate", self.external_author_rate)?;
        rate(
            "local_coauthor_probability",
            self.local_coauthor_probability,
        )?;

        if self.n_universities == 0 {
            return bad("n_universities must be at least 1".into());
        }
        if self.fields.is_empty() {
            return bad("fields must not be empty".into());
        }
        let mut seen = BTreeSet::new();
        for f in &self.fields {
            if !seen.insert(&f.sds_code) {
                return bad(format!("duplicate sds_code {}", f.sds_code));
            }
            if f.uda_code.contains(';') {
                return bad(format!("uda_code {:?} must not contain ';'", f.uda_code));
            }
        }
        let s = self.staff_per_unit;
        if s.max < s.min || s.max == 0 {
            return bad(format!(
                "staff_per_unit range [{}, {}] is empty",
                s.min, s.max
            ));
        }
        if !(self.pubs_per_researcher_mean.is_finite() && self.pubs_per_researcher_mean >= 0.0) {
            return bad("pubs_per_researcher_mean must be finite and non-negative".into());
        }
        let b = self.byline_length;
        if b.min < 1 {
            return bad("byline_length.min must be at least 1".into());
        }
        if b.max < b.min {
            return bad(format!(
                "byline_length.max {} is below min {}",
                b.max, b.min
            ));
        }
        if !(b.mean >= b.min as f64 && b.mean <= b.max as f64) {
            return bad(format!(
                "byline_length.mean {} outside [{}, {}]",
                b.mean, b.min, b.max
            ));
        }
        let c = self.citations;
        if !(c.mean.is_finite() && c.mean >= 0.0) {
            return bad("citations.mean must be finite and non-negative".into());
        }
        if !(c.dispersion.is_finite() && c.dispersion > 0.0) {
            return bad("citations.dispersion must be positive".into());
        }
        if self.years.last < self.years.first {
            return bad(format!(
                "year range {}..{} is empty",
                self.years.first, self.years.last
            ));
        }
        if self.categories_per_uda == 0 || self.categories_per_pub == 0 {
            return bad("category counts must be at least 1".into());
        }
        if self.categories_per_pub > self.categories_per_uda {
            return bad("categories_per_pub exceeds categories_per_uda".into());
        }
        Ok(())
    }

    pub fn expected_staff(&self) -> f64 {
        let s = self.staff_per_unit;
        let mean_staff = (s.min + s.max) as f64 / 2.0;
        self.n_universities as f64
            * self.fields.len() as f64
            * self.presence_probability
            * mean_staff
    }

    pub fn expected_publications(&self) -> f64 {
        self.expected_staff() * self.pubs_per_researcher_mean
    }

    /// Sets the per-researcher rate so the expected corpus size is `target`.
    pub fn with_target_publications(mut self, target: f64) -> Self {
        let staff = self.expected_staff();
        if staff > 0.0 {
            self.pubs_per_researcher_mean = target / staff;
        }
        self
    }
}

struct Draws {
    led: Option<Poisson<f64>>,
    byline_extra: Option<Poisson<f64>>,
    citation_rate: Option<Gamma<f64>>,
}

impl Draws {
    fn new(p: &SynthParams) -> Result<Self, SynthError> {
        let err = |e: &dyn std::fmt::Display| SynthError::InvalidParams(e.to_string());
        let poisson = |lambda: f64| -> Result<Option<Poisson<f64>>, SynthError> {
            if lambda > 0.0 {
                Poisson::new(lambda).map(Some).map_err(|e| err(&e))
            } else {
                Ok(None)
            }
        };
        let c = p.citations;
        Ok(Self {
            led: poisson(p.pubs_per_researcher_mean)?,
            byline_extra: poisson(p.byline_length.mean - p.byline_length.min as f64)?,
            citation_rate: if c.mean > 0.0 {
                Some(Gamma::new(c.dispersion, c.mean / c.dispersion).map_err(|e| err(&e))?)
            } else {
                None
            },
        })
    }
}

fn count(d: &Option<Poisson<f64>>, rng: &mut ChaCha8Rng) -> usize {
    d.as_ref().map_or(0, |d| d.sample(rng) as usize)
}

struct Builder<'a> {
    params: &'a SynthParams,
    roster: &'a [StaffMember],
    by_university: Vec<Vec<usize>>,
    university_ids: Vec<UniversityId>,
}

impl Builder<'_> {
    /// A roster member of university `u` not already on the byline.
    fn pick_staff(&self, u: usize, taken: &BTreeSet<usize>, rng: &mut ChaCha8Rng) -> Option<usize> {
        let pool = &self.by_university[u];
        for _ in 0..8 {
            let &i = pool.choose(rng)?;
            if !taken.contains(&i) {
                return Some(i);
            }
        }
        None
    }

    fn other_university(&self, lead: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
        let n = self.by_university.len();
        if n < 2 {
            return None;
        }
        let k = rng.random_range(0..n - 1);
        Some(if k >= lead { k + 1 } else { k })
    }

    fn staff_slot(&self, position: u32, i: usize) -> AuthorSlot {
        let m = &self.roster[i];
        AuthorSlot {
            position,
            researcher_id: Some(m.researcher_id.clone()),
            university_id: Some(m.university_id.clone()),
        }
    }

    fn roster_or_external(
        &self,
        position: u32,
        u: Option<usize>,
        taken: &mut BTreeSet<usize>,
        rng: &mut ChaCha8Rng,
    ) -> AuthorSlot {
        match u.and_then(|u| self.pick_staff(u, taken, rng)) {
            Some(i) => {
                taken.insert(i);
                self.staff_slot(position, i)
            }
            None => AuthorSlot::external(position, None),
        }
    }

    fn byline(&self, lead: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<AuthorSlot> {
        let p = self.params;
        let lead_u = self.university_of(lead);
        let mut taken = BTreeSet::from([lead]);
        let mut slots: Vec<Option<AuthorSlot>> = vec![None; n];
        let lead_pos = if n > 1 && rng.random_bool(0.5) {
            n - 1
        } else {
            0
        };
        slots[lead_pos] = Some(self.staff_slot(lead_pos as u32 + 1, lead));
        if n > 1 {
            let other = n - 1 - lead_pos;
            let pos = other as u32 + 1;
            let intramural = rng.random_bool(p.intramural_probability);
            let external = rng.random_bool(p.external_author_rate);
            slots[other] = Some(if intramural {
                // a non-roster colleague still carries the lead's affiliation
                match (!external)
                    .then(|| self.pick_staff(lead_u, &taken, rng))
                    .flatten()
                {
                    Some(i) => {
                        taken.insert(i);
                        self.staff_slot(pos, i)
                    }
                    None => AuthorSlot {
                        position: pos,
                        researcher_id: None,
                        university_id: Some(self.university_ids[lead_u].clone()),
                    },
                }
            } else if external {
                AuthorSlot::external(pos, None)
            } else {
                let u = self.other_university(lead_u, rng);
                self.roster_or_external(pos, u, &mut taken, rng)
            });
        }
        for (k, slot) in slots.iter_mut().enumerate() {
            if slot.is_some() {
                continue;
            }
            let pos = k as u32 + 1;
            *slot = Some(if rng.random_bool(p.external_author_rate) {
                AuthorSlot::external(pos, None)
            } else {
                let u = if rng.random_bool(p.local_coauthor_probability) {
                    Some(lead_u)
                } else {
                    self.other_university(lead_u, rng)
                };
                self.roster_or_external(pos, u, &mut taken, rng)
            });
        }
        slots
            .into_iter()
            .map(|s| s.expect("every slot filled"))
            .collect()
    }

    fn university_of(&self, i: usize) -> usize {
        let id = &self.roster[i].university_id;
        self.university_ids
            .binary_search(id)
            .expect("roster university")
    }
}

pub fn generate_corpus(params: &SynthParams) -> Result<Corpus, SynthError> {
    params.validate()?;
    let draws = Draws::new(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let width = params.n_universities.to_string().len().max(2);
    let university_ids: Vec<UniversityId> = (1..=params.n_universities)
        .map(|i| UniversityId::new(format!("U{i:0width$}")))
        .collect();

    let taxonomy = Taxonomy::new(
        params
            .fields
            .iter()
            .map(|f| (f.sds_code.as_str().into(), f.uda_code.as_str().into())),
    )?;

    let mut roster = Vec::new();
    let mut by_university = vec![Vec::new(); params.n_universities];
    let s = params.staff_per_unit;
    for (ui, uid) in university_ids.iter().enumerate() {
        for f in &params.fields {
            if !rng.random_bool(params.presence_probability) {
                continue;
            }
            for _ in 0..rng.random_range(s.min..=s.max) {
                by_university[ui].push(roster.len());
                roster.push(StaffMember {
                    researcher_id: ResearcherId::new(format!("R{:06}", roster.len() + 1)),
                    university_id: uid.clone(),
                    sds_code: f.sds_code.as_str().into(),
                });
            }
        }
    }

    let uda_index: Vec<usize> = {
        let udas: Vec<&str> = taxonomy.udas().iter().map(|u| u.as_str()).collect();
        roster
            .iter()
            .map(|m| {
                let uda = taxonomy.uda_of(&m.sds_code).expect("roster field");
                udas.binary_search(&uda.as_str()).expect("taxonomy uda")
            })
            .collect()
    };
    let categories: Vec<Vec<String>> = taxonomy
        .udas()
        .iter()
        .map(|u| {
            (1..=params.categories_per_uda)
                .map(|i| format!("{u}-{i:02}"))
                .collect()
        })
        .collect();

    let builder = Builder {
        params,
        roster: &roster,
        by_university,
        university_ids,
    };
    let b = params.byline_length;
    let mut publications = Vec::new();
    for lead in 0..roster.len() {
        for _ in 0..count(&draws.led, &mut rng) {
            let n = loop {
                let n = b.min + count(&draws.byline_extra, &mut rng);
                if n <= b.max {
                    break n;
                }
            };
            let byline = builder.byline(lead, n, &mut rng);
            let year = rng.random_range(params.years.first..=params.years.last);
            let pool = &categories[uda_index[lead]];
            let mut cats: Vec<String> = pool
                .choose_multiple(&mut rng, params.categories_per_pub)
                .cloned()
                .collect();
            cats.sort();
            let citations = match &draws.citation_rate {
                Some(g) => {
                    let lambda = g.sample(&mut rng);
                    if lambda > 0.0 {
                        Poisson::new(lambda).map_or(0, |d| d.sample(&mut rng) as u64)
                    } else {
                        0
                    }
                }
                None => 0,
            };
            publications.push(PublicationRecord {
                pub_id: PubId::new(format!("P{:07}", publications.len() + 1)),
                year,
                categories: cats,
                citations,
                byline,
            });
        }
    }

    let corpus = Corpus::new(taxonomy, roster, publications)?;
    Ok(match &params.census_date {
        Some(d) => corpus.with_census_date(d.clone()),
        None => corpus,
    })
}

#[derive(Serialize)]
struct ParamsRecord<'a> {
    generator: &'a str,
    params: &'a SynthParams,
}

/// Writes the four corpus files plus `params.json`.
pub fn export_corpus(corpus: &Corpus, params: &SynthParams, dir: &Path) -> std::io::Result<()> {
    write_corpus(corpus, dir)?;
    let record = ParamsRecord {
        generator: GENERATOR,
        params,
    };
    let mut json = serde_json::to_string_pretty(&record).map_err(std::io::Error::other)?;
    json.push('\n');
    std::fs::write(dir.join(PARAMS_FILE), json)
}
