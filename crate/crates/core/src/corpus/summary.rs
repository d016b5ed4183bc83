use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::ids::{UdaCode, UniversityId};

/// Dataset counts for one discipline (or the deduplicated total).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UdaSummary {
    pub sds_count: usize,
    /// Full roster headcount.
    pub staff: usize,
    /// Staff with at least one publication.
    pub publishing_staff: usize,
    /// Publications with at least one author from the discipline.
    pub publications: usize,
    pub citations: u64,
    /// Universities with non-nil output.
    pub universities_output: usize,
    /// Universities with non-nil impact.
    pub universities_impact: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub per_uda: BTreeMap<UdaCode, UdaSummary>,
    /// Cross-discipline totals; a publication co-authored from two
    /// disciplines is counted once here and once in each discipline.
    pub total: UdaSummary,
}

#[derive(Default)]
struct Acc<'a> {
    pubs: BTreeSet<usize>,
    out_unis: BTreeSet<&'a UniversityId>,
    imp_unis: BTreeSet<&'a UniversityId>,
}

impl<'a> Acc<'a> {
    fn add(&mut self, pi: usize, uni: &'a UniversityId, cited: bool) {
        self.pubs.insert(pi);
        self.out_unis.insert(uni);
        if cited {
            self.imp_unis.insert(uni);
        }
    }

    fn finish(self, corpus: &Corpus, into: &mut UdaSummary) {
        into.publications = self.pubs.len();
        into.citations = self
            .pubs
            .iter()
            .map(|&i| corpus.publications()[i].citations)
            .sum();
        into.universities_output = self.out_unis.len();
        into.universities_impact = self.imp_unis.len();
    }
}

impl Corpus {
    pub fn summarize(&self) -> CorpusSummary {
        let mut per_uda: BTreeMap<UdaCode, UdaSummary> = self
            .taxonomy()
            .udas()
            .iter()
            .map(|u| (u.clone(), UdaSummary::default()))
            .collect();
        for (_, uda) in self.taxonomy().entries() {
            per_uda.get_mut(uda).expect("uda from taxonomy").sds_count += 1;
        }
        let mut total = UdaSummary {
            sds_count: self.taxonomy().len(),
            ..Default::default()
        };

        for m in self.roster() {
            let uda = self.taxonomy().uda_of(&m.sds_code).expect("validated");
            let s = per_uda.get_mut(uda).expect("uda from taxonomy");
            let publishing = self.is_publishing(&m.researcher_id);
            s.staff += 1;
            total.staff += 1;
            if publishing {
                s.publishing_staff += 1;
                total.publishing_staff += 1;
            }
        }

        let mut accs: BTreeMap<&UdaCode, Acc> = BTreeMap::new();
        let mut total_acc = Acc::default();
        for (pi, p) in self.publications().iter().enumerate() {
            let cited = p.citations >= 1;
            for slot in &p.byline {
                let Some((uni, sds)) = self.slot_unit(slot) else {
                    continue;
                };
                let uda = self.taxonomy().uda_of(sds).expect("validated");
                accs.entry(uda).or_default().add(pi, uni, cited);
                total_acc.add(pi, uni, cited);
            }
        }
        for (uda, acc) in accs {
            acc.finish(self, per_uda.get_mut(uda).expect("uda from taxonomy"));
        }
        total_acc.finish(self, &mut total);

        CorpusSummary { per_uda, total }
    }
}
