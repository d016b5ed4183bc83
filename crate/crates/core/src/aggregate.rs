//! Discipline-level aggregation.
//!
//! A university's discipline score is the staff-weighted sum of its field
//! scores, each first divided by the national mean of that field:
//!
//! ```text
//! value(u, uda) = sum_s (value(u, s) / mean_s) * (RS_s / RS_uda)
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Basis, Taxonomy};
use crate::ids::{SdsCode, UdaCode, UniversityId};
use crate::indicators::{
    percentile_scale, Indicator, IndicatorRow, IndicatorTable, IndicatorValues,
};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AggregateError {
    #[error("no national average of {indicator} for {sds}")]
    MissingAverage { sds: SdsCode, indicator: Indicator },
    #[error("{university} has no research staff in {uda}")]
    NoStaff {
        university: UniversityId,
        uda: UdaCode,
    },
}

/// Which universities enter a field's national mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageSubset {
    /// Units with non-nil output (output indicators) or non-nil impact
    /// (impact indicators).
    #[default]
    NonNil,
    /// Every unit with staff, nil ones contributing zero.
    AllStaffed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NationalAverages<T> {
    means: BTreeMap<(SdsCode, Indicator), T>,
    excluded: Vec<(SdsCode, Indicator)>,
}

impl<T: Real> NationalAverages<T> {
    pub fn get(&self, sds: &SdsCode, indicator: Indicator) -> Option<T> {
        self.means.get(&(sds.clone(), indicator)).copied()
    }

    /// Field/indicator pairs left without a mean (empty subset or zero mean).
    pub fn excluded(&self) -> &[(SdsCode, Indicator)] {
        &self.excluded
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(SdsCode, Indicator), &T)> {
        self.means.iter()
    }
}

pub fn national_averages<T: Real>(
    table: &IndicatorTable<T>,
    subset: AverageSubset,
) -> NationalAverages<T> {
    let mut means = BTreeMap::new();
    let mut excluded = Vec::new();
    for sds in table.fields() {
        for ind in Indicator::ALL {
            let vals: Vec<T> = table
                .rows_in(sds)
                .filter(|r| subset == AverageSubset::AllStaffed || r.in_subset(ind.basis()))
                .map(|r| r.values.get(ind))
                .collect();
            let mean = if vals.is_empty() {
                None
            } else {
                let sum = vals.iter().fold(T::zero(), |a, &b| a + b);
                Some(sum / T::from_count(vals.len()))
            };
            match mean {
                Some(m) if m > T::zero() => {
                    means.insert((sds.clone(), ind), m);
                }
                _ => {
                    log::warn!(
                        "no usable national mean of {ind} in {sds}; field left out of aggregation"
                    );
                    excluded.push((sds.clone(), ind));
                }
            }
        }
    }
    NationalAverages { means, excluded }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UdaIndicatorRow<T> {
    pub university: UniversityId,
    pub uda: UdaCode,
    /// Fields of the university in the discipline (`N_u`).
    pub n_sds: usize,
    /// `RS_u`, summed over the included fields.
    pub staff: usize,
    pub output_nonnil: bool,
    pub impact_nonnil: bool,
    pub values: IndicatorValues<T>,
    pub percentiles: [Option<T>; 6],
}

impl<T: Real> UdaIndicatorRow<T> {
    pub fn in_subset(&self, basis: Basis) -> bool {
        match basis {
            Basis::Output => self.output_nonnil,
            Basis::Impact => self.impact_nonnil,
        }
    }
}

fn university_rows<'a, T: Real>(
    university: &'a UniversityId,
    uda: &'a UdaCode,
    table: &'a IndicatorTable<T>,
    taxonomy: &'a Taxonomy,
) -> impl Iterator<Item = &'a IndicatorRow<T>> + 'a {
    taxonomy
        .sds_in(uda)
        .filter_map(move |s| table.get(university, s))
}

/// `RS_s / RS_u` for each of the university's fields in the discipline.
pub fn staff_shares<T: Real>(
    university: &UniversityId,
    uda: &UdaCode,
    table: &IndicatorTable<T>,
    taxonomy: &Taxonomy,
) -> Vec<(SdsCode, T)> {
    let rows: Vec<_> = university_rows(university, uda, table, taxonomy).collect();
    let total: usize = rows.iter().map(|r| r.staff).sum();
    if total == 0 {
        return Vec::new();
    }
    let total = T::from_count(total);
    rows.iter()
        .map(|r| (r.sds.clone(), T::from_count(r.staff) / total))
        .collect()
}

pub fn uda_indicator<T: Real>(
    university: &UniversityId,
    uda: &UdaCode,
    table: &IndicatorTable<T>,
    averages: &NationalAverages<T>,
    taxonomy: &Taxonomy,
) -> Result<UdaIndicatorRow<T>, AggregateError> {
    aggregate_row(university, uda, table, averages, taxonomy, true)
}

/// With `strict` unset, a field without a national mean contributes zero.
/// A mean is only missing when every value in the field is zero.
fn aggregate_row<T: Real>(
    university: &UniversityId,
    uda: &UdaCode,
    table: &IndicatorTable<T>,
    averages: &NationalAverages<T>,
    taxonomy: &Taxonomy,
    strict: bool,
) -> Result<UdaIndicatorRow<T>, AggregateError> {
    let rows: Vec<_> = university_rows(university, uda, table, taxonomy).collect();
    let staff: usize = rows.iter().map(|r| r.staff).sum();
    if staff == 0 {
        return Err(AggregateError::NoStaff {
            university: university.clone(),
            uda: uda.clone(),
        });
    }
    let rs_u = T::from_count(staff);
    let mut values = IndicatorValues([T::zero(); 6]);
    for ind in Indicator::ALL {
        let mut total = T::zero();
        for r in &rows {
            let Some(mean) = averages.get(&r.sds, ind) else {
                if strict {
                    return Err(AggregateError::MissingAverage {
                        sds: r.sds.clone(),
                        indicator: ind,
                    });
                }
                debug_assert!(r.values.get(ind) == T::zero());
                continue;
            };
            total = total + (r.values.get(ind) / mean) * (T::from_count(r.staff) / rs_u);
        }
        values.set(ind, total);
    }
    Ok(UdaIndicatorRow {
        university: university.clone(),
        uda: uda.clone(),
        n_sds: rows.len(),
        staff,
        output_nonnil: rows.iter().any(|r| r.in_subset(Basis::Output)),
        impact_nonnil: rows.iter().any(|r| r.in_subset(Basis::Impact)),
        values,
        percentiles: [None; 6],
    })
}

/// Discipline rows sorted by discipline then university.
#[derive(Clone, Debug, PartialEq)]
pub struct UdaTable<T> {
    rows: Vec<UdaIndicatorRow<T>>,
}

impl<T: Real> UdaTable<T> {
    pub fn rows(&self) -> &[UdaIndicatorRow<T>] {
        &self.rows
    }

    pub fn get(&self, university: &UniversityId, uda: &UdaCode) -> Option<&UdaIndicatorRow<T>> {
        self.rows
            .iter()
            .find(|r| &r.university == university && &r.uda == uda)
    }
}

/// Aggregates every university with staff in each discipline, then assigns
/// percentiles within each discipline over units with non-nil output.
/// Fields listed in [`NationalAverages::excluded`] contribute zero.
pub fn compute_uda_table<T: Real>(
    table: &IndicatorTable<T>,
    averages: &NationalAverages<T>,
    taxonomy: &Taxonomy,
) -> Result<UdaTable<T>, AggregateError> {
    let mut rows = Vec::new();
    for uda in taxonomy.udas() {
        let mut universities: Vec<&UniversityId> = taxonomy
            .sds_in(uda)
            .flat_map(|s| table.rows_in(s).map(|r| &r.university))
            .collect();
        universities.sort();
        universities.dedup();
        let start = rows.len();
        for u in universities {
            rows.push(aggregate_row(u, uda, table, averages, taxonomy, false)?);
        }
        let block = &mut rows[start..];
        for ind in Indicator::ALL {
            let vals: Vec<(usize, T)> = block
                .iter()
                .enumerate()
                .filter(|(_, r)| r.output_nonnil)
                .map(|(i, r)| (i, r.values.get(ind)))
                .collect();
            for (i, p) in percentile_scale(&vals) {
                block[i].percentiles[ind.index()] = Some(p);
            }
        }
    }
    Ok(UdaTable { rows })
}
