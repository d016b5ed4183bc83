//! Report files. Every CSV opens with `#` lines carrying the tool version,
//! the config digest and the corpus digest; the matching JSON file holds the
//! same digests and the same rows, field for field.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::aggregate::UdaTable;
use crate::corpus::{canonical_bytes, Corpus};
use crate::indicators::IndicatorTable;
use crate::pipeline::{PairReport, QuartileRow};
use crate::scalar::Real;

pub const TOOL: &str = concat!("bylinerank ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub corpus_sha256: String,
}

pub fn corpus_digest(corpus: &Corpus) -> String {
    hex::encode(Sha256::digest(canonical_bytes(corpus)))
}

impl Provenance {
    fn header(&self) -> String {
        format!(
            "# {TOOL}\n# config_sha256: {}\n# corpus_sha256: {}\n",
            self.config_sha256, self.corpus_sha256
        )
    }
}

fn csv_bytes<R: Serialize>(prov: &Provenance, rows: &[R], empty_header: &[&str]) -> Vec<u8> {
    let mut out = prov.header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        if rows.is_empty() {
            // serde-driven headers need a row to infer from
            w.write_record(empty_header).expect("in-memory write");
        }
        for r in rows {
            w.serialize(r).expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    out
}

#[derive(Serialize)]
struct JsonDoc<'a, R> {
    tool: &'a str,
    #[serde(flatten)]
    provenance: &'a Provenance,
    rows: &'a [R],
}

fn json_bytes<R: Serialize>(prov: &Provenance, rows: &[R]) -> Vec<u8> {
    let doc = JsonDoc {
        tool: TOOL,
        provenance: prov,
        rows,
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("rows serialize");
    out.push(b'\n');
    out
}

/// CSV and JSON renderings of one table.
pub struct Rendered {
    pub csv: Vec<u8>,
    pub json: Vec<u8>,
}

fn render<R: Serialize>(prov: &Provenance, rows: &[R], header: &[&str]) -> Rendered {
    Rendered {
        csv: csv_bytes(prov, rows, header),
        json: json_bytes(prov, rows),
    }
}

#[derive(Serialize)]
struct SdsRow<'a, T> {
    university_id: &'a str,
    sds_code: &'a str,
    wfo: T,
    fo: T,
    o: T,
    wfi: T,
    fi: T,
    i: T,
    p_wfo: Option<T>,
    p_fo: Option<T>,
    p_o: Option<T>,
    p_wfi: Option<T>,
    p_fi: Option<T>,
    p_i: Option<T>,
    rs: usize,
    publications: usize,
    cited_publications: usize,
}

const SDS_HEADER: [&str; 17] = [
    "university_id",
    "sds_code",
    "wfo",
    "fo",
    "o",
    "wfi",
    "fi",
    "i",
    "p_wfo",
    "p_fo",
    "p_o",
    "p_wfi",
    "p_fi",
    "p_i",
    "rs",
    "publications",
    "cited_publications",
];

/// Field table restricted to units with non-nil output.
pub fn sds_table<T: Real + Serialize>(prov: &Provenance, table: &IndicatorTable<T>) -> Rendered {
    let rows: Vec<_> = table
        .rows()
        .iter()
        .filter(|r| r.publications > 0)
        .map(|r| {
            let [wfo, fo, o, wfi, fi, i] = r.values.0;
            let [p_wfo, p_fo, p_o, p_wfi, p_fi, p_i] = r.percentiles;
            SdsRow {
                university_id: r.university.as_str(),
                sds_code: r.sds.as_str(),
                wfo,
                fo,
                o,
                wfi,
                fi,
                i,
                p_wfo,
                p_fo,
                p_o,
                p_wfi,
                p_fi,
                p_i,
                rs: r.staff,
                publications: r.publications,
                cited_publications: r.cited_publications,
            }
        })
        .collect();
    render(prov, &rows, &SDS_HEADER)
}

#[derive(Serialize)]
struct UdaRow<'a, T> {
    university_id: &'a str,
    uda_code: &'a str,
    wfo: T,
    fo: T,
    o: T,
    wfi: T,
    fi: T,
    i: T,
    p_wfo: Option<T>,
    p_fo: Option<T>,
    p_o: Option<T>,
    p_wfi: Option<T>,
    p_fi: Option<T>,
    p_i: Option<T>,
    n_sds: usize,
    rs_u: usize,
}

const UDA_HEADER: [&str; 16] = [
    "university_id",
    "uda_code",
    "wfo",
    "fo",
    "o",
    "wfi",
    "fi",
    "i",
    "p_wfo",
    "p_fo",
    "p_o",
    "p_wfi",
    "p_fi",
    "p_i",
    "n_sds",
    "rs_u",
];

/// Discipline table restricted to units with non-nil output.
pub fn uda_table<T: Real + Serialize>(prov: &Provenance, table: &UdaTable<T>) -> Rendered {
    let rows: Vec<_> = table
        .rows()
        .iter()
        .filter(|r| r.output_nonnil)
        .map(|r| {
            let [wfo, fo, o, wfi, fi, i] = r.values.0;
            let [p_wfo, p_fo, p_o, p_wfi, p_fi, p_i] = r.percentiles;
            UdaRow {
                university_id: r.university.as_str(),
                uda_code: r.uda.as_str(),
                wfo,
                fo,
                o,
                wfi,
                fi,
                i,
                p_wfo,
                p_fo,
                p_o,
                p_wfi,
                p_fi,
                p_i,
                n_sds: r.n_sds,
                rs_u: r.staff,
            }
        })
        .collect();
    render(prov, &rows, &UDA_HEADER)
}

#[derive(Serialize)]
struct CompareRow<'a, T> {
    scope: &'a str,
    group: Option<&'a str>,
    universities: usize,
    rho: Option<T>,
    shifted: usize,
    pct_shifted: T,
    avg_shift: T,
    max_shift: u8,
    total_shift: usize,
    shifted_ge2: usize,
    churn_pct: T,
}

const COMPARE_HEADER: [&str; 11] = [
    "scope",
    "group",
    "universities",
    "rho",
    "shifted",
    "pct_shifted",
    "avg_shift",
    "max_shift",
    "total_shift",
    "shifted_ge2",
    "churn_pct",
];

/// One row per scope of a pair comparison.
pub fn comparison<T: Real + Serialize>(prov: &Provenance, report: &PairReport<T>) -> Rendered {
    let rows: Vec<_> = report
        .scopes
        .iter()
        .map(|s| {
            let r = &s.report;
            CompareRow {
                scope: &r.scope,
                group: s.group.as_deref(),
                universities: r.universities,
                rho: r.rho,
                shifted: r.shifts.shifted,
                pct_shifted: r.shifts.pct_shifted,
                avg_shift: r.shifts.avg_shift,
                max_shift: r.shifts.max_shift,
                total_shift: r.shifts.total_shift,
                shifted_ge2: r.shifts.shifted_ge2,
                churn_pct: r.churn_pct,
            }
        })
        .collect();
    render(prov, &rows, &COMPARE_HEADER)
}

#[derive(Serialize)]
struct QuartileCsvRow<'a> {
    scope: &'a str,
    university_id: &'a str,
    q_wfo: Option<u8>,
    q_fo: Option<u8>,
    q_o: Option<u8>,
    q_wfi: Option<u8>,
    q_fi: Option<u8>,
    q_i: Option<u8>,
}

const QUARTILE_HEADER: [&str; 8] = [
    "scope",
    "university_id",
    "q_wfo",
    "q_fo",
    "q_o",
    "q_wfi",
    "q_fi",
    "q_i",
];

pub fn quartiles(prov: &Provenance, rows: &[QuartileRow]) -> Rendered {
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            let [q_wfo, q_fo, q_o, q_wfi, q_fi, q_i] = r.quartiles;
            QuartileCsvRow {
                scope: &r.scope,
                university_id: r.university.as_str(),
                q_wfo,
                q_fo,
                q_o,
                q_wfi,
                q_fi,
                q_i,
            }
        })
        .collect();
    render(prov, &rows, &QUARTILE_HEADER)
}

/// Pretty JSON with a trailing newline.
pub fn json_document<S: Serialize>(value: &S) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

/// Writes via a temporary sibling so readers never see half a file.
pub fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
