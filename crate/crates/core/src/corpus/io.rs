//! CSV persistence of the four corpus files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{AuthorSlot, Corpus, CorpusError, PublicationRecord, StaffMember, Taxonomy, Violation};
use crate::ids::PubId;

pub const STAFF_FILE: &str = "staff.csv";
pub const PUBLICATIONS_FILE: &str = "publications.csv";
pub const BYLINE_FILE: &str = "byline.csv";
pub const TAXONOMY_FILE: &str = "taxonomy.csv";

const STAFF_HEADER: [&str; 3] = ["researcher_id", "university_id", "sds_code"];
const PUBLICATIONS_HEADER: [&str; 4] = ["pub_id", "year", "citations", "categories"];
const BYLINE_HEADER: [&str; 4] = ["pub_id", "position", "researcher_id", "university_id"];
const TAXONOMY_HEADER: [&str; 2] = ["sds_code", "uda_code"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusPaths {
    pub staff: PathBuf,
    pub publications: PathBuf,
    pub byline: PathBuf,
    pub taxonomy: PathBuf,
}

impl CorpusPaths {
    /// The four files under their conventional names in `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            staff: dir.join(STAFF_FILE),
            publications: dir.join(PUBLICATIONS_FILE),
            byline: dir.join(BYLINE_FILE),
            taxonomy: dir.join(TAXONOMY_FILE),
        }
    }
}

struct Row {
    line: u64,
    fields: Vec<String>,
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Reads `path`, returning fields in the order of `columns` regardless of
/// their order in the header.
fn read_table(path: &Path, columns: &[&str]) -> Result<Vec<Row>, CorpusError> {
    let label = file_label(path);
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let parse_err = |line: u64, message: String| CorpusError::Parse {
        file: label.clone(),
        line,
        message,
    };

    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let mut order = Vec::with_capacity(columns.len());
    for col in columns {
        let idx = headers
            .iter()
            .position(|h| h == *col)
            .ok_or_else(|| parse_err(1, format!("missing column {col:?}")))?;
        order.push(idx);
    }

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let fields = order
            .iter()
            .map(|&i| rec.get(i).unwrap_or("").to_owned())
            .collect();
        rows.push(Row { line, fields });
    }
    Ok(rows)
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    row: &Row,
    idx: usize,
    name: &str,
) -> Result<T, CorpusError>
where
    T::Err: std::fmt::Display,
{
    row.fields[idx].parse().map_err(|e| CorpusError::Parse {
        file: file_label(path),
        line: row.line,
        message: format!("bad {name} {:?}: {e}", row.fields[idx]),
    })
}

fn non_empty(s: &str) -> Option<&str> {
    (!s.is_empty()).then_some(s)
}

/// Loads and validates a corpus from its four CSV files.
pub fn load_corpus(paths: &CorpusPaths) -> Result<Corpus, CorpusError> {
    let taxonomy = Taxonomy::new(
        read_table(&paths.taxonomy, &TAXONOMY_HEADER)?
            .into_iter()
            .map(|r| (r.fields[0].as_str().into(), r.fields[1].as_str().into())),
    )?;

    let roster: Vec<StaffMember> = read_table(&paths.staff, &STAFF_HEADER)?
        .into_iter()
        .map(|r| StaffMember {
            researcher_id: r.fields[0].as_str().into(),
            university_id: r.fields[1].as_str().into(),
            sds_code: r.fields[2].as_str().into(),
        })
        .collect();

    let mut publications = Vec::new();
    for row in read_table(&paths.publications, &PUBLICATIONS_HEADER)? {
        let year = parse_field(&paths.publications, &row, 1, "year")?;
        let citations = parse_field(&paths.publications, &row, 2, "citations")?;
        let categories = row.fields[3]
            .split(';')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(str::to_owned)
            .collect();
        publications.push(PublicationRecord {
            pub_id: row.fields[0].as_str().into(),
            year,
            categories,
            citations,
            byline: Vec::new(),
        });
    }

    let mut slots: BTreeMap<PubId, Vec<AuthorSlot>> = BTreeMap::new();
    for row in read_table(&paths.byline, &BYLINE_HEADER)? {
        let position = parse_field(&paths.byline, &row, 1, "position")?;
        if position == 0 {
            return Err(CorpusError::Parse {
                file: file_label(&paths.byline),
                line: row.line,
                message: "byline positions are 1-based".into(),
            });
        }
        slots
            .entry(row.fields[0].as_str().into())
            .or_default()
            .push(AuthorSlot {
                position,
                researcher_id: non_empty(&row.fields[2]).map(Into::into),
                university_id: non_empty(&row.fields[3]).map(Into::into),
            });
    }
    for p in publications.iter_mut() {
        if let Some(byline) = slots.remove(&p.pub_id) {
            p.byline = byline;
        }
    }

    let orphans: Vec<Violation> = slots
        .into_keys()
        .map(|pub_id| Violation::UnknownPublication { pub_id })
        .collect();
    match Corpus::new(taxonomy, roster, publications) {
        Ok(c) if orphans.is_empty() => Ok(c),
        Ok(_) => Err(CorpusError::Integrity(orphans)),
        Err(CorpusError::Integrity(mut v)) => {
            v.extend(orphans);
            Err(CorpusError::Integrity(v))
        }
        Err(e) => Err(e),
    }
}

/// Writes the four corpus CSVs into `dir` (created if needed).
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join(TAXONOMY_FILE))?;
    w.write_record(TAXONOMY_HEADER)?;
    for (s, u) in corpus.taxonomy().entries() {
        w.write_record([s.as_str(), u.as_str()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join(STAFF_FILE))?;
    w.write_record(STAFF_HEADER)?;
    for m in corpus.roster() {
        w.write_record([
            m.researcher_id.as_str(),
            m.university_id.as_str(),
            m.sds_code.as_str(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join(PUBLICATIONS_FILE))?;
    w.write_record(PUBLICATIONS_HEADER)?;
    for p in corpus.publications() {
        w.write_record([
            p.pub_id.as_str(),
            &p.year.to_string(),
            &p.citations.to_string(),
            &p.categories.join(";"),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join(BYLINE_FILE))?;
    w.write_record(BYLINE_HEADER)?;
    for p in corpus.publications() {
        for s in &p.byline {
            w.write_record([
                p.pub_id.as_str(),
                &s.position.to_string(),
                s.researcher_id.as_ref().map_or("", |r| r.as_str()),
                s.university_id.as_ref().map_or("", |u| u.as_str()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Canonical byte stream of a corpus, used for digests.
pub(crate) fn canonical_bytes(corpus: &Corpus) -> Vec<u8> {
    let mut out = Vec::new();
    for (s, u) in corpus.taxonomy().entries() {
        let _ = writeln!(out, "T\t{s}\t{u}");
    }
    for m in corpus.roster() {
        let _ = writeln!(
            out,
            "S\t{}\t{}\t{}",
            m.researcher_id, m.university_id, m.sds_code
        );
    }
    for p in corpus.publications() {
        let _ = writeln!(
            out,
            "P\t{}\t{}\t{}\t{}",
            p.pub_id,
            p.year,
            p.citations,
            p.categories.join(";")
        );
        for s in &p.byline {
            let _ = writeln!(
                out,
                "B\t{}\t{}\t{}",
                s.position,
                s.researcher_id.as_ref().map_or("", |r| r.as_str()),
                s.university_id.as_ref().map_or("", |u| u.as_str())
            );
        }
    }
    out
}
