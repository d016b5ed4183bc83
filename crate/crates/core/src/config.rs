//! JSON run configuration.
//!
//! ```json
//! {
//!   "inputs":     { "corpus_dir": "data", "census_date": "2009-06-30" },
//!   "scheme":     { "intramural_end": 0.4, "extramural_end": 0.3, "extramural_adjacent": 0.15 },
//!   "exclusions": { "min_publishing_fraction": 0.5, "min_universities": 8 },
//!   "switches":   { "staff_basis": "full_roster", "full_counting": "per_institution",
//!                   "national_average_subset": "non_nil" },
//!   "output":     { "dir": "out", "formats": ["csv", "json"] }
//! }
//! ```
//!
//! Every section and key is optional. Relative paths resolve against the
//! directory holding the config file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregate::AverageSubset;
use crate::corpus::{CorpusPaths, ExclusionRules, StaffBasis};
use crate::credit::{CreditError, CreditScheme, FullCounting};
use crate::indicators::IndicatorConfig;
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scheme: {0}")]
    Scheme(#[from] CreditError),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: InputsConfig,
    pub scheme: SchemeConfig,
    pub exclusions: ExclusionRules,
    pub switches: Switches,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputsConfig {
    /// Directory holding the four corpus files under their standard names.
    pub corpus_dir: PathBuf,
    /// Per-file overrides.
    pub staff: Option<PathBuf>,
    pub publications: Option<PathBuf>,
    pub byline: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub census_date: Option<String>,
}

impl Default for InputsConfig {
    fn default() -> Self {
        Self {
            corpus_dir: PathBuf::from("."),
            staff: None,
            publications: None,
            byline: None,
            taxonomy: None,
            census_date: None,
        }
    }
}

impl InputsConfig {
    pub fn corpus_paths(&self) -> CorpusPaths {
        let mut p = CorpusPaths::in_dir(&self.corpus_dir);
        let pick = |o: &Option<PathBuf>, d: &mut PathBuf| {
            if let Some(o) = o {
                d.clone_from(o);
            }
        };
        pick(&self.staff, &mut p.staff);
        pick(&self.publications, &mut p.publications);
        pick(&self.byline, &mut p.byline);
        pick(&self.taxonomy, &mut p.taxonomy);
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub intramural_end: f64,
    pub extramural_end: f64,
    pub extramural_adjacent: f64,
    /// Ignore positions and give every author `1/n`.
    pub uniform: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            intramural_end: 0.4,
            extramural_end: 0.3,
            extramural_adjacent: 0.15,
            uniform: false,
        }
    }
}

impl SchemeConfig {
    pub fn to_scheme<T: Real>(&self) -> Result<CreditScheme<T>, CreditError> {
        if self.uniform {
            return Ok(CreditScheme::Uniform);
        }
        if *self == SchemeConfig::default() {
            // exact decimal defaults rather than their binary approximations
            return Ok(CreditScheme::default());
        }
        CreditScheme::positional(
            T::from_f64_lossy(self.intramural_end),
            T::from_f64_lossy(self.extramural_end),
            T::from_f64_lossy(self.extramural_adjacent),
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Switches {
    pub staff_basis: StaffBasis,
    pub full_counting: FullCounting,
    pub national_average_subset: AverageSubset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!(
                "unknown output format {other:?} (expected csv or json)"
            )),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Serialize)]
struct AnalysisSettings<'a> {
    census_date: &'a Option<String>,
    scheme: &'a SchemeConfig,
    exclusions: &'a ExclusionRules,
    switches: &'a Switches,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::from_json(&text).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        cfg.scheme.to_scheme::<f64>()?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.inputs.corpus_dir);
        for p in [
            &mut self.inputs.staff,
            &mut self.inputs.publications,
            &mut self.inputs.byline,
            &mut self.inputs.taxonomy,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.output.dir);
    }

    pub fn indicator_config<T: Real>(&self) -> Result<IndicatorConfig<T>, CreditError> {
        Ok(IndicatorConfig {
            scheme: self.scheme.to_scheme()?,
            staff_basis: self.switches.staff_basis,
            full_counting: self.switches.full_counting,
        })
    }

    /// SHA-256 over the settings that affect results; file locations and
    /// output choices are left out so relocated runs hash alike.
    pub fn digest(&self) -> String {
        let settings = AnalysisSettings {
            census_date: &self.inputs.census_date,
            scheme: &self.scheme,
            exclusions: &self.exclusions,
            switches: &self.switches,
        };
        let bytes = serde_json::to_vec(&settings).expect("settings serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}
