//! Command-line front end.
//!
//! Exit codes: 0 success, 2 validation failure, 3 I/O failure, 4 empty
//! analysis set, 5 bad arguments or parameters.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{ConfigError, OutputConfig, OutputFormat, RunConfig};
use crate::corpus::{load_corpus, Corpus, CorpusError, CorpusSummary, ExclusionReport};
use crate::ids::SdsCode;
use crate::indicators::{Indicator, IndicatorError};
use crate::pipeline::{
    analyze, any_pair_shifts, compare_pair, parse_pairs, quartile_table, Analysis, AnyPairShift,
    Level, Pair, PairReport, PipelineError, DEFAULT_PAIRS,
};
use crate::report::{self, corpus_digest, json_document, write_file, Provenance, Rendered, TOOL};
use crate::synth::{export_corpus, generate_corpus, SynthError, SynthParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;
pub const EXIT_USAGE: i32 = 5;

pub const VALIDATION_REPORT: &str = "validation_report.json";
pub const SUMMARY: &str = "summary.json";

#[derive(Parser, Debug)]
#[command(
    name = "bylinerank",
    version,
    about = "Byline-weighted research productivity indicators and rank comparisons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check corpus integrity and write validation_report.json.
    Validate(Common),
    /// Compute indicator tables.
    Compute {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "sds")]
        level: Level,
    },
    /// Compare rankings under pairs of indicators.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "sds")]
        level: Level,
        /// Comma-separated pairs such as `wfi:i,fo:o`; defaults to the six
        /// standard pairs.
        #[arg(long)]
        pairs: Option<String>,
    },
    /// Generate a synthetic corpus.
    Synth {
        /// JSON parameter file; defaults apply to missing keys.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the parameter file.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `output.formats`, e.g. `csv,json`.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<OutputFormat>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(ConfigError::Io { .. }) => EXIT_IO,
            CliError::Config(_) => EXIT_USAGE,
            CliError::Corpus(CorpusError::Io { .. }) => EXIT_IO,
            CliError::Corpus(_) => EXIT_VALIDATION,
            CliError::Pipeline(PipelineError::EmptyAnalysisSet) => EXIT_EMPTY,
            CliError::Pipeline(PipelineError::Credit(_)) => EXIT_USAGE,
            CliError::Pipeline(PipelineError::Indicator(IndicatorError::UnknownIndicator(_))) => {
                EXIT_USAGE
            }
            CliError::Pipeline(_) => EXIT_VALIDATION,
            CliError::Synth(SynthError::InvalidParams(_)) => EXIT_USAGE,
            CliError::Synth(SynthError::Corpus(_)) => EXIT_VALIDATION,
            CliError::Write { .. } | CliError::Read { .. } => EXIT_IO,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Validate(common) => cmd_validate(&load_config(&common)?),
        Command::Compute { common, level } => cmd_compute(&load_config(&common)?, level),
        Command::Compare {
            common,
            level,
            pairs,
        } => {
            let pairs = match pairs {
                Some(p) => parse_pairs(&p).map_err(|e| CliError::Usage(e.to_string()))?,
                None => DEFAULT_PAIRS.to_vec(),
            };
            if pairs.is_empty() {
                return Err(CliError::Usage("--pairs lists no pairs".into()));
            }
            cmd_compare(&load_config(&common)?, &pairs, level)
        }
        Command::Synth { params, out, seed } => {
            let mut p = match params {
                Some(path) => load_params(&path)?,
                None => SynthParams::default(),
            };
            if let Some(s) = seed {
                p.seed = s;
            }
            cmd_synth(&p, &out)
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        cfg.output.dir.clone_from(out);
    }
    if let Some(f) = &common.format {
        cfg.output.formats.clone_from(f);
    }
    Ok(cfg)
}

fn load_params(path: &Path) -> Result<SynthParams, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid params {}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    write_file(&path, bytes).map_err(|source| CliError::Write { path, source })
}

fn emit(out: &OutputConfig, stem: &str, r: &Rendered) -> Result<(), CliError> {
    if out.wants(OutputFormat::Csv) {
        write(&out.dir, &format!("{stem}.csv"), &r.csv)?;
    }
    if out.wants(OutputFormat::Json) {
        write(&out.dir, &format!("{stem}.json"), &r.json)?;
    }
    Ok(())
}

fn load(cfg: &RunConfig) -> Result<Corpus, CorpusError> {
    let corpus = load_corpus(&cfg.inputs.corpus_paths())?;
    Ok(match &cfg.inputs.census_date {
        Some(d) => corpus.with_census_date(d.clone()),
        None => corpus,
    })
}

#[derive(Serialize)]
struct ViolationRecord {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<u64>,
    message: String,
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    tool: &'a str,
    valid: bool,
    config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus_sha256: Option<String>,
    violations: Vec<ViolationRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<CorpusSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exclusions: Option<ExclusionReport>,
}

fn violation_records(err: &CorpusError) -> Vec<ViolationRecord> {
    match err {
        CorpusError::Integrity(vs) => vs
            .iter()
            .map(|v| ViolationRecord {
                kind: v.kind().to_owned(),
                pub_id: v.pub_id().map(|p| p.to_string()),
                file: None,
                line: None,
                message: v.to_string(),
            })
            .collect(),
        CorpusError::Parse {
            file,
            line,
            message,
        } => vec![ViolationRecord {
            kind: "parse_error".into(),
            pub_id: None,
            file: Some(file.clone()),
            line: Some(*line),
            message: message.clone(),
        }],
        CorpusError::Io { path, source } => vec![ViolationRecord {
            kind: "io_error".into(),
            pub_id: None,
            file: Some(path.display().to_string()),
            line: None,
            message: source.to_string(),
        }],
        other => vec![ViolationRecord {
            kind: "error".into(),
            pub_id: None,
            file: None,
            line: None,
            message: other.to_string(),
        }],
    }
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<(), CliError> {
    let (report, result) = match load(cfg) {
        Ok(corpus) => {
            let (kept, exclusions) = corpus.apply_exclusions(&cfg.exclusions);
            let report = ValidationReport {
                tool: TOOL,
                valid: true,
                config_sha256: cfg.digest(),
                corpus_sha256: Some(corpus_digest(&corpus)),
                violations: Vec::new(),
                summary: Some(kept.summarize()),
                exclusions: Some(exclusions),
            };
            (report, Ok(()))
        }
        Err(e) => {
            let report = ValidationReport {
                tool: TOOL,
                valid: false,
                config_sha256: cfg.digest(),
                corpus_sha256: None,
                violations: violation_records(&e),
                summary: None,
                exclusions: None,
            };
            (report, Err(CliError::Corpus(e)))
        }
    };
    let written = write(&cfg.output.dir, VALIDATION_REPORT, &json_document(&report));
    match (result, written) {
        (Err(e), _) => Err(e),
        (Ok(()), w) => w,
    }
}

fn provenance(cfg: &RunConfig, corpus: &Corpus) -> Provenance {
    Provenance {
        config_sha256: cfg.digest(),
        corpus_sha256: corpus_digest(corpus),
    }
}

#[derive(Serialize)]
struct ExcludedAverage<'a> {
    sds_code: &'a SdsCode,
    indicator: Indicator,
}

#[derive(Serialize)]
struct Summary<'a> {
    tool: &'a str,
    #[serde(flatten)]
    provenance: &'a Provenance,
    level: Level,
    corpus: CorpusSummary,
    exclusions: &'a ExclusionReport,
    /// Field/indicator pairs without a usable national mean.
    excluded_averages: Vec<ExcludedAverage<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparisons: Option<Vec<PairSummary<'a>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shifted_any_pair: Option<Vec<AnyPairShift>>,
}

#[derive(Serialize)]
struct PairSummary<'a> {
    pair: Pair,
    basis: crate::corpus::Basis,
    scopes: usize,
    correlations: &'a crate::compare::CorrelationSummary<f64>,
    pooled: &'a crate::pipeline::PooledShifts<f64>,
}

fn summary<'a>(
    prov: &'a Provenance,
    level: Level,
    analysis: &'a Analysis<f64>,
    reports: Option<&'a [PairReport<f64>]>,
) -> Summary<'a> {
    Summary {
        tool: TOOL,
        provenance: prov,
        level,
        corpus: analysis.corpus.summarize(),
        exclusions: &analysis.exclusions,
        excluded_averages: analysis
            .averages
            .excluded()
            .iter()
            .map(|(s, i)| ExcludedAverage {
                sds_code: s,
                indicator: *i,
            })
            .collect(),
        comparisons: reports.map(|rs| {
            rs.iter()
                .map(|r| PairSummary {
                    pair: r.pair,
                    basis: r.basis,
                    scopes: r.scopes.len(),
                    correlations: &r.correlations,
                    pooled: &r.pooled,
                })
                .collect()
        }),
        shifted_any_pair: reports.map(any_pair_shifts),
    }
}

pub fn cmd_compute(cfg: &RunConfig, level: Level) -> Result<(), CliError> {
    let corpus = load(cfg)?;
    let analysis = analyze::<f64>(&corpus, cfg)?;
    let prov = provenance(cfg, &corpus);
    emit(
        &cfg.output,
        "indicators_sds",
        &report::sds_table(&prov, &analysis.sds),
    )?;
    if level == Level::Uda {
        emit(
            &cfg.output,
            "indicators_uda",
            &report::uda_table(&prov, &analysis.uda),
        )?;
    }
    write(
        &cfg.output.dir,
        SUMMARY,
        &json_document(&summary(&prov, level, &analysis, None)),
    )
}

pub fn cmd_compare(cfg: &RunConfig, pairs: &[Pair], level: Level) -> Result<(), CliError> {
    let corpus = load(cfg)?;
    let analysis = analyze::<f64>(&corpus, cfg)?;
    let prov = provenance(cfg, &corpus);
    let reports = pairs
        .iter()
        .map(|&p| compare_pair(&analysis, level, p))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        emit(
            &cfg.output,
            &format!("compare_{}_{}", r.pair.tag(), level),
            &report::comparison(&prov, r),
        )?;
    }
    emit(
        &cfg.output,
        &format!("quartiles_{level}"),
        &report::quartiles(&prov, &quartile_table(&analysis, level)),
    )?;
    write(
        &cfg.output.dir,
        SUMMARY,
        &json_document(&summary(&prov, level, &analysis, Some(&reports))),
    )
}

pub fn cmd_synth(params: &SynthParams, out: &Path) -> Result<(), CliError> {
    let corpus = generate_corpus(params)?;
    export_corpus(&corpus, params, out).map_err(|source| CliError::Write {
        path: out.to_owned(),
        source,
    })
}
