//! One-shot wug experiment: split, augment, run the baseline, report.
//!
//! Output tree under the configured directory:
//!
//! ```text
//! split/<lang>.{train,dev,test}         (or split/fold<i>/... with cv)
//! split/<lang>.split.manifest.json
//! split/[fold<i>/]augment/<lang>.train.<config>     + .manifest.json
//! split/[fold<i>/]predictions/<lang>.test.<config>.pred
//! split/[fold<i>/]reports/<config>.<txt|kv>
//! summary.<txt|kv>
//! pipeline.manifest.json
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};
use wugaug::corpus::{Dataset, Fields};
use wugaug::evalkit::{aggregate, AggregateReport};
use wugaug::hallucinate::{Method, DEFAULT_COPY_TAG, DEFAULT_COUNT};

use crate::commands::{
    baseline_predict, plan_augment, plan_split_with_splits, split_files, split_manifest_path,
    write_predictions, AugmentParams, IngestOptions, SplitParams, BASELINE_SYSTEM, MANIFEST_SUFFIX,
    TOOL, VERSION,
};
use crate::io::{to_json, with_suffix, write_outputs, OutputDigest, OutputFile};
use crate::report::{format_eval, format_summary, ReportFormat};

pub const OUT_DIR_ENV: &str = "WUGAUG_OUT_DIR";

fn default_ratios() -> String {
    "7:1:2".into()
}

fn default_count() -> usize {
    DEFAULT_COUNT
}

fn default_runs() -> usize {
    1
}

fn default_min_stem_run() -> usize {
    1
}

fn default_copy_tag() -> String {
    DEFAULT_COPY_TAG.into()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_ratios")]
    pub ratios: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cv: Option<usize>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            ratios: default_ratios(),
            seed: 0,
            cv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentConfig {
    pub method: Method,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    /// Independent generations with seeds `seed, seed + 1, ...`.
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub fields: Fields,
    #[serde(default = "default_min_stem_run")]
    pub min_stem_run: usize,
    #[serde(default = "default_copy_tag")]
    pub copy_tag: String,
    #[serde(default = "yes")]
    pub dedupe: bool,
    #[serde(default)]
    pub forbid_real_lemmas: bool,
}

impl AugmentConfig {
    pub fn name(&self) -> String {
        match self.method {
            Method::CopyLemmas => self.method.to_string(),
            m => format!("{m}-{}", self.count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub lang: String,
    /// Triple files pooled before splitting.
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub report_format: ReportFormat,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub augment: Vec<AugmentConfig>,
    #[serde(default)]
    pub ingest: IngestOptions,
}

impl PipelineConfig {
    /// Reads a TOML config; relative paths in it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("failed to read {}", path.display()))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .with_context(|| format!("invalid pipeline config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in &mut cfg.inputs {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = &mut cfg.out_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.lang.is_empty(), "lang must not be empty");
        ensure!(!self.inputs.is_empty(), "no input files");
        for p in &self.inputs {
            ensure!(p.is_file(), "input file {} does not exist", p.display());
        }
        let mut seen = std::collections::HashSet::new();
        for a in &self.augment {
            ensure!(
                seen.insert(a.name()),
                "duplicate augmentation configuration {}",
                a.name()
            );
            ensure!(a.count >= 1, "{}: count must be at least 1", a.name());
            ensure!(a.runs >= 1, "{}: runs must be at least 1", a.name());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
struct PipelineManifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    config: &'a PipelineConfig,
    out_dir: &'a Path,
    outputs: Vec<OutputDigest>,
}

#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub out_dir: PathBuf,
    /// Accuracy over folds and runs per configuration, `vanilla` first.
    pub rows: Vec<(String, AggregateReport)>,
    pub summary_text: String,
}

fn emit(files: Vec<OutputFile>, written: &mut Vec<OutputFile>) -> Result<()> {
    write_outputs(&files)?;
    written.extend(files);
    Ok(())
}

fn read_tsv(path: &Path, ingest: IngestOptions) -> Result<Dataset> {
    Ok(crate::io::load_dataset(path, ingest.into())?.dataset)
}

/// Runs the whole pipeline. `out_override` wins over the config's `out_dir`,
/// which wins over `$WUGAUG_OUT_DIR`.
pub fn cmd_pipeline(cfg: &PipelineConfig, out_override: Option<&Path>) -> Result<PipelineSummary> {
    cfg.validate()?;
    let out_dir = out_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .context("no output directory: pass --out, set out_dir, or set WUGAUG_OUT_DIR")?;
    let fmt = cfg.report_format;
    let mut written: Vec<OutputFile> = Vec::new();

    let split_params = SplitParams {
        inputs: cfg.inputs.clone(),
        out_dir: out_dir.join("split"),
        lang: cfg.lang.clone(),
        ratios: cfg.split.ratios.clone(),
        seed: cfg.split.seed,
        cv: cfg.split.cv,
        ingest: cfg.ingest,
    };
    let (mut files, manifest, splits) = plan_split_with_splits(&split_params)?;
    files.push(OutputFile::new(
        split_manifest_path(&split_params),
        to_json(&manifest),
    ));
    emit(files, &mut written)?;

    let mut names = vec!["vanilla".to_owned()];
    names.extend(cfg.augment.iter().map(AugmentConfig::name));
    let mut accuracies: Vec<Vec<f64>> = vec![Vec::new(); names.len()];

    for (_, dir, split) in &splits {
        let [train_path, dev_path, test_path] = split_files(dir, &cfg.lang);
        let mut evaluate = |name: &str,
                            train: &Dataset,
                            slot: usize,
                            written: &mut Vec<OutputFile>|
         -> Result<()> {
            let (preds, report) = baseline_predict(train, &split.test)?;
            accuracies[slot].push(report.accuracy());
            let pred_path = dir
                .join("predictions")
                .join(format!("{}.test.{name}.pred", cfg.lang));
            let report_path = dir
                .join("reports")
                .join(format!("{name}.{}", fmt.extension()));
            emit(
                vec![
                    OutputFile::new(pred_path, write_predictions(&preds)?),
                    OutputFile::new(report_path, format_eval(BASELINE_SYSTEM, &report, fmt)),
                ],
                written,
            )
        };

        evaluate("vanilla", &split.train, 0, &mut written)?;

        for (slot, a) in cfg.augment.iter().enumerate() {
            for run in 0..a.runs {
                let seed = a.seed + run as u64;
                let name = if a.runs > 1 {
                    format!("{}.s{seed}", a.name())
                } else {
                    a.name()
                };
                let aug_path = dir
                    .join("augment")
                    .join(format!("{}.train.{name}", cfg.lang));
                let params = AugmentParams {
                    counts: vec![a.count],
                    seed,
                    lemma_sources: if a.method == Method::CopyLemmas {
                        vec![dev_path.clone(), test_path.clone()]
                    } else {
                        Vec::new()
                    },
                    fields: a.fields,
                    min_stem_run: a.min_stem_run,
                    copy_tag: a.copy_tag.clone(),
                    dedupe: a.dedupe,
                    forbid_real_lemmas: a.forbid_real_lemmas,
                    ingest: cfg.ingest,
                    ..AugmentParams::new(a.method, train_path.clone(), aug_path.clone())
                };
                let (mut files, manifest) = plan_augment(&params)?;
                files.push(OutputFile::new(
                    with_suffix(&aug_path, MANIFEST_SUFFIX),
                    to_json(&manifest),
                ));
                emit(files, &mut written)?;
                let augmented = read_tsv(&aug_path, cfg.ingest)?;
                evaluate(&name, &augmented, slot + 1, &mut written)?;
            }
        }
    }

    let rows: Vec<(String, AggregateReport)> = names
        .into_iter()
        .zip(&accuracies)
        .map(|(name, values)| Ok((name, aggregate(values)?)))
        .collect::<Result<_>>()?;
    let summary_text = format!(
        "system: {BASELINE_SYSTEM}\nlang: {}\n{}",
        cfg.lang,
        format_summary(&rows, fmt)
    );
    let summary = OutputFile::new(
        out_dir.join(format!("summary.{}", fmt.extension())),
        summary_text.clone(),
    );
    emit(vec![summary], &mut written)?;

    let manifest = PipelineManifest {
        tool: TOOL,
        version: VERSION,
        command: "pipeline",
        config: cfg,
        out_dir: &out_dir,
        outputs: written.iter().map(OutputFile::digest).collect(),
    };
    write_outputs(&[OutputFile::new(
        out_dir.join("pipeline.manifest.json"),
        to_json(&manifest),
    )])?;

    Ok(PipelineSummary {
        out_dir,
        rows,
        summary_text,
    })
}
