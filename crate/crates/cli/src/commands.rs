//! Implementations of the `wugaug` subcommands.
//!
//! Stochastic commands are split into a pure planning step, which produces
//! the output files in memory, and a write step. Manifests record the
//! parameters together with input and output digests, so `replay` can rerun
//! the plan and check that it reproduces the recorded outputs exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use wugaug::align::{analyze, bracket};
use wugaug::corpus::{
    build_paradigms, compute_stats, write_tsv, Dataset, Fields, LengthBounds, ParseOptions,
};
use wugaug::evalkit::{predict_dataset, score, train_rules, EvalReport, Prediction};
use wugaug::hallucinate::{
    augment, AugmentationSpec, ContextOptions, GenContext, GenStats, Method,
};
use wugaug::splitter::{cv_folds, verify_disjoint, wug_split, Part, Split, SplitSpec};

use crate::io::{
    load_dataset, sha256_hex, to_json, with_suffix, write_outputs, InputDigest, OutputDigest,
    OutputFile,
};
use crate::report::{format_eval, format_stats, ReportFormat};

pub const TOOL: &str = "wugaug";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_SUFFIX: &str = ".manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestOptions {
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub nfc: bool,
}

impl From<IngestOptions> for ParseOptions {
    fn from(o: IngestOptions) -> Self {
        ParseOptions {
            strict: o.strict,
            nfc: o.nfc,
        }
    }
}

fn load_all(paths: &[PathBuf], ingest: IngestOptions) -> Result<(Vec<Dataset>, Vec<InputDigest>)> {
    let mut datasets = Vec::new();
    let mut digests = Vec::new();
    for p in paths {
        let l = load_dataset(p, ingest.into())?;
        datasets.push(l.dataset);
        digests.push(l.digest);
    }
    Ok((datasets, digests))
}

// ---------------------------------------------------------------- stats

#[derive(Debug, Clone)]
pub struct StatsParams {
    pub files: Vec<PathBuf>,
    pub references: Vec<PathBuf>,
    pub format: ReportFormat,
    pub ingest: IngestOptions,
}

/// Triple counts, lemma counts and lemma overlap against each reference.
pub fn cmd_stats(p: &StatsParams) -> Result<String> {
    ensure!(!p.files.is_empty(), "no input files");
    let (files, _) = load_all(&p.files, p.ingest)?;
    let (refs, _) = load_all(&p.references, p.ingest)?;
    let ref_refs: Vec<&Dataset> = refs.iter().collect();
    let stats: Vec<_> = files.iter().map(|d| compute_stats(d, &ref_refs)).collect();
    let ref_labels: Vec<String> = refs.iter().map(|r| r.label.clone()).collect();
    Ok(format_stats(&stats, &ref_labels, p.format))
}

// ---------------------------------------------------------------- split

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitParams {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub lang: String,
    pub ratios: String,
    pub seed: u64,
    /// Cross-validation fold count; a single wug split when absent.
    pub cv: Option<usize>,
    #[serde(default)]
    pub ingest: IngestOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParadigmAssignment {
    pub lemma: String,
    pub part: Part,
    pub triples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: Option<usize>,
    pub dir: PathBuf,
    /// Paradigm counts (train, dev, test).
    pub sizes: [usize; 3],
    pub paradigms: Vec<ParadigmAssignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub params: SplitParams,
    pub inputs: Vec<InputDigest>,
    /// Normalized (train, dev, test) ratios as exact fractions.
    pub ratios: [String; 3],
    pub folds: Vec<FoldRecord>,
    pub outputs: Vec<OutputDigest>,
}

pub fn split_files(dir: &Path, lang: &str) -> [PathBuf; 3] {
    [Part::Train, Part::Dev, Part::Test].map(|p| dir.join(format!("{lang}.{}", p.name())))
}

/// The splits a `SplitParams` describes, with the directory each goes to.
pub fn compute_splits(p: &SplitParams, all: &Dataset) -> Result<Vec<PlannedSplit>> {
    let paradigms = build_paradigms(all);
    Ok(match p.cv {
        None => {
            let spec = SplitSpec::parse_ratios(&p.ratios, p.seed)?;
            vec![(None, p.out_dir.clone(), wug_split(&paradigms, &spec)?)]
        }
        Some(k) => cv_folds(&paradigms, k, p.seed)?
            .into_iter()
            .enumerate()
            .map(|(i, s)| (Some(i), p.out_dir.join(format!("fold{i}")), s))
            .collect(),
    })
}

pub fn plan_split(p: &SplitParams) -> Result<(Vec<OutputFile>, SplitManifest)> {
    plan_split_with_splits(p).map(|(files, manifest, _)| (files, manifest))
}

pub type PlannedSplit = (Option<usize>, PathBuf, Split);

pub(crate) fn plan_split_with_splits(
    p: &SplitParams,
) -> Result<(Vec<OutputFile>, SplitManifest, Vec<PlannedSplit>)> {
    let spec = SplitSpec::parse_ratios(&p.ratios, p.seed)?;
    let (datasets, inputs) = load_all(&p.inputs, p.ingest)?;
    ensure!(!datasets.is_empty(), "no input files");
    let all = Dataset::concat(p.lang.clone(), &datasets);
    let paradigms = build_paradigms(&all);
    let mut files = Vec::new();
    let mut folds = Vec::new();
    let splits = compute_splits(p, &all)?;
    for (fold, dir, split) in &splits {
        let (fold, dir) = (*fold, dir.clone());
        let report = verify_disjoint(split);
        ensure!(
            report.is_disjoint(),
            "internal error: split is not lemma-disjoint"
        );
        let [train, dev, test] = split_files(&dir, &p.lang);
        files.push(OutputFile::new(train, write_tsv(&split.train)));
        files.push(OutputFile::new(dev, write_tsv(&split.dev)));
        files.push(OutputFile::new(test, write_tsv(&split.test)));
        folds.push(FoldRecord {
            fold,
            dir,
            sizes: split.paradigm_counts(),
            paradigms: paradigms
                .iter()
                .zip(&split.assignment)
                .map(|(para, &part)| ParadigmAssignment {
                    lemma: para.lemma.clone(),
                    part,
                    triples: para.triples.len(),
                })
                .collect(),
        });
    }
    let manifest = SplitManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "split".into(),
        params: p.clone(),
        inputs,
        ratios: spec.ratios().map(|r| r.to_string()),
        folds,
        outputs: files.iter().map(OutputFile::digest).collect(),
    };
    Ok((files, manifest, splits))
}

pub fn split_manifest_path(p: &SplitParams) -> PathBuf {
    p.out_dir.join(format!("{}.split{MANIFEST_SUFFIX}", p.lang))
}

pub fn cmd_split(p: &SplitParams) -> Result<SplitManifest> {
    let (mut files, manifest) = plan_split(p)?;
    files.push(OutputFile::new(split_manifest_path(p), to_json(&manifest)));
    write_outputs(&files)?;
    Ok(manifest)
}

// ---------------------------------------------------------------- augment

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentParams {
    pub method: Method,
    /// One output per count; more than one count is a sweep.
    pub counts: Vec<usize>,
    pub seed: u64,
    pub train: PathBuf,
    /// Lemma sources for `copy-lemmas`.
    #[serde(default)]
    pub lemma_sources: Vec<PathBuf>,
    /// Base triples for hallucination; the training set when empty.
    #[serde(default)]
    pub pool: Vec<PathBuf>,
    pub out: PathBuf,
    pub fields: Fields,
    pub min_stem_run: usize,
    pub copy_tag: String,
    pub dedupe: bool,
    pub forbid_real_lemmas: bool,
    #[serde(default)]
    pub ingest: IngestOptions,
}

impl AugmentParams {
    pub fn new(method: Method, train: PathBuf, out: PathBuf) -> Self {
        AugmentParams {
            method,
            counts: vec![wugaug::hallucinate::DEFAULT_COUNT],
            seed: 0,
            train,
            lemma_sources: Vec::new(),
            pool: Vec::new(),
            out,
            fields: Fields::Both,
            min_stem_run: 1,
            copy_tag: wugaug::hallucinate::DEFAULT_COPY_TAG.into(),
            dedupe: true,
            forbid_real_lemmas: false,
            ingest: IngestOptions::default(),
        }
    }

    pub fn spec(&self, count: usize) -> AugmentationSpec {
        AugmentationSpec {
            method: self.method,
            count,
            seed: self.seed,
            copy_tag: self.copy_tag.clone(),
            dedupe: self.dedupe,
            forbid_real_lemmas: self.forbid_real_lemmas,
        }
    }

    pub fn output_path(&self, count: usize) -> PathBuf {
        if self.counts.len() > 1 {
            with_suffix(&self.out, &format!(".{count}"))
        } else {
            self.out.clone()
        }
    }

    pub fn context_options(&self) -> ContextOptions {
        ContextOptions {
            fields: self.fields,
            min_stem_run: self.min_stem_run,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextFingerprint {
    pub alphabet_size: usize,
    pub ngram_count: usize,
    pub word_bounds: LengthBounds,
    pub stem_bounds: Option<LengthBounds>,
}

impl From<&GenContext> for ContextFingerprint {
    fn from(c: &GenContext) -> Self {
        ContextFingerprint {
            alphabet_size: c.alphabet.len(),
            ngram_count: c.ngrams.len(),
            word_bounds: c.word_bounds,
            stem_bounds: c.stem_bounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentRun {
    pub count: usize,
    pub generated: usize,
    pub train_size: usize,
    pub stats: GenStats,
    pub output: OutputDigest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub params: AugmentParams,
    pub inputs: Vec<InputDigest>,
    pub context: ContextFingerprint,
    pub runs: Vec<AugmentRun>,
}

/// Runs augmentation on an already loaded training set.
pub fn augment_dataset(
    p: &AugmentParams,
    train: &Dataset,
    lemma_sources: Option<&Dataset>,
    pool: Option<&Dataset>,
    count: usize,
) -> Result<(wugaug::hallucinate::Augmented, GenContext)> {
    let ctx = GenContext::from_training(train, p.context_options())
        .with_context(|| format!("cannot harvest generation context from {}", train.label))?;
    let source = match p.method {
        Method::CopyLemmas => Some(lemma_sources.context("copy-lemmas needs lemma sources")?),
        _ => pool,
    };
    let out = augment(train, &p.spec(count), &ctx, source)?;
    Ok((out, ctx))
}

pub fn plan_augment(p: &AugmentParams) -> Result<(Vec<OutputFile>, AugmentManifest)> {
    ensure!(!p.counts.is_empty(), "no augmentation count given");
    let train = load_dataset(&p.train, p.ingest.into())?;
    let mut inputs = vec![train.digest];
    let (sources, digests) = load_all(&p.lemma_sources, p.ingest)?;
    inputs.extend(digests);
    let (pool, digests) = load_all(&p.pool, p.ingest)?;
    inputs.extend(digests);
    if p.method == Method::CopyLemmas && sources.is_empty() {
        bail!("--method copy-lemmas requires --lemma-sources");
    }
    let sources = (!sources.is_empty()).then(|| Dataset::concat("lemma-sources", &sources));
    let pool = (!pool.is_empty()).then(|| Dataset::concat("pool", &pool));

    let mut files = Vec::new();
    let mut runs = Vec::new();
    let mut fingerprint = None;
    for &count in &p.counts {
        let (out, ctx) =
            augment_dataset(p, &train.dataset, sources.as_ref(), pool.as_ref(), count)?;
        let file = OutputFile::new(p.output_path(count), write_tsv(&out.dataset));
        runs.push(AugmentRun {
            count,
            generated: out.generated.len(),
            train_size: train.dataset.len(),
            stats: out.stats,
            output: file.digest(),
        });
        files.push(file);
        fingerprint.get_or_insert_with(|| ContextFingerprint::from(&ctx));
    }
    let manifest = AugmentManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "augment".into(),
        params: p.clone(),
        inputs,
        context: fingerprint.expect("at least one count"),
        runs,
    };
    Ok((files, manifest))
}

pub fn cmd_augment(p: &AugmentParams) -> Result<AugmentManifest> {
    let (mut files, manifest) = plan_augment(p)?;
    files.push(OutputFile::new(
        with_suffix(&p.out, MANIFEST_SUFFIX),
        to_json(&manifest),
    ));
    write_outputs(&files)?;
    Ok(manifest)
}

// ---------------------------------------------------------------- baseline / evaluate

pub const BASELINE_SYSTEM: &str = "baseline (suffix rules, not a neural model)";

pub fn write_predictions(preds: &[Prediction]) -> Result<Vec<u8>> {
    let triples = preds
        .iter()
        .map(Prediction::to_triple)
        .collect::<wugaug::Result<Vec<_>>>()?;
    Ok(write_tsv(&Dataset::new("predictions", triples)))
}

/// Trains the suffix-rule baseline and predicts every triple of `eval`.
pub fn baseline_predict(train: &Dataset, eval: &Dataset) -> Result<(Vec<Prediction>, EvalReport)> {
    let model = train_rules(train)?;
    let preds = predict_dataset(&model, eval);
    let report = score(eval, &preds)?;
    Ok((preds, report))
}

#[derive(Debug, Clone)]
pub struct BaselineParams {
    pub train: PathBuf,
    pub eval: PathBuf,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub format: ReportFormat,
    pub ingest: IngestOptions,
}

pub fn cmd_run_baseline(p: &BaselineParams) -> Result<(EvalReport, String)> {
    let train = load_dataset(&p.train, p.ingest.into())?.dataset;
    let eval = load_dataset(&p.eval, p.ingest.into())?.dataset;
    let (preds, report) = baseline_predict(&train, &eval)?;
    let text = format_eval(BASELINE_SYSTEM, &report, p.format);
    let mut files = vec![OutputFile::new(&p.out, write_predictions(&preds)?)];
    if let Some(path) = &p.report {
        files.push(OutputFile::new(path, text.clone()));
    }
    write_outputs(&files)?;
    Ok((report, text))
}

#[derive(Debug, Clone)]
pub struct EvaluateParams {
    pub gold: PathBuf,
    pub predictions: PathBuf,
    pub system: String,
    pub format: ReportFormat,
    pub ingest: IngestOptions,
}

pub fn cmd_evaluate(p: &EvaluateParams) -> Result<(EvalReport, String)> {
    let gold = load_dataset(&p.gold, p.ingest.into())?.dataset;
    let preds: Vec<Prediction> = load_dataset(&p.predictions, p.ingest.into())?
        .dataset
        .triples
        .into_iter()
        .map(Prediction::from_triple)
        .collect();
    ensure!(
        gold.len() == preds.len(),
        "{} has {} predictions but {} has {} gold triples",
        p.predictions.display(),
        preds.len(),
        p.gold.display(),
        gold.len()
    );
    for (i, (g, pr)) in gold.triples.iter().zip(&preds).enumerate() {
        ensure!(
            g.lemma == pr.lemma,
            "entry {}: prediction lemma {:?} does not match gold lemma {:?}",
            i + 1,
            pr.lemma,
            g.lemma
        );
    }
    let report = score(&gold, &preds)?;
    let text = format_eval(&p.system, &report, p.format);
    Ok((report, text))
}

// ---------------------------------------------------------------- align

/// Alignment, stem spans and template of one pair, for inspection.
pub fn cmd_align(lemma: &str, form: &str, min_stem_run: usize) -> String {
    let a = wugaug::align::align(lemma, form);
    let (top, bottom) = a.render_rows();
    let ops: String = a
        .ops()
        .iter()
        .map(|o| match o {
            wugaug::align::EditOp::Match(_) => '|',
            wugaug::align::EditOp::Subst(..) => '*',
            wugaug::align::EditOp::Delete(_) | wugaug::align::EditOp::Insert(_) => ' ',
        })
        .collect();
    let mut out = format!("{top}\n{ops}\n{bottom}\ncost: {}\n", a.cost());
    match analyze(lemma, form, min_stem_run) {
        Some(an) => {
            let l = bracket(lemma, an.stem.spans.iter().map(|s| s.lemma.clone()));
            let f = bracket(form, an.stem.spans.iter().map(|s| s.form.clone()));
            out.push_str(&format!("stem: {l} -> {f}\ntemplate: {}\n", an.template));
        }
        None => out.push_str("stem: none\n"),
    }
    out
}

// ---------------------------------------------------------------- replay

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub checked: usize,
    /// Regenerated outputs whose digest differs from the recorded one.
    pub mismatched: Vec<PathBuf>,
    pub changed_inputs: Vec<PathBuf>,
    /// Recorded outputs that are missing or were edited on disk.
    pub modified_on_disk: Vec<PathBuf>,
}

impl ReplayOutcome {
    pub fn ok(&self) -> bool {
        self.mismatched.is_empty()
            && self.changed_inputs.is_empty()
            && self.modified_on_disk.is_empty()
    }
}

fn modified_on_disk(recorded: &[OutputDigest]) -> Vec<PathBuf> {
    recorded
        .iter()
        .filter(|r| fs::read(&r.path).map(|b| sha256_hex(&b)).ok().as_ref() != Some(&r.sha256))
        .map(|r| r.path.clone())
        .collect()
}

fn compare(recorded: &[OutputDigest], fresh: &[OutputFile]) -> Vec<PathBuf> {
    let fresh: BTreeMap<&Path, String> = fresh
        .iter()
        .map(|f| (f.path.as_path(), f.digest().sha256))
        .collect();
    recorded
        .iter()
        .filter(|r| fresh.get(r.path.as_path()) != Some(&r.sha256))
        .map(|r| r.path.clone())
        .collect()
}

fn changed(recorded: &[InputDigest], fresh: &[InputDigest]) -> Vec<PathBuf> {
    recorded
        .iter()
        .filter(|r| !fresh.iter().any(|f| f == *r))
        .map(|r| r.path.clone())
        .collect()
}

/// Re-runs the command a manifest records, in memory, and compares the
/// regenerated outputs with the recorded digests.
pub fn cmd_replay(manifest: &Path) -> Result<ReplayOutcome> {
    let text = fs::read_to_string(manifest)
        .with_context(|| format!("failed to read {}", manifest.display()))?;
    let head: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a manifest", manifest.display()))?;
    match head.get("command").and_then(|c| c.as_str()) {
        Some("split") => {
            let m: SplitManifest = serde_json::from_str(&text)?;
            let (files, fresh) = plan_split(&m.params)?;
            Ok(ReplayOutcome {
                checked: m.outputs.len(),
                mismatched: compare(&m.outputs, &files),
                changed_inputs: changed(&m.inputs, &fresh.inputs),
                modified_on_disk: modified_on_disk(&m.outputs),
            })
        }
        Some("augment") => {
            let m: AugmentManifest = serde_json::from_str(&text)?;
            let (files, fresh) = plan_augment(&m.params)?;
            let recorded: Vec<OutputDigest> = m.runs.iter().map(|r| r.output.clone()).collect();
            Ok(ReplayOutcome {
                checked: recorded.len(),
                mismatched: compare(&recorded, &files),
                changed_inputs: changed(&m.inputs, &fresh.inputs),
                modified_on_disk: modified_on_disk(&recorded),
            })
        }
        other => bail!(
            "{}: unsupported manifest command {other:?}",
            manifest.display()
        ),
    }
}
