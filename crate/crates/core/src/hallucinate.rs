//! Augmentation triples for copy bias and data hallucination.
//!
//! Five methods are available:
//!
//! * `copy-lemmas`: `(L, COPY, L)` for every supplied lemma.
//! * `copy-char` / `copy-substr`: `(D, COPY, D)` for dummy words `D` built by
//!   concatenating units drawn uniformly from the training alphabet or from its
//!   2-, 3- and 4-gram inventory.
//! * `hall-char`: every stem span of a training triple is replaced, character
//!   by character, with random alphabet characters of the same length.
//! * `hall-substr`: only the first stem span is replaced, by a word synthesized
//!   from n-grams whose length is drawn between the shortest and longest
//!   first-span stem seen in training.
//!
//! Item `i` draws from its own random stream (see [`crate::rng`]), so the
//! output is a pure function of the inputs and the seed.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::align::{analyze, Analysis};
use crate::corpus::{
    collect_alphabet, collect_ngrams, lengths_to_bounds, Alphabet, Dataset, Fields, LengthBounds,
    NGramInventory, Triple, UnitSource,
};
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_COUNT: usize = 2000;
pub const DEFAULT_COPY_TAG: &str = "COPY";
/// Redraws allowed for a rejected (duplicate or forbidden) item before it is accepted anyway.
pub const MAX_REDRAWS: usize = 32;
/// Hallucination may use at most this many base-triple draws per requested item.
pub const ATTEMPTS_PER_ITEM: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "copy-lemmas")]
    CopyLemmas,
    #[serde(rename = "copy-char")]
    CopyChar,
    #[serde(rename = "copy-substr")]
    CopySubstr,
    #[serde(rename = "hall-char")]
    HallChar,
    #[serde(rename = "hall-substr")]
    HallSubstr,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::CopyLemmas,
        Method::CopyChar,
        Method::CopySubstr,
        Method::HallChar,
        Method::HallSubstr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::CopyLemmas => "copy-lemmas",
            Method::CopyChar => "copy-char",
            Method::CopySubstr => "copy-substr",
            Method::HallChar => "hall-char",
            Method::HallSubstr => "hall-substr",
        }
    }

    pub fn is_hallucination(self) -> bool {
        matches!(self, Method::HallChar | Method::HallSubstr)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub method: Method,
    pub count: usize,
    pub seed: u64,
    pub copy_tag: String,
    pub dedupe: bool,
    /// Redraw generated items whose lemma is a real lemma.
    pub forbid_real_lemmas: bool,
}

impl AugmentationSpec {
    pub fn new(method: Method, count: usize, seed: u64) -> Self {
        AugmentationSpec {
            method,
            count,
            seed,
            copy_tag: DEFAULT_COPY_TAG.to_owned(),
            dedupe: true,
            forbid_real_lemmas: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::AugmentationSpec("count must be at least 1".into()));
        }
        if self.copy_tag.is_empty() || self.copy_tag.contains([';', '\t', '\n', '\r']) {
            return Err(Error::AugmentationSpec(format!(
                "invalid copy tag {:?}",
                self.copy_tag
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextOptions {
    /// Fields harvested for the alphabet and the n-gram inventory.
    pub fields: Fields,
    /// Shortest MATCH run that counts as a stem span.
    pub min_stem_run: usize,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            fields: Fields::Both,
            min_stem_run: 1,
        }
    }
}

/// Sampling sources and length bounds harvested from one training set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenContext {
    pub alphabet: Alphabet,
    pub ngrams: NGramInventory,
    /// Code-point lengths of the training lemmata.
    pub word_bounds: LengthBounds,
    /// Lengths of the first stem span of every alignable training triple;
    /// `None` when no triple has a stem.
    pub stem_bounds: Option<LengthBounds>,
    pub min_stem_run: usize,
}

impl GenContext {
    pub fn from_training(train: &Dataset, opts: ContextOptions) -> Result<Self> {
        let alphabet = collect_alphabet(&[train], opts.fields)?;
        let ngrams = collect_ngrams(&[train], opts.fields)?;
        let word_bounds = lengths_to_bounds(train.triples.iter().map(|t| t.lemma.chars().count()))?;
        let first_spans: Vec<usize> = train
            .triples
            .iter()
            .filter_map(|t| analyze(&t.lemma, &t.form, opts.min_stem_run))
            .map(|a| a.stem.spans[0].len())
            .collect();
        let stem_bounds = lengths_to_bounds(first_spans).ok();
        Ok(GenContext {
            alphabet,
            ngrams,
            word_bounds,
            stem_bounds,
            min_stem_run: opts.min_stem_run.max(1),
        })
    }

    fn require_stem_bounds(&self) -> Result<LengthBounds> {
        self.stem_bounds.ok_or(Error::NoStemBounds)
    }
}

/// A synthesized word with the units drawn to build it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthWord {
    pub word: String,
    /// Units in draw order; their concatenation truncated to the word's
    /// length is the word.
    pub units: Vec<String>,
}

/// Draws a target length uniformly from `bounds`, then concatenates units
/// drawn uniformly with replacement until the length is reached, truncating
/// the last unit.
pub fn synth_word_traced<S, R>(source: &S, bounds: LengthBounds, rng: &mut R) -> SynthWord
where
    S: UnitSource + ?Sized,
    R: Rng + ?Sized,
{
    assert!(source.unit_count() > 0, "empty unit source");
    let target = rng.gen_range(bounds.min..=bounds.max);
    let mut word = String::new();
    let mut len = 0;
    let mut units = Vec::new();
    while len < target {
        let unit = source.unit(rng.gen_range(0..source.unit_count()));
        for c in unit.chars().take(target - len) {
            word.push(c);
            len += 1;
        }
        units.push(unit.into_owned());
    }
    SynthWord { word, units }
}

pub fn synth_word<S, R>(source: &S, bounds: LengthBounds, rng: &mut R) -> String
where
    S: UnitSource + ?Sized,
    R: Rng + ?Sized,
{
    synth_word_traced(source, bounds, rng).word
}

/// One `(L, [copy_tag], L)` triple per lemma, in order; duplicates collapse
/// when `spec.dedupe` is set. `spec.count` is not consulted.
pub fn gen_copy_lemmas<S: AsRef<str>>(lemmata: &[S], spec: &AugmentationSpec) -> Result<Dataset> {
    spec.validate()?;
    if lemmata.is_empty() {
        return Err(Error::EmptyLemmaList);
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for l in lemmata {
        let l = l.as_ref();
        if spec.dedupe && !seen.insert(l) {
            continue;
        }
        out.push(Triple::new(l, vec![spec.copy_tag.clone()], l)?);
    }
    Ok(Dataset::new(spec.method.name(), out))
}

/// Result of hallucinating one triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hallucination {
    pub triple: Triple,
    /// Stem strings of the base triple, one per template slot.
    pub original_stems: Vec<String>,
    /// Stem strings placed in the output, one per template slot.
    pub dummy_stems: Vec<String>,
}

/// Rebuilds `t` through its template with `dummy_stems` in the stem slots.
pub fn apply_dummy_stems(
    t: &Triple,
    analysis: &Analysis,
    dummy_stems: Vec<String>,
) -> Result<Hallucination> {
    let (lemma, form) = analysis.template.substitute(&dummy_stems)?;
    Ok(Hallucination {
        triple: Triple::new(lemma, t.tags.clone(), form)?,
        original_stems: analysis.stems(),
        dummy_stems,
    })
}

fn hall_char_with<R: Rng + ?Sized>(
    t: &Triple,
    analysis: &Analysis,
    ctx: &GenContext,
    rng: &mut R,
) -> Hallucination {
    let chars = ctx.alphabet.chars();
    let dummies = analysis
        .stem
        .spans
        .iter()
        .map(|sp| {
            (0..sp.len())
                .map(|_| chars[rng.gen_range(0..chars.len())])
                .collect()
        })
        .collect();
    apply_dummy_stems(t, analysis, dummies).expect("alphabet characters keep triples valid")
}

fn hall_substr_with<R: Rng + ?Sized>(
    t: &Triple,
    analysis: &Analysis,
    ctx: &GenContext,
    stem_bounds: LengthBounds,
    rng: &mut R,
) -> Hallucination {
    let mut stems = analysis.stems();
    stems[0] = synth_word(&ctx.ngrams, stem_bounds, rng);
    apply_dummy_stems(t, analysis, stems).expect("n-gram material keeps triples valid")
}

/// Replaces every stem span with same-length random alphabet strings;
/// `None` when the triple has no stem.
pub fn hallucinate_triple_char<R: Rng + ?Sized>(
    t: &Triple,
    ctx: &GenContext,
    rng: &mut R,
) -> Option<Hallucination> {
    let analysis = analyze(&t.lemma, &t.form, ctx.min_stem_run)?;
    Some(hall_char_with(t, &analysis, ctx, rng))
}

/// Replaces the first stem span with an n-gram word of length within the
/// context's stem bounds; `None` when the triple has no stem.
pub fn hallucinate_triple_substr<R: Rng + ?Sized>(
    t: &Triple,
    ctx: &GenContext,
    rng: &mut R,
) -> Result<Option<Hallucination>> {
    let bounds = ctx.require_stem_bounds()?;
    let Some(analysis) = analyze(&t.lemma, &t.form, ctx.min_stem_run) else {
        return Ok(None);
    };
    Ok(Some(hall_substr_with(t, &analysis, ctx, bounds, rng)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    CopyLemma,
    /// Dummy word with its unit trace.
    Synth {
        units: Vec<String>,
    },
    /// Index of the base triple in the source pool plus the stem swap.
    Hallucinated {
        base: usize,
        original_stems: Vec<String>,
        dummy_stems: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub triple: Triple,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GenStats {
    /// Candidate draws, including skips and redraws.
    pub attempts: usize,
    /// Base triples drawn that had no stem.
    pub skips: usize,
    /// Candidates rejected as duplicates or real lemmata and redrawn.
    pub redraws: usize,
    /// Items accepted despite still being rejected after `MAX_REDRAWS`.
    pub accepted_rejects: usize,
}

#[derive(Debug, Clone)]
pub struct Augmented {
    /// The training set followed by the generated triples.
    pub dataset: Dataset,
    pub generated: Vec<Generated>,
    pub stats: GenStats,
}

impl Augmented {
    pub fn generated_dataset(&self, label: &str) -> Dataset {
        Dataset::new(
            label,
            self.generated.iter().map(|g| g.triple.clone()).collect(),
        )
    }
}

struct Acceptor {
    dedupe: bool,
    seen: HashSet<Triple>,
    real: Option<HashSet<String>>,
}

impl Acceptor {
    fn rejects(&self, t: &Triple) -> bool {
        (self.dedupe && self.seen.contains(t))
            || self.real.as_ref().is_some_and(|r| r.contains(&t.lemma))
    }
}

/// Appends `spec.count` generated triples to `train` (for `copy-lemmas`, one
/// per distinct lemma of the pool instead).
///
/// `source_pool` defaults to `train`. Hallucination draws base triples from it
/// uniformly with replacement, redrawing when a triple has no stem; more than
/// `ATTEMPTS_PER_ITEM * count` draws in total is an error.
pub fn augment(
    train: &Dataset,
    spec: &AugmentationSpec,
    ctx: &GenContext,
    source_pool: Option<&Dataset>,
) -> Result<Augmented> {
    spec.validate()?;
    let pool = source_pool.unwrap_or(train);
    if pool.is_empty() && (spec.method.is_hallucination() || spec.method == Method::CopyLemmas) {
        return Err(Error::EmptySourcePool);
    }

    let mut stats = GenStats::default();
    let generated = match spec.method {
        Method::CopyLemmas => {
            let copies = gen_copy_lemmas(&pool.lemmata(), spec)?;
            stats.attempts = copies.len();
            copies
                .triples
                .into_iter()
                .map(|triple| Generated {
                    triple,
                    provenance: Provenance::CopyLemma,
                })
                .collect()
        }
        method => {
            let real = spec.forbid_real_lemmas.then(|| {
                train
                    .triples
                    .iter()
                    .chain(&pool.triples)
                    .map(|t| t.lemma.clone())
                    .collect()
            });
            let mut acceptor = Acceptor {
                dedupe: spec.dedupe,
                seen: HashSet::new(),
                real,
            };
            match method {
                Method::CopyChar => {
                    copy_dummy_items(ctx, spec, &ctx.alphabet, &mut acceptor, &mut stats)
                }
                Method::CopySubstr => {
                    copy_dummy_items(ctx, spec, &ctx.ngrams, &mut acceptor, &mut stats)
                }
                _ => gen_hallucinations(pool, ctx, spec, &mut acceptor, &mut stats)?,
            }
        }
    };

    if stats.accepted_rejects > 0 {
        log::warn!(
            "{}: accepted {} duplicate or forbidden items after {MAX_REDRAWS} redraws",
            spec.method,
            stats.accepted_rejects
        );
    }
    let mut dataset = train.clone();
    dataset
        .triples
        .extend(generated.iter().map(|g| g.triple.clone()));
    Ok(Augmented {
        dataset,
        generated,
        stats,
    })
}

/// `spec.count` copy triples over dummy words drawn from the alphabet
/// (`copy-char`) or the n-gram inventory (`copy-substr`).
pub fn gen_copy_dummies(ctx: &GenContext, spec: &AugmentationSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut acceptor = Acceptor {
        dedupe: spec.dedupe,
        seen: HashSet::new(),
        real: None,
    };
    let mut stats = GenStats::default();
    let items = match spec.method {
        Method::CopyChar => copy_dummy_items(ctx, spec, &ctx.alphabet, &mut acceptor, &mut stats),
        Method::CopySubstr => copy_dummy_items(ctx, spec, &ctx.ngrams, &mut acceptor, &mut stats),
        other => {
            return Err(Error::AugmentationSpec(format!(
                "{other} does not generate dummy copy words"
            )))
        }
    };
    Ok(Dataset::new(
        spec.method.name(),
        items.into_iter().map(|g| g.triple).collect(),
    ))
}

fn copy_dummy_items<S: UnitSource + ?Sized>(
    ctx: &GenContext,
    spec: &AugmentationSpec,
    source: &S,
    acceptor: &mut Acceptor,
    stats: &mut GenStats,
) -> Vec<Generated> {
    (0..spec.count)
        .map(|i| {
            let mut rng = rng::item_stream(spec.seed, i as u64);
            let mut redraws = 0;
            let item = loop {
                stats.attempts += 1;
                let synth = synth_word_traced(source, ctx.word_bounds, &mut rng);
                let triple =
                    Triple::new(synth.word.clone(), vec![spec.copy_tag.clone()], synth.word)
                        .expect("unit material keeps triples valid");
                let rejected = acceptor.rejects(&triple);
                if rejected && redraws < MAX_REDRAWS {
                    redraws += 1;
                    stats.redraws += 1;
                    continue;
                }
                stats.accepted_rejects += usize::from(rejected);
                break Generated {
                    triple,
                    provenance: Provenance::Synth { units: synth.units },
                };
            };
            acceptor.seen.insert(item.triple.clone());
            item
        })
        .collect()
}

fn gen_hallucinations(
    pool: &Dataset,
    ctx: &GenContext,
    spec: &AugmentationSpec,
    acceptor: &mut Acceptor,
    stats: &mut GenStats,
) -> Result<Vec<Generated>> {
    let stem_bounds = match spec.method {
        Method::HallSubstr => Some(ctx.require_stem_bounds()?),
        _ => None,
    };
    let analyses: Vec<Option<Analysis>> = pool
        .triples
        .iter()
        .map(|t| analyze(&t.lemma, &t.form, ctx.min_stem_run))
        .collect();
    let budget = ATTEMPTS_PER_ITEM.saturating_mul(spec.count);
    let mut out = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let mut rng = rng::item_stream(spec.seed, i as u64);
        let mut redraws = 0;
        let item = loop {
            if stats.attempts >= budget {
                return Err(Error::BudgetExhausted {
                    produced: out.len(),
                    requested: spec.count,
                    attempts: stats.attempts,
                    skip_rate: 100.0 * stats.skips as f64 / stats.attempts.max(1) as f64,
                });
            }
            stats.attempts += 1;
            let base = rng.gen_range(0..pool.len());
            let Some(analysis) = &analyses[base] else {
                stats.skips += 1;
                continue;
            };
            let t = &pool.triples[base];
            let h = match stem_bounds {
                Some(bounds) => hall_substr_with(t, analysis, ctx, bounds, &mut rng),
                None => hall_char_with(t, analysis, ctx, &mut rng),
            };
            let rejected = acceptor.rejects(&h.triple);
            if rejected && redraws < MAX_REDRAWS {
                redraws += 1;
                stats.redraws += 1;
                continue;
            }
            stats.accepted_rejects += usize::from(rejected);
            break Generated {
                triple: h.triple,
                provenance: Provenance::Hallucinated {
                    base,
                    original_stems: h.original_stems,
                    dummy_stems: h.dummy_stems,
                },
            };
        };
        acceptor.seen.insert(item.triple.clone());
        out.push(item);
    }
    Ok(out)
}
