//! Exact-match scoring, run aggregation, and a suffix-rule baseline inflector.
//!
//! The baseline learns `lemma suffix -> form suffix` rewrites per tag set from
//! the aligned training triples and applies the longest matching one. It is a
//! deterministic stand-in that lets the pipeline run end to end without a
//! neural model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::align::align;
use crate::corpus::{tag_key, Dataset, Triple};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub lemma: String,
    pub tags: Vec<String>,
    pub predicted_form: String,
}

impl Prediction {
    pub fn from_triple(t: Triple) -> Self {
        Prediction {
            lemma: t.lemma,
            tags: t.tags,
            predicted_form: t.form,
        }
    }

    /// The prediction as a triple, for writing in the corpus TSV layout.
    pub fn to_triple(&self) -> Result<Triple> {
        Triple::new(&self.lemma, self.tags.clone(), &self.predicted_form)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub n: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub correct: usize,
    /// Keyed by the sorted, `;`-joined tag set.
    pub per_tagset: BTreeMap<String, Tally>,
}

impl EvalReport {
    /// `correct / n`, or 0 for an empty report.
    pub fn accuracy(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.correct as f64 / self.n as f64
        }
    }
}

/// Compares predictions with gold forms position by position.
pub fn score(gold: &Dataset, preds: &[Prediction]) -> Result<EvalReport> {
    if gold.len() != preds.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            preds: preds.len(),
        });
    }
    let mut report = EvalReport::default();
    for (g, p) in gold.triples.iter().zip(preds) {
        let ok = g.form == p.predicted_form;
        report.n += 1;
        report.correct += usize::from(ok);
        let tally = report.per_tagset.entry(tag_key(&g.tags)).or_default();
        tally.n += 1;
        tally.correct += usize::from(ok);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdKind {
    /// Divisor `n - 1`.
    #[default]
    Sample,
    /// Divisor `n`.
    Population,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub mean: f64,
    pub std: f64,
    pub values: Vec<f64>,
}

/// Mean and sample standard deviation; a single value has std 0.
pub fn aggregate(values: &[f64]) -> Result<AggregateReport> {
    aggregate_with(values, StdKind::Sample)
}

pub fn aggregate_with(values: &[f64], kind: StdKind) -> Result<AggregateReport> {
    if values.is_empty() {
        return Err(Error::EmptyValues);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let all_equal = values.iter().all(|v| *v == values[0]);
    let std = if all_equal {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let div = match kind {
            StdKind::Sample => n - 1.0,
            StdKind::Population => n,
        };
        (ss / div).sqrt()
    };
    // keep the mean inside [min, max] despite rounding
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(AggregateReport {
        mean: mean.clamp(lo, hi),
        std,
        values: values.to_vec(),
    })
}

/// Suffix rewrites observed in training, with counts:
/// tag-set key -> lemma suffix -> form suffix -> count.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RuleModel {
    pub rules: BTreeMap<String, BTreeMap<String, BTreeMap<String, usize>>>,
}

impl RuleModel {
    pub fn rule_count(&self, tags: &[String], lemma_suffix: &str, form_suffix: &str) -> usize {
        self.rules
            .get(&tag_key(tags))
            .and_then(|m| m.get(lemma_suffix))
            .and_then(|m| m.get(form_suffix))
            .copied()
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.rules
            .values()
            .flat_map(|m| m.values())
            .map(BTreeMap::len)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The `(lemma suffix, form suffix)` pairs a triple contributes: one per
/// split point inside the leading MATCH run of its alignment (lemma and form
/// agree on everything before the split), always including the whole-word
/// split.
pub fn suffix_rules(t: &Triple) -> Vec<(String, String)> {
    let alignment = align(&t.lemma, &t.form);
    let shared = alignment.ops().iter().take_while(|o| o.is_match()).count();
    let lc: Vec<char> = t.lemma.chars().collect();
    let fc: Vec<char> = t.form.chars().collect();
    (0..=shared)
        .map(|k| (lc[k..].iter().collect(), fc[k..].iter().collect()))
        .collect()
}

pub fn train_rules(train: &Dataset) -> Result<RuleModel> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut model = RuleModel::default();
    for t in &train.triples {
        let by_suffix = model.rules.entry(tag_key(&t.tags)).or_default();
        for (ls, fs) in suffix_rules(t) {
            *by_suffix.entry(ls).or_default().entry(fs).or_default() += 1;
        }
    }
    Ok(model)
}

/// Applies the longest matching lemma-suffix rule for the tag set; among
/// rewrites of that suffix the most frequent wins, then the smallest output.
/// Without an applicable rule the lemma is returned unchanged.
pub fn predict(model: &RuleModel, lemma: &str, tags: &[String]) -> String {
    let Some(by_suffix) = model.rules.get(&tag_key(tags)) else {
        return lemma.to_owned();
    };
    let chars: Vec<char> = lemma.chars().collect();
    for cut in 0..=chars.len() {
        let suffix: String = chars[cut..].iter().collect();
        let Some(rewrites) = by_suffix.get(&suffix) else {
            continue;
        };
        let stem: String = chars[..cut].iter().collect();
        return rewrites
            .iter()
            .map(|(fs, &count)| (count, format!("{stem}{fs}")))
            .min_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)))
            .map(|(_, out)| out)
            .expect("rewrite maps are never empty");
    }
    lemma.to_owned()
}

/// Predicts a form for every triple of `eval`, ignoring its gold forms.
pub fn predict_dataset(model: &RuleModel, eval: &Dataset) -> Vec<Prediction> {
    eval.triples
        .iter()
        .map(|t| Prediction {
            lemma: t.lemma.clone(),
            tags: t.tags.clone(),
            predicted_form: predict(model, &t.lemma, &t.tags),
        })
        .collect()
}
