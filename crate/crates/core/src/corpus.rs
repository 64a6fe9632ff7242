//! Inflection datasets: TSV ingestion and serialization, paradigm
//! reconstruction, overlap statistics, and harvesting of the alphabets,
//! n-gram inventories and length bounds used by the generators.
//!
//! Files hold one triple per line: `lemma TAB form TAB tags`, where tags are
//! joined with `;`. This is the layout of the CoNLL-SIGMORPHON shared-task
//! files. "Characters" are Unicode scalar values throughout.

use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub const TAG_SEPARATOR: char = ';';

/// One `(lemma, tags, form)` inflection example.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub lemma: String,
    pub tags: Vec<String>,
    pub form: String,
}

fn check_word(what: &str, w: &str) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidTriple(format!("empty {what}")));
    }
    if w.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidTriple(format!(
            "{what} {w:?} contains a tab or newline"
        )));
    }
    Ok(())
}

impl Triple {
    /// Builds a triple, enforcing the field invariants.
    pub fn new(
        lemma: impl Into<String>,
        tags: Vec<String>,
        form: impl Into<String>,
    ) -> Result<Self> {
        let t = Triple {
            lemma: lemma.into(),
            tags,
            form: form.into(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        check_word("lemma", &self.lemma)?;
        check_word("form", &self.form)?;
        if self.tags.is_empty() {
            return Err(Error::InvalidTriple("empty tag list".into()));
        }
        for tag in &self.tags {
            if tag.is_empty() {
                return Err(Error::InvalidTriple("empty tag".into()));
            }
            if tag.contains([TAG_SEPARATOR, '\t', '\n', '\r']) {
                return Err(Error::InvalidTriple(format!(
                    "tag {tag:?} contains ';', a tab or a newline"
                )));
            }
        }
        Ok(())
    }

    /// Tags joined with `;` in their original order.
    pub fn tag_string(&self) -> String {
        self.tags.join(";")
    }
}

/// Order-insensitive key for a tag set: the sorted tags joined with `;`.
pub fn tag_key(tags: &[String]) -> String {
    let mut sorted: Vec<&str> = tags.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    sorted.join(";")
}

/// An ordered list of triples with a free-form label such as `train`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub label: String,
    pub triples: Vec<Triple>,
}

impl Dataset {
    pub fn new(label: impl Into<String>, triples: Vec<Triple>) -> Self {
        Dataset {
            label: label.into(),
            triples,
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Distinct lemmata in order of first appearance.
    pub fn lemmata(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.triples
            .iter()
            .map(|t| t.lemma.as_str())
            .filter(|l| seen.insert(*l))
            .collect()
    }

    fn lemma_set(&self) -> HashSet<&str> {
        self.triples.iter().map(|t| t.lemma.as_str()).collect()
    }

    /// Concatenates several datasets under a new label.
    pub fn concat<'a>(
        label: impl Into<String>,
        parts: impl IntoIterator<Item = &'a Dataset>,
    ) -> Self {
        Dataset {
            label: label.into(),
            triples: parts
                .into_iter()
                .flat_map(|d| d.triples.iter().cloned())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Fail on the first malformed line instead of skipping it.
    pub strict: bool,
    /// Apply NFC normalization to every field.
    pub nfc: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub dataset: Dataset,
    /// Lines skipped in lenient mode.
    pub skipped: Vec<ParseWarning>,
}

fn parse_line(line: &str, nfc: bool) -> std::result::Result<Triple, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(format!("expected 3 columns, found {}", fields.len()));
    }
    let norm = |s: &str| -> String {
        if nfc {
            s.nfc().collect()
        } else {
            s.to_owned()
        }
    };
    let tags = fields[2].split(TAG_SEPARATOR).map(norm).collect();
    Triple::new(norm(fields[0]), tags, norm(fields[1])).map_err(|e| match e {
        Error::InvalidTriple(m) => m,
        other => other.to_string(),
    })
}

/// Parses a UTF-8 TSV byte stream. Blank lines are ignored.
///
/// In strict mode the first malformed line is an error carrying its
/// 1-based line number; otherwise malformed lines are skipped and reported.
pub fn parse_tsv(bytes: &[u8], label: &str, opts: ParseOptions) -> Result<Parsed> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Decode {
        offset: e.valid_up_to(),
    })?;
    let mut triples = Vec::new();
    let mut skipped = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        match parse_line(line, opts.nfc) {
            Ok(t) => triples.push(t),
            Err(message) if opts.strict => {
                return Err(Error::Parse {
                    line: i + 1,
                    message,
                })
            }
            Err(message) => {
                log::warn!("{label}: skipping line {}: {message}", i + 1);
                skipped.push(ParseWarning {
                    line: i + 1,
                    message,
                });
            }
        }
    }
    Ok(Parsed {
        dataset: Dataset::new(label, triples),
        skipped,
    })
}

/// Serializes a dataset as `lemma TAB form TAB tags` lines, each ending in `\n`.
pub fn write_tsv(d: &Dataset) -> Vec<u8> {
    let mut out = String::new();
    for t in &d.triples {
        out.push_str(&t.lemma);
        out.push('\t');
        out.push_str(&t.form);
        out.push('\t');
        out.push_str(&t.tag_string());
        out.push('\n');
    }
    out.into_bytes()
}

/// All triples sharing one lemma: an inflection table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paradigm {
    pub lemma: String,
    pub triples: Vec<Triple>,
}

/// Groups triples by exact lemma, ordered by first appearance.
pub fn build_paradigms(d: &Dataset) -> Vec<Paradigm> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut out: Vec<Paradigm> = Vec::new();
    for t in &d.triples {
        let slot = *index.entry(t.lemma.as_str()).or_insert_with(|| {
            out.push(Paradigm {
                lemma: t.lemma.clone(),
                triples: Vec::new(),
            });
            out.len() - 1
        });
        out[slot].triples.push(t.clone());
    }
    out
}

/// A percentage held as an integer number of hundredths, e.g. `2453` is 24.53%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Percent(pub u32);

impl Percent {
    /// `100 * num / den` rounded half-up to two decimals; zero when `den` is zero.
    pub fn from_ratio(num: usize, den: usize) -> Percent {
        if den == 0 {
            return Percent(0);
        }
        let (num, den) = (num as u128, den as u128);
        Percent(((20_000 * num + den) / (2 * den)) as u32)
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{}.{:02}", self.0 / 100, self.0 % 100);
        f.pad(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub reference: String,
    pub percent: Percent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub label: String,
    pub triple_count: usize,
    pub lemma_count: usize,
    /// Share of this dataset's distinct lemmata found in each reference,
    /// in reference order.
    pub overlap_vs: Vec<Overlap>,
}

impl DatasetStats {
    pub fn overlap_with(&self, reference: &str) -> Option<Percent> {
        self.overlap_vs
            .iter()
            .find(|o| o.reference == reference)
            .map(|o| o.percent)
    }
}

pub fn compute_stats(d: &Dataset, references: &[&Dataset]) -> DatasetStats {
    let mine = d.lemma_set();
    let overlap_vs = references
        .iter()
        .map(|r| {
            let theirs = r.lemma_set();
            let shared = mine.iter().filter(|l| theirs.contains(*l)).count();
            Overlap {
                reference: r.label.clone(),
                percent: Percent::from_ratio(shared, mine.len()),
            }
        })
        .collect();
    DatasetStats {
        label: d.label.clone(),
        triple_count: d.len(),
        lemma_count: mine.len(),
        overlap_vs,
    }
}

/// Which triple fields feed alphabet and n-gram harvesting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fields {
    Lemma,
    Form,
    #[default]
    Both,
}

impl Fields {
    fn words<'a>(self, d: &'a Dataset) -> impl Iterator<Item = &'a str> + 'a {
        d.triples.iter().flat_map(move |t| {
            let lemma = matches!(self, Fields::Lemma | Fields::Both).then_some(t.lemma.as_str());
            let form = matches!(self, Fields::Form | Fields::Both).then_some(t.form.as_str());
            lemma.into_iter().chain(form)
        })
    }
}

impl FromStr for Fields {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lemma" => Ok(Fields::Lemma),
            "form" => Ok(Fields::Form),
            "both" => Ok(Fields::Both),
            other => Err(format!(
                "unknown field selector {other:?} (lemma, form, both)"
            )),
        }
    }
}

impl fmt::Display for Fields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fields::Lemma => "lemma",
            Fields::Form => "form",
            Fields::Both => "both",
        })
    }
}

/// A pool of sampling units for word synthesis.
pub trait UnitSource {
    fn unit_count(&self) -> usize;
    fn unit(&self, index: usize) -> Cow<'_, str>;
}

/// The set of characters seen in a dataset, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    chars: Vec<char>,
}

impl Alphabet {
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Result<Self> {
        let set: BTreeSet<char> = chars.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Alphabet {
            chars: set.into_iter().collect(),
        })
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.chars.binary_search(&c).is_ok()
    }
}

impl UnitSource for Alphabet {
    fn unit_count(&self) -> usize {
        self.chars.len()
    }

    fn unit(&self, index: usize) -> Cow<'_, str> {
        Cow::Owned(self.chars[index].to_string())
    }
}

/// Distinct 2-, 3- and 4-grams of code points, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramInventory {
    grams: Vec<String>,
}

pub const NGRAM_SIZES: [usize; 3] = [2, 3, 4];

impl NGramInventory {
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for w in words {
            let chars: Vec<char> = w.chars().collect();
            for n in NGRAM_SIZES {
                for win in chars.windows(n) {
                    set.insert(win.iter().collect::<String>());
                }
            }
        }
        if set.is_empty() {
            return Err(Error::EmptyNGramInventory);
        }
        Ok(NGramInventory {
            grams: set.into_iter().collect(),
        })
    }

    pub fn grams(&self) -> &[String] {
        &self.grams
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn contains(&self, gram: &str) -> bool {
        self.grams
            .binary_search_by(|g| g.as_str().cmp(gram))
            .is_ok()
    }
}

impl UnitSource for NGramInventory {
    fn unit_count(&self) -> usize {
        self.grams.len()
    }

    fn unit(&self, index: usize) -> Cow<'_, str> {
        Cow::Borrowed(&self.grams[index])
    }
}

pub fn collect_alphabet(sources: &[&Dataset], fields: Fields) -> Result<Alphabet> {
    Alphabet::from_chars(
        sources
            .iter()
            .flat_map(|d| fields.words(d))
            .flat_map(str::chars),
    )
}

pub fn collect_ngrams(sources: &[&Dataset], fields: Fields) -> Result<NGramInventory> {
    NGramInventory::from_words(sources.iter().flat_map(|d| fields.words(d)))
}

/// Inclusive code-point length range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBounds {
    pub min: usize,
    pub max: usize,
}

impl LengthBounds {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min == 0 || min > max {
            return Err(Error::LengthBounds(format!("invalid range [{min}, {max}]")));
        }
        Ok(LengthBounds { min, max })
    }

    pub fn contains(&self, len: usize) -> bool {
        (self.min..=self.max).contains(&len)
    }
}

pub fn length_bounds<S: AsRef<str>>(words: &[S]) -> Result<LengthBounds> {
    lengths_to_bounds(words.iter().map(|w| w.as_ref().chars().count()))
}

pub(crate) fn lengths_to_bounds(lengths: impl IntoIterator<Item = usize>) -> Result<LengthBounds> {
    let mut it = lengths.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::LengthBounds("empty word list".into()))?;
    let (min, max) = it.fold((first, first), |(lo, hi), n| (lo.min(n), hi.max(n)));
    if min == 0 {
        return Err(Error::LengthBounds("empty word".into()));
    }
    LengthBounds::new(min, max)
}
