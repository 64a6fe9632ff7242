//! Character-level lemma/form alignment, stem extraction and affix templates.
//!
//! The aligner is a unit-cost edit-distance alignment. Among all minimal-cost
//! alignments it returns the one whose operation sequence, read left to right,
//! prefers MATCH over SUBST over DELETE over INSERT at the first point where
//! candidates differ. The stem is the list of maximal MATCH runs; the affix
//! template is everything around them.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditOp {
    Match(char),
    Subst(char, char),
    /// Lemma-only symbol.
    Delete(char),
    /// Form-only symbol.
    Insert(char),
}

impl EditOp {
    pub fn lemma_char(self) -> Option<char> {
        match self {
            EditOp::Match(c) | EditOp::Delete(c) | EditOp::Subst(c, _) => Some(c),
            EditOp::Insert(_) => None,
        }
    }

    pub fn form_char(self) -> Option<char> {
        match self {
            EditOp::Match(c) | EditOp::Insert(c) | EditOp::Subst(_, c) => Some(c),
            EditOp::Delete(_) => None,
        }
    }

    pub fn is_match(self) -> bool {
        matches!(self, EditOp::Match(_))
    }

    pub fn cost(self) -> usize {
        usize::from(!self.is_match())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alignment {
    ops: Vec<EditOp>,
}

impl Alignment {
    pub fn from_ops(ops: Vec<EditOp>) -> Self {
        Alignment { ops }
    }

    pub fn ops(&self) -> &[EditOp] {
        &self.ops
    }

    pub fn lemma(&self) -> String {
        self.ops.iter().filter_map(|o| o.lemma_char()).collect()
    }

    pub fn form(&self) -> String {
        self.ops.iter().filter_map(|o| o.form_char()).collect()
    }

    /// Number of non-MATCH operations.
    pub fn cost(&self) -> usize {
        self.ops.iter().map(|o| o.cost()).sum()
    }

    /// Two display rows (lemma over form), `-` marking gaps.
    pub fn render_rows(&self) -> (String, String) {
        let top = self
            .ops
            .iter()
            .map(|o| o.lemma_char().unwrap_or('-'))
            .collect();
        let bottom = self
            .ops
            .iter()
            .map(|o| o.form_char().unwrap_or('-'))
            .collect();
        (top, bottom)
    }
}

/// Anything that can align a lemma with a form.
pub trait Aligner {
    fn align(&self, lemma: &str, form: &str) -> Alignment;
}

/// Unit-cost edit-distance aligner with deterministic left-to-right tie-breaking.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitCostAligner;

impl Aligner for UnitCostAligner {
    fn align(&self, lemma: &str, form: &str) -> Alignment {
        let a: Vec<char> = lemma.chars().collect();
        let b: Vec<char> = form.chars().collect();
        let (n, m) = (a.len(), b.len());
        let w = m + 1;
        // dist[i * w + j] = edit distance between a[i..] and b[j..]
        let mut dist = vec![0u32; (n + 1) * w];
        for i in (0..=n).rev() {
            for j in (0..=m).rev() {
                dist[i * w + j] = if i == n {
                    (m - j) as u32
                } else if j == m {
                    (n - i) as u32
                } else {
                    let diag = dist[(i + 1) * w + j + 1] + u32::from(a[i] != b[j]);
                    let del = dist[(i + 1) * w + j] + 1;
                    let ins = dist[i * w + j + 1] + 1;
                    diag.min(del).min(ins)
                };
            }
        }

        let mut ops = Vec::with_capacity(n.max(m));
        let (mut i, mut j) = (0, 0);
        while i < n || j < m {
            let here = dist[i * w + j];
            if i < n && j < m && here == dist[(i + 1) * w + j + 1] + u32::from(a[i] != b[j]) {
                ops.push(if a[i] == b[j] {
                    EditOp::Match(a[i])
                } else {
                    EditOp::Subst(a[i], b[j])
                });
                i += 1;
                j += 1;
            } else if i < n && here == dist[(i + 1) * w + j] + 1 {
                ops.push(EditOp::Delete(a[i]));
                i += 1;
            } else {
                ops.push(EditOp::Insert(b[j]));
                j += 1;
            }
        }
        Alignment { ops }
    }
}

/// Aligns with [`UnitCostAligner`].
pub fn align(lemma: &str, form: &str) -> Alignment {
    UnitCostAligner.align(lemma, form)
}

/// One stem region: half-open code-point ranges in the lemma and the form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Span {
    pub lemma: Range<usize>,
    pub form: Range<usize>,
}

impl Span {
    pub fn len(&self) -> usize {
        self.lemma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemma.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StemSpans {
    pub spans: Vec<Span>,
}

impl StemSpans {
    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_discontinuous(&self) -> bool {
        self.spans.len() > 1
    }

    /// The stem strings, read from the lemma.
    pub fn stems(&self, lemma: &str) -> Vec<String> {
        let chars: Vec<char> = lemma.chars().collect();
        self.spans
            .iter()
            .map(|s| chars[s.lemma.clone()].iter().collect())
            .collect()
    }
}

/// Maximal MATCH runs, in order.
pub fn extract_stem(a: &Alignment) -> StemSpans {
    extract_stem_min_run(a, 1)
}

/// Maximal MATCH runs of at least `min_run` characters.
pub fn extract_stem_min_run(a: &Alignment, min_run: usize) -> StemSpans {
    let min_run = min_run.max(1);
    let mut spans = Vec::new();
    let (mut li, mut fi) = (0usize, 0usize);
    let mut run: Option<(usize, usize)> = None;
    let mut close = |run: &mut Option<(usize, usize)>, li: usize, fi: usize| {
        if let Some((ls, fs)) = run.take() {
            if li - ls >= min_run {
                spans.push(Span {
                    lemma: ls..li,
                    form: fs..fi,
                });
            }
        }
    };
    for op in a.ops() {
        if op.is_match() {
            run.get_or_insert((li, fi));
        } else {
            close(&mut run, li, fi);
        }
        li += usize::from(op.lemma_char().is_some());
        fi += usize::from(op.form_char().is_some());
    }
    close(&mut run, li, fi);
    StemSpans { spans }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Piece {
    Literal(String),
    /// Placeholder for stem span `i`.
    Stem(usize),
}

/// Lemma-side and form-side residue around the stem slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffixTemplate {
    pub lemma: Vec<Piece>,
    pub form: Vec<Piece>,
    slots: usize,
}

fn pieces(chars: &[char], ranges: impl Iterator<Item = Range<usize>>) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut pos = 0;
    for (slot, r) in ranges.enumerate() {
        if r.start > pos {
            out.push(Piece::Literal(chars[pos..r.start].iter().collect()));
        }
        out.push(Piece::Stem(slot));
        pos = r.end;
    }
    if pos < chars.len() {
        out.push(Piece::Literal(chars[pos..].iter().collect()));
    }
    out
}

fn check_spans(lemma: &[char], form: &[char], s: &StemSpans) -> Result<()> {
    let (mut lpos, mut fpos) = (0, 0);
    for (i, sp) in s.spans.iter().enumerate() {
        let bad = |why: &str| Err(Error::InvalidSpans(format!("span {i}: {why}")));
        if sp.lemma.is_empty() || sp.lemma.len() != sp.form.len() {
            return bad("empty or unequal sides");
        }
        if sp.lemma.start < lpos || sp.form.start < fpos {
            return bad("overlapping or out of order");
        }
        if sp.lemma.end > lemma.len() || sp.form.end > form.len() {
            return bad("out of range");
        }
        if lemma[sp.lemma.clone()] != form[sp.form.clone()] {
            return bad("lemma and form material differ");
        }
        lpos = sp.lemma.end;
        fpos = sp.form.end;
    }
    Ok(())
}

pub fn build_template(lemma: &str, form: &str, s: &StemSpans) -> Result<AffixTemplate> {
    if s.is_empty() {
        return Err(Error::NoStem);
    }
    let lc: Vec<char> = lemma.chars().collect();
    let fc: Vec<char> = form.chars().collect();
    check_spans(&lc, &fc, s)?;
    Ok(AffixTemplate {
        lemma: pieces(&lc, s.spans.iter().map(|sp| sp.lemma.clone())),
        form: pieces(&fc, s.spans.iter().map(|sp| sp.form.clone())),
        slots: s.len(),
    })
}

fn fill(pieces: &[Piece], stems: &[&str]) -> String {
    pieces
        .iter()
        .map(|p| match p {
            Piece::Literal(s) => s.as_str(),
            Piece::Stem(i) => stems[*i],
        })
        .collect()
}

impl AffixTemplate {
    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Fills the stem slots, returning the new `(lemma, form)`.
    pub fn substitute<S: AsRef<str>>(&self, stems: &[S]) -> Result<(String, String)> {
        if stems.len() != self.slots {
            return Err(Error::StemArity {
                expected: self.slots,
                got: stems.len(),
            });
        }
        let stems: Vec<&str> = stems.iter().map(AsRef::as_ref).collect();
        Ok((fill(&self.lemma, &stems), fill(&self.form, &stems)))
    }
}

impl fmt::Display for AffixTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |ps: &[Piece]| -> String {
            ps.iter()
                .map(|p| match p {
                    Piece::Literal(s) => s.clone(),
                    Piece::Stem(i) => format!("<{i}>"),
                })
                .collect()
        };
        write!(f, "{} -> {}", show(&self.lemma), show(&self.form))
    }
}

/// Marks the given ranges of `word` with square brackets, e.g. `ge[s]u[ngen]`.
pub fn bracket(word: &str, ranges: impl IntoIterator<Item = Range<usize>>) -> String {
    let chars: Vec<char> = word.chars().collect();
    let mut out = String::new();
    let mut pos = 0;
    for r in ranges {
        out.extend(&chars[pos..r.start]);
        out.push('[');
        out.extend(&chars[r.clone()]);
        out.push(']');
        pos = r.end;
    }
    out.extend(&chars[pos..]);
    out
}

/// Alignment, stem and template of one lemma/form pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub alignment: Alignment,
    pub stem: StemSpans,
    pub template: AffixTemplate,
}

impl Analysis {
    pub fn stems(&self) -> Vec<String> {
        self.stem.stems(&self.alignment.lemma())
    }
}

/// Aligns, extracts the stem and builds the template; `None` when the pair
/// has no stem run of at least `min_run` characters.
pub fn analyze(lemma: &str, form: &str, min_run: usize) -> Option<Analysis> {
    let alignment = align(lemma, form);
    let stem = extract_stem_min_run(&alignment, min_run);
    let template = build_template(lemma, form, &stem).ok()?;
    Some(Analysis {
        alignment,
        stem,
        template,
    })
}
