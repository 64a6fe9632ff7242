//! Lemma-disjoint ("wug") splits and cross-validation folds.
//!
//! The unit of assignment is the paradigm, so every lemma lands in exactly
//! one part and evaluation lemmata are never seen in training.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Paradigm};
use crate::error::{Error, Result};
use crate::rng;

pub type Rational = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Train,
    Dev,
    Test,
}

impl Part {
    pub fn name(self) -> &'static str {
        match self {
            Part::Train => "train",
            Part::Dev => "dev",
            Part::Test => "test",
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Train/dev/test ratios (exact, summing to one) plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    ratios: [Rational; 3],
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::from_weights([7, 1, 2], 0).expect("7:1:2 is valid")
    }
}

impl SplitSpec {
    /// `ratios` are (train, dev, test) and must sum to exactly one.
    pub fn new(ratios: [Rational; 3], seed: u64) -> Result<Self> {
        let sum = ratios.iter().fold(Rational::from_integer(0), |a, &b| a + b);
        if sum != Rational::from_integer(1) {
            return Err(Error::SplitSpec(format!("ratios sum to {sum}, not 1")));
        }
        Ok(SplitSpec { ratios, seed })
    }

    /// Integer weights such as `[7, 1, 2]`, normalized to sum to one.
    pub fn from_weights(weights: [u64; 3], seed: u64) -> Result<Self> {
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return Err(Error::SplitSpec("all weights are zero".into()));
        }
        SplitSpec::new(weights.map(|w| Rational::new(w, total)), seed)
    }

    /// Parses `train:dev:test` where each component is an integer, a
    /// fraction `a/b` or a decimal; the components are normalized by their sum.
    pub fn parse_ratios(s: &str, seed: u64) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::SplitSpec(format!(
                "expected train:dev:test, got {s:?}"
            )));
        }
        let mut vals = [Rational::from_integer(0); 3];
        for (slot, p) in vals.iter_mut().zip(&parts) {
            *slot = parse_rational(p.trim())
                .ok_or_else(|| Error::SplitSpec(format!("bad ratio component {p:?}")))?;
        }
        let total = vals.iter().fold(Rational::from_integer(0), |a, &b| a + b);
        if total == Rational::from_integer(0) {
            return Err(Error::SplitSpec("all ratios are zero".into()));
        }
        SplitSpec::new(vals.map(|v| v / total), seed)
    }

    pub fn ratios(&self) -> [Rational; 3] {
        self.ratios
    }

    pub fn ratio(&self, part: Part) -> Rational {
        match part {
            Part::Train => self.ratios[0],
            Part::Dev => self.ratios[1],
            Part::Test => self.ratios[2],
        }
    }

    /// Part sizes (train, dev, test) for `n` paradigms: test and dev are
    /// `r * n` rounded half-up, train takes the remainder.
    pub fn part_sizes(&self, n: usize) -> Result<[usize; 3]> {
        let test = round_half_up(self.ratio(Part::Test), n);
        let dev = round_half_up(self.ratio(Part::Dev), n);
        if test + dev > n {
            return Err(Error::TooFewParadigms(format!(
                "{n} paradigms cannot hold {dev} dev and {test} test paradigms"
            )));
        }
        let sizes = [n - test - dev, dev, test];
        for (part, size) in [Part::Train, Part::Dev, Part::Test].into_iter().zip(sizes) {
            if size == 0 && self.ratio(part) > Rational::from_integer(0) {
                return Err(Error::TooFewParadigms(format!(
                    "{n} paradigms leave the {part} part empty"
                )));
            }
        }
        Ok(sizes)
    }
}

impl FromStr for SplitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SplitSpec::parse_ratios(s, 0)
    }
}

fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((a, b)) = s.split_once('/') {
        let (a, b) = (a.parse::<u64>().ok()?, b.parse::<u64>().ok()?);
        return (b != 0).then(|| Rational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
        let den = 10u64.pow(frac.len() as u32);
        let num = int.checked_mul(den)?.checked_add(frac.parse().ok()?)?;
        return Some(Rational::new(num, den));
    }
    s.parse::<u64>().ok().map(Rational::from_integer)
}

fn round_half_up(r: Rational, n: usize) -> usize {
    let (p, q) = (u128::from(*r.numer()), u128::from(*r.denom()));
    ((2 * p * n as u128 + q) / (2 * q)) as usize
}

/// A three-way split with the part each input paradigm went to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Dataset,
    pub dev: Dataset,
    pub test: Dataset,
    /// Parallel to the input paradigm list.
    pub assignment: Vec<Part>,
}

impl Split {
    fn from_assignment(paradigms: &[Paradigm], assignment: Vec<Part>) -> Split {
        let mut train = Dataset::new("train", Vec::new());
        let mut dev = Dataset::new("dev", Vec::new());
        let mut test = Dataset::new("test", Vec::new());
        for (p, part) in paradigms.iter().zip(&assignment) {
            let dst = match part {
                Part::Train => &mut train,
                Part::Dev => &mut dev,
                Part::Test => &mut test,
            };
            dst.triples.extend(p.triples.iter().cloned());
        }
        Split {
            train,
            dev,
            test,
            assignment,
        }
    }

    pub fn part(&self, part: Part) -> &Dataset {
        match part {
            Part::Train => &self.train,
            Part::Dev => &self.dev,
            Part::Test => &self.test,
        }
    }

    /// Number of paradigms per part (train, dev, test).
    pub fn paradigm_counts(&self) -> [usize; 3] {
        let count = |x: Part| self.assignment.iter().filter(|&&p| p == x).count();
        [count(Part::Train), count(Part::Dev), count(Part::Test)]
    }
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    order
}

/// Shuffles paradigms with `spec.seed`, then hands the first
/// `round(r_test * n)` to test, the next `round(r_dev * n)` to dev and the
/// rest to train. Within each part, triples keep their input order.
pub fn wug_split(paradigms: &[Paradigm], spec: &SplitSpec) -> Result<Split> {
    let [_, dev_n, test_n] = spec.part_sizes(paradigms.len())?;
    let mut assignment = vec![Part::Train; paradigms.len()];
    for (rank, idx) in shuffled_indices(paradigms.len(), spec.seed)
        .into_iter()
        .enumerate()
    {
        assignment[idx] = if rank < test_n {
            Part::Test
        } else if rank < test_n + dev_n {
            Part::Dev
        } else {
            Part::Train
        };
    }
    Ok(Split::from_assignment(paradigms, assignment))
}

/// `k` folds over one shuffle: the paradigms are cut into `k` blocks whose
/// sizes differ by at most one; fold `i` tests on block `i`, validates on
/// block `(i + 1) mod k` and trains on the rest.
pub fn cv_folds(paradigms: &[Paradigm], k: usize, seed: u64) -> Result<Vec<Split>> {
    if k < 2 {
        return Err(Error::SplitSpec(format!("k must be at least 2, got {k}")));
    }
    let n = paradigms.len();
    if n < k {
        return Err(Error::TooFewParadigms(format!(
            "{n} paradigms cannot fill {k} folds"
        )));
    }
    let mut block_of = vec![0usize; n];
    let (base, extra) = (n / k, n % k);
    let mut order = shuffled_indices(n, seed).into_iter();
    for b in 0..k {
        let size = base + usize::from(b < extra);
        for idx in order.by_ref().take(size) {
            block_of[idx] = b;
        }
    }
    Ok((0..k)
        .map(|i| {
            let assignment = block_of
                .iter()
                .map(|&b| {
                    if b == i {
                        Part::Test
                    } else if b == (i + 1) % k {
                        Part::Dev
                    } else {
                        Part::Train
                    }
                })
                .collect();
            Split::from_assignment(paradigms, assignment)
        })
        .collect())
}

/// Pairwise lemma intersections between the parts of a split.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DisjointReport {
    pub train_dev: BTreeSet<String>,
    pub train_test: BTreeSet<String>,
    pub dev_test: BTreeSet<String>,
}

impl DisjointReport {
    pub fn is_disjoint(&self) -> bool {
        self.train_dev.is_empty() && self.train_test.is_empty() && self.dev_test.is_empty()
    }
}

pub fn verify_disjoint(s: &Split) -> DisjointReport {
    let lemmas =
        |d: &Dataset| -> HashSet<String> { d.triples.iter().map(|t| t.lemma.clone()).collect() };
    let (tr, dv, ts) = (lemmas(&s.train), lemmas(&s.dev), lemmas(&s.test));
    let meet = |a: &HashSet<String>, b: &HashSet<String>| a.intersection(b).cloned().collect();
    DisjointReport {
        train_dev: meet(&tr, &dv),
        train_test: meet(&tr, &ts),
        dev_test: meet(&dv, &ts),
    }
}
