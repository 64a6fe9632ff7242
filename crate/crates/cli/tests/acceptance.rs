//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Set `WUGAUG_CONLL2018_DIR` to a directory holding the shared-task files
//! (`<lang>-train-medium`, `<lang>-dev`, `<lang>-test`) to check the published
//! statistics; otherwise the statistics criterion runs on `fixtures/stats`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use wugaug::align::{align, analyze, Span};
use wugaug::corpus::{
    build_paradigms, parse_tsv, write_tsv, Dataset, ParseOptions, Triple, UnitSource,
};
use wugaug::evalkit::{aggregate, predict_dataset, score, train_rules};
use wugaug::hallucinate::{
    augment, AugmentationSpec, ContextOptions, GenContext, Method, Provenance, DEFAULT_COPY_TAG,
};
use wugaug::rng::seeded;
use wugaug::splitter::{cv_folds, verify_disjoint, wug_split, Part, Split, SplitSpec};
use wugaug_cli::commands::{cmd_augment, cmd_stats, AugmentParams, StatsParams};
use wugaug_cli::io::label_of;
use wugaug_cli::report::ReportFormat;

const DATA_ENV: &str = "WUGAUG_CONLL2018_DIR";

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(path: &Path) -> Dataset {
    let bytes = fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_tsv(
        &bytes,
        &label_of(path),
        ParseOptions {
            strict: true,
            nfc: false,
        },
    )
    .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
    .dataset
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "statistics reproduction",
            limit: Duration::from_secs(5),
            run: statistics,
        },
        Criterion {
            name: "wug-split invariants",
            limit: Duration::from_secs(10),
            run: split_invariants,
        },
        Criterion {
            name: "alignment oracle equivalence",
            limit: Duration::from_secs(30),
            run: alignment_oracle,
        },
        Criterion {
            name: "hallucination invariant suite",
            limit: Duration::from_secs(60),
            run: hallucination_suite,
        },
        Criterion {
            name: "template identity",
            limit: Duration::from_secs(60),
            run: template_identity,
        },
        Criterion {
            name: "end-to-end regular language",
            limit: Duration::from_secs(10),
            run: regular_language,
        },
        Criterion {
            name: "aggregation",
            limit: Duration::from_secs(1),
            run: aggregation,
        },
    ];

    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > c.limit => Err(format!(
                "{detail}; runtime {:.2}s exceeds {}s",
                took.as_secs_f64(),
                c.limit.as_secs()
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {} [{:.2}s] {detail}", c.name, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {} [{:.2}s] {why}", c.name, took.as_secs_f64());
            }
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------- statistics

struct Expected {
    lang: &'static str,
    triples: [usize; 3],
    lemmata: [usize; 3],
    overlap: [&'static str; 2],
}

const TABLE: [Expected; 6] = [
    Expected {
        lang: "czech",
        triples: [1000, 1000, 1000],
        lemmata: [848, 848, 849],
        overlap: ["24.53", "20.38"],
    },
    Expected {
        lang: "finnish",
        triples: [1000, 1000, 1000],
        lemmata: [985, 983, 987],
        overlap: ["2.34", "3.04"],
    },
    Expected {
        lang: "german",
        triples: [1000, 1000, 1000],
        lemmata: [961, 945, 962],
        overlap: ["9.42", "9.46"],
    },
    Expected {
        lang: "russian",
        triples: [1000, 1000, 1000],
        lemmata: [973, 985, 977],
        overlap: ["3.65", "3.79"],
    },
    Expected {
        lang: "spanish",
        triples: [1000, 1000, 1000],
        lemmata: [906, 902, 922],
        overlap: ["15.74", "16.49"],
    },
    Expected {
        lang: "turkish",
        triples: [906, 928, 912],
        lemmata: [764, 802, 779],
        overlap: ["26.06", "26.57"],
    },
];

// train 5 lemmata x 5; dev kala, talo (shared), omena, pallo; test kissa,
// koira (shared), metsä
const FIXTURE: Expected = Expected {
    lang: "fixture",
    triples: [25, 10, 15],
    lemmata: [5, 4, 3],
    overlap: ["50.00", "66.67"],
};

fn check_stats(files: [PathBuf; 3], want: &Expected) -> Result<(), String> {
    let out = cmd_stats(&StatsParams {
        files: files.to_vec(),
        references: vec![files[0].clone()],
        format: ReportFormat::Kv,
        ingest: Default::default(),
    })
    .map_err(|e| format!("{}: {e:#}", want.lang))?;
    let kv: HashMap<&str, &str> = out.lines().filter_map(|l| l.split_once('=')).collect();
    let labels = files.each_ref().map(|p| label_of(p));
    let mut wrong = Vec::new();
    let mut expect = |key: String, value: String| {
        let got = kv.get(key.as_str()).copied().unwrap_or("<missing>");
        if got != value {
            wrong.push(format!("{key}={got} (expected {value})"));
        }
    };
    for (label, (triples, lemmata)) in labels.iter().zip(want.triples.iter().zip(want.lemmata)) {
        expect(format!("{label}.triple_count"), triples.to_string());
        expect(format!("{label}.lemma_count"), lemmata.to_string());
    }
    for i in 1..3 {
        expect(
            format!("{}.lemma_overlap_pct.{}", labels[i], labels[0]),
            want.overlap[i - 1].to_string(),
        );
    }
    if wrong.is_empty() {
        Ok(())
    } else {
        Err(format!("{}: {}", want.lang, wrong.join(", ")))
    }
}

fn statistics() -> Outcome {
    match std::env::var_os(DATA_ENV) {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            let mut errors = Vec::new();
            for want in &TABLE {
                let files =
                    ["train-medium", "dev", "test"].map(|s| dir.join(format!("{}-{s}", want.lang)));
                if let Err(e) = check_stats(files, want) {
                    errors.push(e);
                }
            }
            if errors.is_empty() {
                Ok(format!("{} languages from {}", TABLE.len(), dir.display()))
            } else {
                Err(errors.join("; "))
            }
        }
        None => {
            let dir = fixtures().join("stats");
            check_stats(
                ["train.tsv", "dev.tsv", "test.tsv"].map(|f| dir.join(f)),
                &FIXTURE,
            )?;
            Ok(format!("synthetic fixture ({DATA_ENV} not set)"))
        }
    }
}

// ---------------------------------------------------------------- splits

/// Nearest integer to `w * n / total`, halves rounding up.
fn nearest(w: u64, n: usize, total: u64) -> usize {
    let target = 2 * w * n as u64;
    (0..=n)
        .min_by_key(|&k| {
            let twice = 2 * k as u64 * total;
            (twice.abs_diff(target), std::cmp::Reverse(k))
        })
        .unwrap()
}

fn sorted_triples<'a>(parts: impl IntoIterator<Item = &'a Dataset>) -> Vec<&'a Triple> {
    let mut v: Vec<&Triple> = parts.into_iter().flat_map(|d| &d.triples).collect();
    v.sort_unstable_by(|a, b| (&a.lemma, &a.form, &a.tags).cmp(&(&b.lemma, &b.form, &b.tags)));
    v
}

fn check_split(input: &[&Triple], split: &Split) -> Result<(), String> {
    let report = verify_disjoint(split);
    if !report.is_disjoint() {
        return Err(format!("lemma leak {report:?}"));
    }
    if sorted_triples([&split.train, &split.dev, &split.test]) != input {
        return Err("triples not conserved".into());
    }
    Ok(())
}

fn split_invariants() -> Outcome {
    let mut rng = seeded(1000);
    let letters: Vec<char> = "abcdefgh".chars().collect();
    let (mut splits, mut rejected, mut folds) = (0, 0, 0);
    for set in 0..1000 {
        let n = rng.gen_range(3..=150);
        let mut triples = Vec::new();
        for p in 0..n {
            let stem: String = (0..rng.gen_range(1..=4))
                .map(|_| *letters.choose(&mut rng).unwrap())
                .collect();
            let lemma = format!("{stem}{p}");
            for c in 0..rng.gen_range(1..=6) {
                let form = format!("{lemma}x{c}");
                triples.push(Triple::new(&lemma, vec![format!("T{c}")], form).unwrap());
            }
        }
        triples.shuffle(&mut rng);
        let data = Dataset::new("set", triples);
        let paradigms = build_paradigms(&data);
        let all = sorted_triples([&data]);
        if paradigms.len() != n {
            return Err(format!(
                "set {set}: {} paradigms, expected {n}",
                paradigms.len()
            ));
        }

        let weights = [
            rng.gen_range(1..=10),
            rng.gen_range(0..=4),
            rng.gen_range(1..=5),
        ];
        let total: u64 = weights.iter().sum();
        let spec = SplitSpec::from_weights(weights, rng.gen()).map_err(|e| e.to_string())?;
        let test = nearest(weights[2], n, total);
        let dev = nearest(weights[1], n, total);
        let feasible = test + dev <= n
            && [n.saturating_sub(test + dev), dev, test]
                .iter()
                .zip(weights)
                .all(|(&size, w)| size > 0 || w == 0);
        match wug_split(&paradigms, &spec) {
            Ok(split) if feasible => {
                let sizes = [n - test - dev, dev, test];
                if split.paradigm_counts() != sizes {
                    return Err(format!(
                        "set {set}: n={n} weights {weights:?} gave {:?}, expected {sizes:?}",
                        split.paradigm_counts()
                    ));
                }
                check_split(&all, &split).map_err(|e| format!("set {set}: {e}"))?;
                splits += 1;
            }
            Ok(_) => {
                return Err(format!(
                    "set {set}: infeasible sizes accepted (n={n}, {weights:?})"
                ))
            }
            Err(e) if feasible => return Err(format!("set {set}: {e}")),
            Err(_) => rejected += 1,
        }

        let k = rng.gen_range(2..=n.min(10));
        let fold_splits =
            cv_folds(&paradigms, k, rng.gen()).map_err(|e| format!("set {set}: {e}"))?;
        let mut tested = vec![0usize; n];
        let mut test_sizes = Vec::new();
        for f in &fold_splits {
            check_split(&all, f).map_err(|e| format!("set {set} fold: {e}"))?;
            for (i, part) in f.assignment.iter().enumerate() {
                tested[i] += usize::from(*part == Part::Test);
            }
            test_sizes.push(f.paradigm_counts()[2]);
        }
        if fold_splits.len() != k || tested.iter().any(|&t| t != 1) {
            return Err(format!(
                "set {set}: {k} folds do not test every paradigm exactly once"
            ));
        }
        let (lo, hi) = (
            test_sizes.iter().min().unwrap(),
            test_sizes.iter().max().unwrap(),
        );
        if hi - lo > 1 {
            return Err(format!("set {set}: fold sizes {test_sizes:?}"));
        }
        folds += k;
    }
    Ok(format!(
        "{splits} splits, {rejected} infeasible ratios rejected, {folds} folds"
    ))
}

// ---------------------------------------------------------------- alignment

/// Minimum cost over every alignment path, without memoization.
fn brute_force(a: &[char], b: &[char]) -> usize {
    match (a, b) {
        ([], _) => b.len(),
        (_, []) => a.len(),
        ([x, ra @ ..], [y, rb @ ..]) => {
            let diag = brute_force(ra, rb) + usize::from(x != y);
            let del = brute_force(ra, b) + 1;
            let ins = brute_force(a, rb) + 1;
            diag.min(del).min(ins)
        }
    }
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    fn go(
        a: &[char],
        b: &[char],
        i: usize,
        j: usize,
        memo: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let d = (go(a, b, i + 1, j + 1, memo) + usize::from(a[i] != b[j]))
            .min(go(a, b, i + 1, j, memo) + 1)
            .min(go(a, b, i, j + 1, memo) + 1);
        memo.insert((i, j), d);
        d
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

fn check_alignment(a: &[char], b: &[char], want: usize) -> Result<(), String> {
    let (l, f): (String, String) = (a.iter().collect(), b.iter().collect());
    let al = align(&l, &f);
    if al.lemma() != l || al.form() != f {
        return Err(format!(
            "alignment of {l:?}/{f:?} does not spell its inputs"
        ));
    }
    if al.cost() != want {
        return Err(format!(
            "{l:?}/{f:?}: cost {} but distance {want}",
            al.cost()
        ));
    }
    Ok(())
}

fn words_up_to(alphabet: &[char], max: usize) -> Vec<Vec<char>> {
    let mut all = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<char>| {
                alphabet.iter().map(move |&c| {
                    let mut w = w.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

fn alignment_oracle() -> Outcome {
    let words = words_up_to(&['a', 'b'], 5);
    let mut pairs = 0;
    for a in &words {
        for b in &words {
            check_alignment(a, b, brute_force(a, b))?;
            pairs += 1;
        }
    }
    let alphabet: Vec<char> = ('a'..='t').collect();
    let mut rng = seeded(12);
    for _ in 0..10_000 {
        let mut word = || -> Vec<char> {
            let n = rng.gen_range(0..=12);
            (0..n)
                .map(|_| *alphabet.choose(&mut rng).unwrap())
                .collect()
        };
        let (a, b) = (word(), word());
        check_alignment(&a, &b, levenshtein(&a, &b))?;
    }
    Ok(format!(
        "{pairs} exhaustive pairs and 10000 random pairs, 0 mismatches"
    ))
}

// ---------------------------------------------------------------- hallucination

const SEEDS: [u64; 3] = [1, 2, 3];
const ITEMS: usize = 2000;

fn chars_of(s: &str) -> Vec<char> {
    s.chars().collect()
}

/// `word` with the ranges in `edits` replaced, ranges given in the original
/// word's code-point coordinates.
fn splice(word: &str, edits: &[(std::ops::Range<usize>, &str)]) -> String {
    let chars = chars_of(word);
    let mut out = String::new();
    let mut at = 0;
    for (range, text) in edits {
        out.extend(&chars[at..range.start]);
        out.push_str(text);
        at = range.end;
    }
    out.extend(&chars[at..]);
    out
}

fn check_hallucination(
    method: Method,
    base: &Triple,
    out: &Triple,
    original: &[String],
    dummy: &[String],
    ctx: &GenContext,
) -> Result<(), String> {
    if out.tags != base.tags {
        return Err(format!(
            "tags {:?} differ from base {:?}",
            out.tags, base.tags
        ));
    }
    let analysis = analyze(&base.lemma, &base.form, ctx.min_stem_run)
        .ok_or_else(|| format!("base {base:?} has no stem"))?;
    let spans: &[Span] = &analysis.stem.spans;
    let lemma_chars = chars_of(&base.lemma);
    let read: Vec<String> = spans
        .iter()
        .map(|s| lemma_chars[s.lemma.clone()].iter().collect())
        .collect();
    if read != original || dummy.len() != spans.len() {
        return Err(format!(
            "recorded stems {original:?} do not match spans {read:?}"
        ));
    }
    let replaced = match method {
        Method::HallChar => spans.len(),
        _ => 1,
    };
    for (i, d) in dummy.iter().enumerate() {
        if i >= replaced && d != &original[i] {
            return Err(format!("span {i} changed from {:?} to {d:?}", original[i]));
        }
    }
    let lemma_edits: Vec<_> = spans
        .iter()
        .zip(dummy)
        .map(|(s, d)| (s.lemma.clone(), d.as_str()))
        .collect();
    let form_edits: Vec<_> = spans
        .iter()
        .zip(dummy)
        .map(|(s, d)| (s.form.clone(), d.as_str()))
        .collect();
    let (want_lemma, want_form) = (
        splice(&base.lemma, &lemma_edits),
        splice(&base.form, &form_edits),
    );
    if out.lemma != want_lemma || out.form != want_form {
        return Err(format!(
            "{base:?} -> {out:?}: expected {want_lemma:?}/{want_form:?} from dummies {dummy:?}"
        ));
    }
    match method {
        Method::HallChar => {
            let lens = |t: &Triple| (t.lemma.chars().count(), t.form.chars().count());
            if lens(out) != lens(base) {
                return Err(format!("length changed: {base:?} -> {out:?}"));
            }
            if let Some(c) = dummy
                .iter()
                .flat_map(|d| d.chars())
                .find(|&c| !ctx.alphabet.contains(c))
            {
                return Err(format!("dummy character {c:?} not in alphabet"));
            }
        }
        _ => {
            let bounds = ctx.stem_bounds.ok_or("no stem bounds")?;
            let n = dummy[0].chars().count();
            if !bounds.contains(n) {
                return Err(format!(
                    "dummy stem {:?} length {n} outside {bounds:?}",
                    dummy[0]
                ));
            }
        }
    }
    Ok(())
}

fn check_units(word: &str, units: &[String], is_unit: impl Fn(&str) -> bool) -> Result<(), String> {
    if let Some(u) = units.iter().find(|u| !is_unit(u)) {
        return Err(format!("unit {u:?} of {word:?} not in the inventory"));
    }
    let joined: String = units.concat();
    let before_last: usize = units[..units.len().saturating_sub(1)]
        .iter()
        .map(|u| u.chars().count())
        .sum();
    let n = word.chars().count();
    if !joined.starts_with(word) || before_last >= n {
        return Err(format!("{word:?} is not the truncation of units {units:?}"));
    }
    Ok(())
}

fn check_copy(
    method: Method,
    t: &Triple,
    prov: &Provenance,
    ctx: &GenContext,
    lemmata: &HashSet<&str>,
) -> Result<(), String> {
    if t.lemma != t.form || t.tags != [DEFAULT_COPY_TAG] {
        return Err(format!("not a copy triple: {t:?}"));
    }
    if method == Method::CopyLemmas {
        return match lemmata.contains(t.lemma.as_str()) {
            true => Ok(()),
            false => Err(format!("{:?} is not a source lemma", t.lemma)),
        };
    }
    let n = t.lemma.chars().count();
    if !ctx.word_bounds.contains(n) {
        return Err(format!(
            "{:?} length {n} outside {:?}",
            t.lemma, ctx.word_bounds
        ));
    }
    let Provenance::Synth { units } = prov else {
        return Err(format!("{:?} has no unit trace", t.lemma));
    };
    match method {
        Method::CopyChar => {
            if let Some(c) = t.lemma.chars().find(|&c| !ctx.alphabet.contains(c)) {
                return Err(format!("character {c:?} not in alphabet"));
            }
            check_units(&t.lemma, units, |u| u.chars().count() == 1)
        }
        _ => check_units(&t.lemma, units, |u| ctx.ngrams.contains(u)),
    }
}

fn hallucination_suite() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut checked = 0;
    for fixture in ["finnish_like.tsv", "german_like.tsv"] {
        let path = fixtures().join(fixture);
        let train = load(&path);
        let ctx = GenContext::from_training(&train, ContextOptions::default())
            .map_err(|e| e.to_string())?;
        if ctx.alphabet.unit_count() == 0 {
            return Err(format!("{fixture}: empty alphabet"));
        }
        let lemmata: HashSet<&str> = train.lemmata().into_iter().collect();
        for method in Method::ALL {
            for seed in SEEDS {
                let tag = format!("{fixture} {method} seed {seed}");
                let spec = AugmentationSpec::new(method, ITEMS, seed);
                let out = augment(&train, &spec, &ctx, Some(&train))
                    .map_err(|e| format!("{tag}: {e}"))?;
                let expected = match method {
                    Method::CopyLemmas => lemmata.len(),
                    _ => ITEMS,
                };
                if out.generated.len() != expected || out.dataset.len() != train.len() + expected {
                    return Err(format!(
                        "{tag}: {} items, expected {expected}",
                        out.generated.len()
                    ));
                }
                for g in &out.generated {
                    let res = match &g.provenance {
                        Provenance::Hallucinated {
                            base,
                            original_stems,
                            dummy_stems,
                        } => check_hallucination(
                            method,
                            &train.triples[*base],
                            &g.triple,
                            original_stems,
                            dummy_stems,
                            &ctx,
                        ),
                        prov if !method.is_hallucination() => {
                            check_copy(method, &g.triple, prov, &ctx, &lemmata)
                        }
                        prov => Err(format!("unexpected provenance {prov:?}")),
                    };
                    res.map_err(|e| format!("{tag}: {e}"))?;
                    checked += 1;
                }

                let file = tmp.path().join(format!("{fixture}.{method}.{seed}"));
                let params = AugmentParams {
                    counts: vec![ITEMS],
                    seed,
                    lemma_sources: if method == Method::CopyLemmas {
                        vec![path.clone()]
                    } else {
                        Vec::new()
                    },
                    ..AugmentParams::new(method, path.clone(), file.clone())
                };
                cmd_augment(&params).map_err(|e| format!("{tag}: {e:#}"))?;
                let written = fs::read(&file).map_err(|e| e.to_string())?;
                if written != write_tsv(&out.dataset) {
                    return Err(format!(
                        "{tag}: rerun with the same seed wrote different bytes"
                    ));
                }
            }
        }
    }
    Ok(format!(
        "{checked} generated triples checked, 30 reruns byte-identical"
    ))
}

// ---------------------------------------------------------------- templates

fn fixture_files(dir: &Path, out: &mut Vec<PathBuf>) {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            fixture_files(&p, out);
        } else if p.extension().is_some_and(|e| e == "tsv") {
            out.push(p);
        }
    }
}

fn template_identity() -> Outcome {
    let mut files = Vec::new();
    fixture_files(&fixtures(), &mut files);
    let (mut alignable, mut total) = (0, 0);
    let mut failures = Vec::new();
    for f in &files {
        for t in &load(f).triples {
            total += 1;
            for min_run in [1, 2] {
                let Some(a) = analyze(&t.lemma, &t.form, min_run) else {
                    continue;
                };
                alignable += 1;
                match a.template.substitute(&a.stems()) {
                    Ok((l, fm)) if l == t.lemma && fm == t.form => {}
                    other => failures.push(format!("{t:?} -> {other:?}")),
                }
            }
        }
    }
    if !failures.is_empty() {
        return Err(format!(
            "{} failures, first {}",
            failures.len(),
            failures[0]
        ));
    }
    if alignable == 0 {
        return Err("no alignable triples".into());
    }
    Ok(format!(
        "{alignable} analyses of {total} triples in {} files, 0 failures",
        files.len()
    ))
}

// ---------------------------------------------------------------- end to end

fn accuracy(train: &Dataset, test: &Dataset) -> Result<f64, String> {
    let model = train_rules(train).map_err(|e| e.to_string())?;
    let report = score(test, &predict_dataset(&model, test)).map_err(|e| e.to_string())?;
    Ok(report.accuracy())
}

fn regular_language() -> Outcome {
    let data = load(&fixtures().join("regular.tsv"));
    let paradigms = build_paradigms(&data);
    let tagsets: HashSet<String> = data.triples.iter().map(Triple::tag_string).collect();
    if paradigms.len() != 40 || tagsets.len() != 8 {
        return Err(format!(
            "fixture has {} stems and {} tag sets",
            paradigms.len(),
            tagsets.len()
        ));
    }
    let split = wug_split(&paradigms, &SplitSpec::default()).map_err(|e| e.to_string())?;
    let vanilla = accuracy(&split.train, &split.test)?;

    let ctx = GenContext::from_training(&split.train, ContextOptions::default())
        .map_err(|e| e.to_string())?;
    let spec = AugmentationSpec {
        forbid_real_lemmas: true,
        ..AugmentationSpec::new(Method::HallSubstr, 2000, 0)
    };
    let out = augment(&split.train, &spec, &ctx, None).map_err(|e| e.to_string())?;
    let real: HashSet<&str> = data.lemmata().into_iter().collect();
    let hallucinated = Dataset::new(
        "hallucinated",
        out.generated
            .iter()
            .map(|g| g.triple.clone())
            .filter(|t| !real.contains(t.lemma.as_str()))
            .collect(),
    );
    let per_tag: BTreeMap<String, usize> =
        hallucinated
            .triples
            .iter()
            .fold(BTreeMap::new(), |mut m, t| {
                *m.entry(t.tag_string()).or_default() += 1;
                m
            });
    let hall = accuracy(&hallucinated, &split.test)?;

    let summary = format!(
        "vanilla {vanilla:.3}, hall-substr only {hall:.3} ({} triples over {} tag sets, {} test triples)",
        hallucinated.len(),
        per_tag.len(),
        split.test.len()
    );
    if vanilla == 1.0 && hall == 1.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

// ---------------------------------------------------------------- aggregation

fn aggregation() -> Outcome {
    let a = aggregate(&[0.0, 1.0]).map_err(|e| e.to_string())?;
    let want_std = 0.5f64.sqrt();
    if a.mean != 0.5 || (a.std - want_std).abs() > 1e-8 {
        return Err(format!(
            "aggregate([0, 1]) = mean {}, std {}",
            a.mean, a.std
        ));
    }
    for v in [0.0, 0.37, 1.0] {
        let c = aggregate(&[v; 5]).map_err(|e| e.to_string())?;
        if c.std != 0.0 || c.mean != v {
            return Err(format!("constant {v}: mean {}, std {}", c.mean, c.std));
        }
    }
    Ok(format!("mean {}, std {:.8}", a.mean, a.std))
}
