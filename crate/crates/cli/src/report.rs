//! Plain-text and key-value renderings of statistics and evaluation reports.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wugaug::corpus::DatasetStats;
use wugaug::evalkit::{AggregateReport, EvalReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// Aligned columns for reading.
    #[default]
    Text,
    /// One `key=value` per line.
    Kv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "kv" => Ok(ReportFormat::Kv),
            other => Err(format!("unknown report format {other:?} (text, kv)")),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Text => "txt",
            ReportFormat::Kv => "kv",
        }
    }
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Triple counts, lemma counts and lemma overlap (%) per dataset; the
/// overlap columns appear only when references were given.
pub fn format_stats(stats: &[DatasetStats], references: &[String], fmt: ReportFormat) -> String {
    match fmt {
        ReportFormat::Text => {
            let mut rows = vec![{
                let mut h = vec!["dataset".to_owned(), "triples".into(), "lemmata".into()];
                h.extend(references.iter().map(|r| format!("overlap%:{r}")));
                h
            }];
            for s in stats {
                let mut row = vec![
                    s.label.clone(),
                    s.triple_count.to_string(),
                    s.lemma_count.to_string(),
                ];
                row.extend(s.overlap_vs.iter().map(|o| o.percent.to_string()));
                rows.push(row);
            }
            table(&rows)
        }
        ReportFormat::Kv => {
            let mut out = String::new();
            for s in stats {
                let _ = writeln!(out, "{}.triple_count={}", s.label, s.triple_count);
                let _ = writeln!(out, "{}.lemma_count={}", s.label, s.lemma_count);
                for o in &s.overlap_vs {
                    let _ = writeln!(
                        out,
                        "{}.lemma_overlap_pct.{}={}",
                        s.label, o.reference, o.percent
                    );
                }
            }
            out
        }
    }
}

/// Accuracy report for one system; `system` names the predictor so baseline
/// numbers are never mistaken for neural results.
pub fn format_eval(system: &str, r: &EvalReport, fmt: ReportFormat) -> String {
    let mut out = String::new();
    match fmt {
        ReportFormat::Text => {
            let _ = writeln!(out, "system: {system}");
            let _ = writeln!(out, "accuracy: {:.4} ({}/{})", r.accuracy(), r.correct, r.n);
            let mut rows = vec![vec![
                "tagset".to_owned(),
                "n".into(),
                "correct".into(),
                "accuracy".into(),
            ]];
            for (key, t) in &r.per_tagset {
                let acc = if t.n == 0 {
                    0.0
                } else {
                    t.correct as f64 / t.n as f64
                };
                rows.push(vec![
                    key.clone(),
                    t.n.to_string(),
                    t.correct.to_string(),
                    format!("{acc:.4}"),
                ]);
            }
            out.push_str(&table(&rows));
        }
        ReportFormat::Kv => {
            let _ = writeln!(out, "system={system}");
            let _ = writeln!(out, "n={}", r.n);
            let _ = writeln!(out, "correct={}", r.correct);
            let _ = writeln!(out, "accuracy={:.6}", r.accuracy());
            for (key, t) in &r.per_tagset {
                let _ = writeln!(out, "tagset.{key}.n={}", t.n);
                let _ = writeln!(out, "tagset.{key}.correct={}", t.correct);
            }
        }
    }
    out
}

/// One row per configuration: mean and std of accuracy over runs/folds.
pub fn format_summary(rows: &[(String, AggregateReport)], fmt: ReportFormat) -> String {
    match fmt {
        ReportFormat::Text => {
            let mut t = vec![vec![
                "configuration".to_owned(),
                "runs".into(),
                "mean".into(),
                "std".into(),
            ]];
            for (name, a) in rows {
                t.push(vec![
                    name.clone(),
                    a.values.len().to_string(),
                    format!("{:.4}", a.mean),
                    format!("{:.4}", a.std),
                ]);
            }
            table(&t)
        }
        ReportFormat::Kv => {
            let mut out = String::new();
            for (name, a) in rows {
                let _ = writeln!(out, "{name}.runs={}", a.values.len());
                let _ = writeln!(out, "{name}.mean={:.6}", a.mean);
                let _ = writeln!(out, "{name}.std={:.6}", a.std);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wugaug::corpus::{Overlap, Percent};

    fn stats() -> Vec<DatasetStats> {
        vec![DatasetStats {
            label: "dev".into(),
            triple_count: 1000,
            lemma_count: 848,
            overlap_vs: vec![Overlap {
                reference: "train".into(),
                percent: Percent(2453),
            }],
        }]
    }

    #[test]
    fn stats_text_is_aligned() {
        let s = format_stats(&stats(), &["train".into()], ReportFormat::Text);
        assert_eq!(
            s,
            "dataset  triples  lemmata  overlap%:train\n\
             dev         1000      848           24.53\n"
        );
    }

    #[test]
    fn stats_kv() {
        let s = format_stats(&stats(), &["train".into()], ReportFormat::Kv);
        assert_eq!(
            s,
            "dev.triple_count=1000\ndev.lemma_count=848\ndev.lemma_overlap_pct.train=24.53\n"
        );
    }

    #[test]
    fn eval_report_names_system() {
        let r = EvalReport {
            n: 4,
            correct: 3,
            ..Default::default()
        };
        assert!(format_eval("baseline", &r, ReportFormat::Text)
            .starts_with("system: baseline\naccuracy: 0.7500 (3/4)"));
        assert!(format_eval("baseline", &r, ReportFormat::Kv).contains("accuracy=0.750000\n"));
    }
}
