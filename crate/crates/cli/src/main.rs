use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Result};
use clap::{Args, Parser, Subcommand};
use wugaug::corpus::Fields;
use wugaug::hallucinate::{Method, DEFAULT_COPY_TAG, DEFAULT_COUNT};
use wugaug_cli::commands::{
    cmd_align, cmd_augment, cmd_evaluate, cmd_replay, cmd_run_baseline, cmd_split, cmd_stats,
    AugmentParams, BaselineParams, EvaluateParams, IngestOptions, SplitParams,
};
use wugaug_cli::pipeline::{cmd_pipeline, PipelineConfig, OUT_DIR_ENV};
use wugaug_cli::report::ReportFormat;

#[derive(Parser, Debug)]
#[command(
    name = "wugaug",
    version,
    about = "Lemma-disjoint inflection datasets with copy-bias and hallucinated augmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Ingest {
    /// Fail on malformed lines instead of skipping them.
    #[arg(long, global = true)]
    strict: bool,

    /// NFC-normalize every field on input.
    #[arg(long, global = true)]
    nfc: bool,
}

impl From<Ingest> for IngestOptions {
    fn from(i: Ingest) -> Self {
        IngestOptions {
            strict: i.strict,
            nfc: i.nfc,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Triple counts, lemma counts and lemma overlap with reference files.
    Stats {
        /// Files to describe.
        #[arg(required = true)]
        files: Vec<PathBuf>,

        /// Reference file for the lemma-overlap columns; repeatable.
        #[arg(short, long = "reference")]
        references: Vec<PathBuf>,

        #[arg(long, default_value = "text")]
        format: ReportFormat,

        #[command(flatten)]
        ingest: Ingest,
    },

    /// Lemma-disjoint train/dev/test split or cross-validation folds.
    Split {
        /// Triple files pooled before splitting.
        #[arg(short, long = "input", required = true)]
        inputs: Vec<PathBuf>,

        /// Output directory.
        #[arg(short, long, env = OUT_DIR_ENV)]
        out: PathBuf,

        /// Prefix for the output files.
        #[arg(long, default_value = "data")]
        lang: String,

        /// train:dev:test ratios.
        #[arg(long, default_value = "7:1:2")]
        ratios: String,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Produce k cross-validation folds instead of one split.
        #[arg(long)]
        cv: Option<usize>,

        #[command(flatten)]
        ingest: Ingest,
    },

    /// Append generated triples to a training file.
    Augment {
        #[arg(long)]
        method: Method,

        #[arg(long, default_value_t = DEFAULT_COUNT)]
        count: usize,

        /// Comma-separated counts; writes one output per count (`<out>.<count>`).
        #[arg(long, value_delimiter = ',', conflicts_with = "count")]
        sweep: Option<Vec<usize>>,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(long)]
        train: PathBuf,

        /// Files whose lemmata feed copy-lemmas.
        #[arg(long, value_delimiter = ',')]
        lemma_sources: Vec<PathBuf>,

        /// Files whose triples are hallucinated from (default: the training file).
        #[arg(long, value_delimiter = ',')]
        pool: Vec<PathBuf>,

        #[arg(long)]
        out: PathBuf,

        /// Fields harvested for alphabet and n-grams: lemma, form or both.
        #[arg(long, default_value = "both")]
        fields: Fields,

        /// Shortest matched run that counts as a stem span.
        #[arg(long, default_value_t = 1)]
        min_stem_run: usize,

        #[arg(long, default_value = DEFAULT_COPY_TAG)]
        copy_tag: String,

        /// Keep exact-duplicate generated triples.
        #[arg(long)]
        no_dedupe: bool,

        /// Redraw generated items whose lemma is a real lemma.
        #[arg(long)]
        forbid_real_lemmas: bool,

        #[command(flatten)]
        ingest: Ingest,
    },

    /// Train the suffix-rule baseline and predict an evaluation file.
    Baseline {
        #[arg(long)]
        train: PathBuf,

        #[arg(long)]
        eval: PathBuf,

        /// Predictions file (lemma, predicted form, tags).
        #[arg(long)]
        out: PathBuf,

        /// Also write the accuracy report here.
        #[arg(long)]
        report: Option<PathBuf>,

        #[arg(long, default_value = "text")]
        format: ReportFormat,

        #[command(flatten)]
        ingest: Ingest,
    },

    /// Exact-match accuracy of a predictions file against gold triples.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,

        #[arg(long = "pred")]
        predictions: PathBuf,

        /// Name of the system that produced the predictions.
        #[arg(long, default_value = "unspecified")]
        system: String,

        #[arg(long, default_value = "text")]
        format: ReportFormat,

        #[command(flatten)]
        ingest: Ingest,
    },

    /// Show the alignment, stem and affix template of one lemma/form pair.
    Align {
        lemma: String,
        form: String,

        #[arg(long, default_value_t = 1)]
        min_stem_run: usize,
    },

    /// Split, augment, run the baseline and report, from a TOML config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,

        /// Output directory (overrides the config and WUGAUG_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Regenerate the outputs a manifest records and compare digests.
    Replay { manifest: PathBuf },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats {
            files,
            references,
            format,
            ingest,
        } => {
            let out = cmd_stats(&wugaug_cli::commands::StatsParams {
                files,
                references,
                format,
                ingest: ingest.into(),
            })?;
            print!("{out}");
        }
        Command::Split {
            inputs,
            out,
            lang,
            ratios,
            seed,
            cv,
            ingest,
        } => {
            let m = cmd_split(&SplitParams {
                inputs,
                out_dir: out,
                lang,
                ratios,
                seed,
                cv,
                ingest: ingest.into(),
            })?;
            for f in &m.folds {
                let [tr, dv, ts] = f.sizes;
                println!(
                    "{}: {tr} train / {dv} dev / {ts} test paradigms",
                    f.dir.display()
                );
            }
        }
        Command::Augment {
            method,
            count,
            sweep,
            seed,
            train,
            lemma_sources,
            pool,
            out,
            fields,
            min_stem_run,
            copy_tag,
            no_dedupe,
            forbid_real_lemmas,
            ingest,
        } => {
            let params = AugmentParams {
                counts: sweep.unwrap_or_else(|| vec![count]),
                seed,
                lemma_sources,
                pool,
                fields,
                min_stem_run,
                copy_tag,
                dedupe: !no_dedupe,
                forbid_real_lemmas,
                ingest: ingest.into(),
                ..AugmentParams::new(method, train, out)
            };
            let m = cmd_augment(&params)?;
            for r in &m.runs {
                println!(
                    "{}: {} + {} generated ({} attempts, {} skipped)",
                    r.output.path.display(),
                    r.train_size,
                    r.generated,
                    r.stats.attempts,
                    r.stats.skips
                );
            }
        }
        Command::Baseline {
            train,
            eval,
            out,
            report,
            format,
            ingest,
        } => {
            let (_, text) = cmd_run_baseline(&BaselineParams {
                train,
                eval,
                out,
                report,
                format,
                ingest: ingest.into(),
            })?;
            print!("{text}");
        }
        Command::Evaluate {
            gold,
            predictions,
            system,
            format,
            ingest,
        } => {
            let (_, text) = cmd_evaluate(&EvaluateParams {
                gold,
                predictions,
                system,
                format,
                ingest: ingest.into(),
            })?;
            print!("{text}");
        }
        Command::Align {
            lemma,
            form,
            min_stem_run,
        } => {
            ensure!(
                !lemma.is_empty() && !form.is_empty(),
                "lemma and form must be non-empty"
            );
            print!("{}", cmd_align(&lemma, &form, min_stem_run));
        }
        Command::Pipeline { config, out } => {
            let cfg = PipelineConfig::load(&config)?;
            let summary = cmd_pipeline(&cfg, out.as_deref())?;
            print!("{}", summary.summary_text);
            eprintln!("artifacts in {}", summary.out_dir.display());
        }
        Command::Replay { manifest } => {
            let outcome = cmd_replay(&manifest)?;
            for p in &outcome.changed_inputs {
                println!("input changed: {}", p.display());
            }
            for p in &outcome.mismatched {
                println!("regenerated output differs: {}", p.display());
            }
            for p in &outcome.modified_on_disk {
                println!("file on disk differs: {}", p.display());
            }
            ensure!(
                outcome.ok(),
                "replay of {} did not reproduce",
                manifest.display()
            );
            println!("reproduced {} output(s)", outcome.checked);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
