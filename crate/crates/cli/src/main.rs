use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Parser, Subcommand};
use log::info;
use serde::Serialize;

use toxic_spans::audit::{consistency_report, diff_report, shape_flags, AuditReport};
use toxic_spans::corpus::{
    corpus_stats, export_ner, kfold_split, parse_corpus, read_predictions, write_corpus,
    write_ner_jsonl, write_predictions,
};
use toxic_spans::metrics::evaluate;
use toxic_spans::models::{
    random_baseline, train_gate_with, train_lexicon, GateModel, LexiconModel, TrainConfig,
    DEFAULT_HASH_BUCKETS,
};
use toxic_spans::pipeline::{run_corpus, PipelineConfig};
use toxic_spans::{Corpus, Prediction};

#[derive(Parser)]
#[command(
    name = "toxspans",
    version,
    about = "Character-offset toxic span tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print corpus statistics as JSON.
    Stats { corpus: PathBuf },
    /// Split multi-span posts into single-span posts.
    Split { corpus: PathBuf, out: PathBuf },
    /// Write NER training records as JSON lines.
    ExportNer { corpus: PathBuf, out: PathBuf },
    /// Train a gate or a lexicon model.
    #[command(group(ArgGroup::new("kind").required(true).args(["gate", "lexicon"])))]
    Train {
        #[arg(long)]
        gate: bool,
        #[arg(long)]
        lexicon: bool,
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_count: u64,
        #[arg(long, default_value_t = 0.5)]
        min_ratio: f64,
        #[arg(long, default_value_t = 45)]
        epochs: usize,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[arg(long, default_value_t = 4.0)]
        batch_start: f64,
        #[arg(long, default_value_t = 32.0)]
        batch_stop: f64,
        #[arg(long, default_value_t = 1.001)]
        batch_factor: f64,
        #[arg(long, default_value_t = DEFAULT_HASH_BUCKETS)]
        hash_buckets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the gate/extract/remove loop over a corpus.
    Predict {
        #[arg(long)]
        gate: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 10)]
        max_iterations: usize,
        #[arg(long)]
        no_absorb_whitespace: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Per-character random predictions.
    Baseline {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        probability: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score predictions against gold; prints the report as JSON.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
    /// Annotation consistency and span-shape report.
    Audit {
        corpus: PathBuf,
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        min_total: usize,
    },
    /// Write k train/held-out splits.
    Kfold {
        corpus: PathBuf,
        #[arg(short = 'k')]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    let f = fs::File::open(path).with_context(|| format!("{}: cannot open", path.display()))?;
    parse_corpus(io::BufReader::new(f)).with_context(|| format!("{}", path.display()))
}

fn load_predictions(path: &Path) -> Result<Vec<Prediction>> {
    read_predictions(&read_text(path)?).with_context(|| format!("{}", path.display()))
}

fn create(path: &Path) -> Result<io::BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("{}: cannot create", path.display()))?;
    Ok(io::BufWriter::new(f))
}

fn save_corpus(c: &Corpus, path: &Path) -> Result<()> {
    write_corpus(c, create(path)?).with_context(|| format!("{}: write failed", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("{}: write failed", path.display()))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats { corpus } => {
            let stats = corpus_stats(&load_corpus(&corpus)?);
            eprintln!(
                "{} records, {:.2}% without spans, {:.2}% single-span",
                stats.record_count,
                100.0 * stats.zero_span_fraction,
                100.0 * stats.single_span_fraction
            );
            print_json(&stats)
        }
        Command::Split { corpus, out } => {
            let c = load_corpus(&corpus)?;
            let split = c.split_multispan()?;
            eprintln!("{} posts -> {} posts", c.len(), split.len());
            save_corpus(&split, &out)
        }
        Command::ExportNer { corpus, out } => {
            let records = export_ner(&load_corpus(&corpus)?);
            let mut w = create(&out)?;
            write_ner_jsonl(&records, &mut w)?;
            w.flush()?;
            eprintln!("wrote {} records to {}", records.len(), out.display());
            Ok(())
        }
        Command::Train {
            gate,
            lexicon,
            corpus,
            out,
            min_count,
            min_ratio,
            epochs,
            learning_rate,
            batch_start,
            batch_stop,
            batch_factor,
            hash_buckets,
            seed,
        } => {
            let c = load_corpus(&corpus)?;
            let json = if lexicon {
                let m = train_lexicon(&c, min_count, min_ratio)?;
                eprintln!(
                    "lexicon: {} lexemes, {} active",
                    m.entries.len(),
                    m.active_lexemes().count()
                );
                m.to_json()?
            } else {
                debug_assert!(gate);
                let cfg = TrainConfig {
                    epochs,
                    batch_start,
                    batch_stop,
                    batch_factor,
                    learning_rate,
                    seed,
                };
                let m = train_gate_with(&c, &cfg, hash_buckets, |epoch, loss| {
                    info!("epoch {epoch}: loss {loss:.6}");
                })?;
                m.to_json()?
            };
            write_file(&out, &json)
        }
        Command::Predict {
            gate,
            lexicon,
            corpus,
            out,
            threshold,
            max_iterations,
            no_absorb_whitespace,
            jobs,
        } => {
            let cfg = PipelineConfig {
                gate_threshold: threshold,
                max_iterations,
                absorb_whitespace: !no_absorb_whitespace,
            };
            cfg.validate()?;
            let gate = GateModel::from_json(&read_text(&gate)?)
                .with_context(|| format!("{}", gate.display()))?;
            let lexicon = LexiconModel::from_json(&read_text(&lexicon)?)
                .with_context(|| format!("{}", lexicon.display()))?;
            let c = load_corpus(&corpus)?;
            let preds = run_corpus(&gate, &lexicon, &c, &cfg, jobs)?;
            let flagged = preds.iter().filter(|p| !p.spans.is_empty()).count();
            eprintln!("{} posts, {} with predicted spans", preds.len(), flagged);
            write_file(&out, &write_predictions(&preds)?)
        }
        Command::Baseline {
            corpus,
            out,
            probability,
            seed,
        } => {
            let c = load_corpus(&corpus)?;
            let preds = c
                .iter()
                .map(|p| {
                    let s = seed.wrapping_add(p.id as u64);
                    Ok(Prediction::new(
                        p.id,
                        random_baseline(probability, s, &p.text)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            write_file(&out, &write_predictions(&preds)?)
        }
        Command::Eval { pred, gold } => {
            let report = evaluate(&load_predictions(&pred)?, &load_corpus(&gold)?)?;
            eprint!("{}", report.summary());
            print_json(&report)
        }
        Command::Audit {
            corpus,
            pred,
            min_total,
        } => {
            let c = load_corpus(&corpus)?;
            let diffs = match pred {
                Some(p) => Some(diff_report(&load_predictions(&p)?, &c)?),
                None => None,
            };
            let report = AuditReport {
                consistency: consistency_report(&c, min_total)?,
                shape_flags: shape_flags(&c),
                diffs,
            };
            eprint!("{}", report.to_table());
            print_json(&report)
        }
        Command::Kfold {
            corpus,
            k,
            seed,
            out_dir,
        } => {
            let c = load_corpus(&corpus)?;
            let folds = kfold_split(&c, k, seed)?;
            fs::create_dir_all(&out_dir)
                .with_context(|| format!("{}: cannot create", out_dir.display()))?;
            let mut assignment = Vec::with_capacity(folds.len());
            for (i, fold) in folds.iter().enumerate() {
                let dir = out_dir.join(format!("fold_{i}"));
                fs::create_dir_all(&dir)
                    .with_context(|| format!("{}: cannot create", dir.display()))?;
                save_corpus(&fold.train, &dir.join("train.csv"))?;
                save_corpus(&fold.heldout, &dir.join("heldout.csv"))?;
                assignment.push(&fold.heldout_ids);
            }
            write_file(
                &out_dir.join("folds.json"),
                &serde_json::to_string_pretty(&serde_json::json!({
                    "k": k,
                    "seed": seed,
                    "heldout_ids": assignment,
                }))?,
            )?;
            eprintln!("wrote {k} folds to {}", out_dir.display());
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err
        .chain()
        .filter_map(|e| e.downcast_ref::<toxic_spans::Error>())
        .any(toxic_spans::Error::is_internal);
    if internal {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
