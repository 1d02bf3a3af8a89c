use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use stancelab::corpus::{
    corpus_stats, make_fixture_with, save_corpus, tokenize_instance, FixtureConfig, Instance, Split, Stance,
};
use stancelab::embeddings::{read_embedding_file, InputLayout};
use stancelab::evaluation::{evaluate, mcnemar_test, sentiment_profile};
use stancelab::explain::{render_heatmap, top_tokens, HeatmapFormat};
use stancelab::pipeline::{
    annotate_corpus, corpus_format_for, explain_instance, load_run, param_report, predict_prepared,
    read_predictions, run_training, write_predictions, AffectMode, ConfigOverrides, Lexicons,
};
use stancelab::{Error, ErrorKind, Result};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "stancelab", version, about = "Affect-enriched stance classification")]
struct Cli {
    /// JSON config file; command-line flags take precedence over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every stochastic component
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a delimited or JSONL corpus to canonical JSONL
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// jsonl, tsv or csv (guessed from the extension when omitted)
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-split instance, stance, topic and word counts
    Stats {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Per-word sentiment and emotion labels as JSONL
    Annotate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model and write a run directory
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Run directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a trained run on one split
    Eval {
        #[arg(long)]
        run: PathBuf,
        /// Defaults to the corpus the run was trained on
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// train, dev, test or all
        #[arg(long, default_value = "test")]
        split: String,
        /// Write per-instance predictions (JSONL)
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Write the metrics JSON here as well as to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// McNemar's test between two prediction files
    Mcnemar {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Corpus holding the gold labels
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Engagement heatmap for one instance
    Explain {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// json, html or ansi
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print the k most engaged words
        #[arg(long)]
        top: Option<usize>,
    },
    /// Mean perspective sentiment per topic and stance
    Profile {
        #[command(flatten)]
        data: DataArgs,
        /// Restrict to these topics (repeatable)
        #[arg(long)]
        topic: Vec<String>,
    },
    /// Parameter count of a model configuration
    ParamCount {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Check an embedding file against a corpus
    ValidateEmbeddings {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Write a synthetic corpus whose stance is carried by sentiment words
    Fixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Probability that planted words agree with the stance
        #[arg(long, default_value_t = 1.0)]
        strength: f64,
        /// Use separate planted words for train and evaluation splits
        #[arg(long)]
        disjoint: bool,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    corpus_format: Option<String>,
    #[arg(long)]
    sentiment_lexicon: Option<PathBuf>,
    #[arg(long)]
    emotion_lexicon: Option<PathBuf>,
}

impl DataArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            corpus: self.corpus.clone(),
            corpus_format: self.corpus_format.clone(),
            sentiment_lexicon: self.sentiment_lexicon.clone(),
            emotion_lexicon: self.emotion_lexicon.clone(),
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// sentiment, emotion or none
    #[arg(long)]
    mode: Option<String>,
    /// Precomputed contextual embeddings
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Width of the trainable token table used without --embeddings
    #[arg(long)]
    fallback_dim: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    affect_dim: Option<usize>,
    #[arg(long, conflicts_with = "unidirectional")]
    bidirectional: bool,
    #[arg(long)]
    unidirectional: bool,
    #[arg(long)]
    dropout: Option<f64>,
    /// pair or unary
    #[arg(long)]
    layout: Option<String>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    min_count: Option<usize>,
}

impl ModelArgs {
    fn overrides(&self) -> Result<ConfigOverrides> {
        let layout = match self.layout.as_deref() {
            None => None,
            Some("pair") => Some(InputLayout::Pair),
            Some("unary") => Some(InputLayout::Unary),
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown layout {other:?} (expected pair or unary)"
                )))
            }
        };
        Ok(ConfigOverrides {
            mode: self.mode.as_deref().map(str::parse::<AffectMode>).transpose()?,
            embeddings: self.embeddings.clone(),
            context_dim: self.fallback_dim,
            hidden: self.hidden,
            affect_dim: self.affect_dim,
            bidirectional: match (self.bidirectional, self.unidirectional) {
                (true, _) => Some(true),
                (_, true) => Some(false),
                _ => None,
            },
            dropout: self.dropout,
            layout,
            max_len: self.max_len,
            min_count: self.min_count,
            ..Default::default()
        })
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    /// Weight of the question/perspective consistency term (0 disables it)
    #[arg(long)]
    consistency_weight: Option<f64>,
}

impl TrainArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            patience: self.patience,
            consistency_weight: self.consistency_weight,
            ..Default::default()
        }
    }
}

/// flags > config file > defaults
fn merged(cli: &Cli, flags: ConfigOverrides) -> Result<ConfigOverrides> {
    let flags = ConfigOverrides {
        seed: cli.seed,
        ..Default::default()
    }
    .or(flags);
    Ok(match &cli.config {
        Some(path) => flags.or(ConfigOverrides::load(path)?),
        None => flags,
    })
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if let Some(path) = out {
        fs::write(path, &text).map_err(|e| Error::io(path, e))?;
    }
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn parse_split(s: &str) -> Result<Option<Split>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(None);
    }
    s.parse::<Split>()
        .map(Some)
        .map_err(|_| Error::Config(format!("unknown split {s:?} (expected train, dev, test or all)")))
}

fn load_plain_corpus(path: &Path, format: Option<&str>) -> Result<Vec<Instance>> {
    stancelab::corpus::load_corpus(path, corpus_format_for(path, format)?)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest { input, format, out } => {
            let corpus = load_plain_corpus(input, format.as_deref())?;
            save_corpus(out, &corpus)?;
            log::info!("wrote {} instances to {}", corpus.len(), out.display());
        }
        Command::Stats { corpus } => {
            let corpus = load_plain_corpus(corpus, None)?;
            emit(&corpus_stats(&corpus), None)?;
        }
        Command::Annotate { data, out } => {
            let cfg = merged(&cli, data.overrides())?.resolve()?;
            cfg.check_paths()?;
            let corpus = cfg.load_corpus()?;
            let lexicons = Lexicons::load(&cfg.data)?;
            let annotated = annotate_corpus(&corpus, &lexicons);
            let mut text = String::new();
            for a in &annotated {
                let row = serde_json::json!({
                    "id": a.tokenized.instance.id,
                    "words": a.tokenized.words().collect::<Vec<_>>(),
                    "sentence_scores": a.affect.sentence_scores,
                    "sentiment": a.affect.sentiment_labels,
                    "emotion": a.affect.emotion_labels,
                });
                text.push_str(&serde_json::to_string(&row)?);
                text.push('\n');
            }
            match out {
                Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e))?,
                None => print!("{text}"),
            }
        }
        Command::Train {
            data,
            model,
            train,
            out,
        } => {
            let flags = data.overrides().or(model.overrides()?).or(train.overrides());
            let cfg = merged(&cli, flags)?.resolve()?;
            let (summary, _) = run_training(cfg, out)?;
            emit(&summary, None)?;
        }
        Command::Eval {
            run,
            corpus,
            embeddings,
            split,
            predictions,
            out,
        } => {
            let split = parse_split(split)?;
            let mut loaded = load_run(run)?;
            if let Some(e) = embeddings {
                loaded.config.data.embeddings = Some(e.clone());
            }
            let corpus = match corpus {
                Some(p) => load_plain_corpus(p, None)?,
                None => loaded.config.load_corpus()?,
            };
            let selected: Vec<Instance> = corpus
                .into_iter()
                .filter(|i| split.is_none_or(|s| i.split == s))
                .collect();
            if selected.is_empty() {
                return Err(Error::Config("no instances in the selected split".into()));
            }
            let prepared = loaded.prepare(&selected)?;
            let preds = predict_prepared(&loaded.model, &prepared)?;
            if let Some(p) = predictions {
                write_predictions(p, &preds)?;
            }
            let pred_labels: Vec<Stance> = preds.iter().map(|p| p.pred).collect();
            let golds: Vec<Stance> = selected.iter().map(|i| i.stance).collect();
            let report = evaluate(&pred_labels, &golds)?;
            emit(&report, out.as_deref())?;
        }
        Command::Mcnemar { a, b, corpus } => {
            let corpus = load_plain_corpus(corpus, None)?;
            let gold: std::collections::HashMap<&str, Stance> =
                corpus.iter().map(|i| (i.id.as_str(), i.stance)).collect();
            let pa = read_predictions(a)?;
            let pb: std::collections::HashMap<String, Stance> =
                read_predictions(b)?.into_iter().map(|p| (p.id, p.pred)).collect();
            if pa.len() != pb.len() {
                return Err(Error::Config(format!(
                    "{} predictions in {} but {} in {}",
                    pa.len(),
                    a.display(),
                    pb.len(),
                    b.display()
                )));
            }
            let (mut va, mut vb, mut vg) = (Vec::new(), Vec::new(), Vec::new());
            for p in &pa {
                let g = *gold
                    .get(p.id.as_str())
                    .ok_or_else(|| Error::UnknownInstance(p.id.clone()))?;
                let other = *pb
                    .get(&p.id)
                    .ok_or_else(|| Error::UnknownInstance(p.id.clone()))?;
                va.push(p.pred);
                vb.push(other);
                vg.push(g);
            }
            emit(&mcnemar_test(&va, &vb, &vg)?, None)?;
        }
        Command::Explain {
            run,
            id,
            corpus,
            embeddings,
            format,
            out,
            top,
        } => {
            let format: HeatmapFormat = format.parse()?;
            let mut loaded = load_run(run)?;
            if let Some(e) = embeddings {
                loaded.config.data.embeddings = Some(e.clone());
            }
            let corpus = match corpus {
                Some(p) => load_plain_corpus(p, None)?,
                None => loaded.config.load_corpus()?,
            };
            let ex = explain_instance(&loaded, &corpus, id)?;
            let doc = render_heatmap(&ex.engagement, &ex.meta, format)?;
            match out {
                Some(p) => fs::write(p, &doc).map_err(|e| Error::io(p, e))?,
                None => print!("{doc}"),
            }
            if let Some(k) = top {
                let ranked = top_tokens(&ex.engagement, *k, true);
                if out.is_some() {
                    emit(&ranked, None)?;
                } else {
                    eprintln!("{}", serde_json::to_string(&ranked)?);
                }
            }
        }
        Command::Profile { data, topic } => {
            let cfg = merged(&cli, data.overrides())?.resolve()?;
            cfg.check_paths()?;
            let corpus = cfg.load_corpus()?;
            let lexicons = Lexicons::load(&cfg.data)?;
            let annotated = annotate_corpus(&corpus, &lexicons);
            let (tok, ann): (Vec<_>, Vec<_>) =
                annotated.into_iter().map(|a| (a.tokenized, a.affect)).unzip();
            emit(&sentiment_profile(&tok, &ann, topic)?, None)?;
        }
        Command::ParamCount { model } => {
            let cfg = merged(&cli, model.overrides()?)?.resolve()?;
            emit(&param_report(&cfg.model)?, None)?;
        }
        Command::ValidateEmbeddings { embeddings, corpus } => {
            let store = read_embedding_file(embeddings)?;
            let corpus = load_plain_corpus(corpus, None)?;
            let tokenized: Vec<_> = corpus.iter().map(tokenize_instance).collect();
            let report = stancelab::embeddings::validate_store(&store, &tokenized);
            emit(&report, None)?;
            if !report.is_ok() {
                return Err(Error::Validation(format!(
                    "{} missing ids, {} errors",
                    report.missing_ids.len(),
                    report.errors.len()
                )));
            }
        }
        Command::Fixture {
            out,
            n,
            strength,
            disjoint,
        } => {
            if *n < 2 {
                return Err(Error::Config("a fixture needs at least two instances".into()));
            }
            let corpus = make_fixture_with(FixtureConfig {
                seed: cli.seed.unwrap_or(0),
                n_instances: *n,
                affect_signal_strength: *strength,
                disjoint_eval_vocabulary: *disjoint,
            });
            save_corpus(out, &corpus)?;
        }
    }
    Ok(())
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("STANCELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("STANCELAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numeric => EXIT_NUMERIC,
            })
        }
    }
}
