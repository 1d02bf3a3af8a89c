//! End-to-end wiring shared by the command line: configuration merging,
//! dataset preparation, training runs and their on-disk layout.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affect::{annotate, AffectAnnotation, EmotionLexicon, SentimentLexicon};
use crate::corpus::{load_corpus, tokenize_instance, CorpusFormat, Instance, Split, Stance, TokenizedInstance};
use crate::embeddings::{
    align_affect, build_question_sequence, build_sequence, question_record_id, read_embedding_file,
    validate_store, ContextInput, EmbeddingStore, InputLayout, Vocabulary,
};
use crate::error::{Error, Result};
use crate::explain::{engagement_scores, Engagement, HeatmapMeta};
use crate::network::{
    parameter_count, read_checkpoint, write_checkpoint, ForwardCache, Model, ModelConfig, ModelInput,
    DEFAULT_CONTEXT_DIM, DEFAULT_HIDDEN,
};
use crate::training::{predict_probs, train, EpochRecord, Example, TrainConfig, TrainHistory};

pub const CONFIG_FILE: &str = "config.json";
pub const HISTORY_FILE: &str = "history.jsonl";
pub const CHECKPOINT_FILE: &str = "best.ckpt";
pub const VOCAB_FILE: &str = "vocab.json";
pub const SUMMARY_FILE: &str = "summary.json";

pub const DEFAULT_MAX_LEN: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AffectMode {
    Sentiment,
    Emotion,
    None,
}

impl FromStr for AffectMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sentiment" => Ok(AffectMode::Sentiment),
            "emotion" => Ok(AffectMode::Emotion),
            "none" => Ok(AffectMode::None),
            _ => Err(Error::Config(format!(
                "unknown affect mode {s:?} (expected sentiment, emotion or none)"
            ))),
        }
    }
}

/// Parses `jsonl`, `tsv` or `csv`.
pub fn parse_corpus_format(s: &str) -> Result<CorpusFormat> {
    match s.to_ascii_lowercase().as_str() {
        "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
        "tsv" => Ok(CorpusFormat::Delimited(b'\t')),
        "csv" => Ok(CorpusFormat::Delimited(b',')),
        _ => Err(Error::Config(format!(
            "unknown corpus format {s:?} (expected jsonl, tsv or csv)"
        ))),
    }
}

/// Format named explicitly, else guessed from the extension (JSONL when
/// unknown).
pub fn corpus_format_for(path: &Path, explicit: Option<&str>) -> Result<CorpusFormat> {
    if let Some(f) = explicit {
        return parse_corpus_format(f);
    }
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    Ok(match ext.as_str() {
        "tsv" | "tab" => CorpusFormat::Delimited(b'\t'),
        "csv" => CorpusFormat::Delimited(b','),
        _ => CorpusFormat::Jsonl,
    })
}

/// Flat, all-optional settings as read from a config file or command-line
/// flags. Layers merge with [`ConfigOverrides::or`] and become a
/// [`RunConfig`] through [`ConfigOverrides::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigOverrides {
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<String>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub emotion_lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub layout: Option<InputLayout>,
    pub max_len: Option<usize>,
    pub min_count: Option<usize>,
    pub mode: Option<AffectMode>,
    pub bidirectional: Option<bool>,
    pub hidden: Option<usize>,
    pub context_dim: Option<usize>,
    pub affect_dim: Option<usize>,
    pub dropout: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub patience: Option<usize>,
    pub seed: Option<u64>,
    pub consistency_weight: Option<f64>,
}

macro_rules! merge_fields {
    ($hi:ident, $lo:ident, $($f:ident),*) => {
        ConfigOverrides { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl ConfigOverrides {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Field-wise merge where `self` takes precedence over `lower`.
    pub fn or(self, lower: ConfigOverrides) -> ConfigOverrides {
        merge_fields!(
            self, lower, corpus, corpus_format, sentiment_lexicon, emotion_lexicon, embeddings,
            layout, max_len, min_count, mode, bidirectional, hidden, context_dim, affect_dim,
            dropout, epochs, batch_size, lr, patience, seed, consistency_weight
        )
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let mode = self.mode.unwrap_or(AffectMode::Sentiment);
        let d_context = self.context_dim.unwrap_or(DEFAULT_CONTEXT_DIM);
        let seed = self.seed.unwrap_or(0);
        let model = ModelConfig {
            d_context,
            sentiment_mode: mode == AffectMode::Sentiment,
            emotion_mode: mode == AffectMode::Emotion,
            bidirectional: self.bidirectional.unwrap_or(mode != AffectMode::Emotion),
            hidden: self.hidden.unwrap_or(DEFAULT_HIDDEN),
            affect_dim: self.affect_dim.unwrap_or(d_context),
            seed,
            fallback_vocab: None,
            dropout: self.dropout.unwrap_or(0.0),
        };
        let defaults = TrainConfig::default();
        let epochs = self.epochs.unwrap_or(defaults.epochs);
        let train = TrainConfig {
            epochs,
            batch_size: self.batch_size.unwrap_or(defaults.batch_size),
            lr: self.lr.unwrap_or(defaults.lr),
            // an unset patience never outlasts a short run
            patience: self.patience.unwrap_or(defaults.patience.min(epochs)),
            seed,
            consistency_weight: self.consistency_weight.unwrap_or(0.0),
            ..defaults
        };
        let data = DataConfig {
            corpus: self.corpus.clone(),
            corpus_format: self.corpus_format.clone(),
            sentiment_lexicon: self.sentiment_lexicon.clone(),
            emotion_lexicon: self.emotion_lexicon.clone(),
            embeddings: self.embeddings.clone(),
            layout: self.layout.unwrap_or_default(),
            max_len: self.max_len.unwrap_or(DEFAULT_MAX_LEN),
            min_count: self.min_count.unwrap_or(1),
        };
        let cfg = RunConfig { data, model, train };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<String>,
    /// Bundled lexicon when absent.
    pub sentiment_lexicon: Option<PathBuf>,
    /// Bundled sample lexicon when absent.
    pub emotion_lexicon: Option<PathBuf>,
    /// Precomputed contextual embeddings; a trainable token table is used
    /// when absent.
    pub embeddings: Option<PathBuf>,
    pub layout: InputLayout,
    pub max_len: usize,
    /// Minimum training-split frequency for a fallback vocabulary entry.
    pub min_count: usize,
}

/// Effective configuration of a run, dumped to its directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        if self.data.max_len == 0 {
            return Err(Error::Config("max_len must be positive".into()));
        }
        if let Some(f) = &self.data.corpus_format {
            parse_corpus_format(f)?;
        }
        Ok(())
    }

    /// Fails on the first referenced input file that does not exist.
    pub fn check_paths(&self) -> Result<()> {
        let d = &self.data;
        for p in [&d.corpus, &d.sentiment_lexicon, &d.emotion_lexicon, &d.embeddings]
            .into_iter()
            .flatten()
        {
            if !p.is_file() {
                return Err(Error::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                ));
            }
        }
        Ok(())
    }

    pub fn corpus_path(&self) -> Result<&Path> {
        self.data
            .corpus
            .as_deref()
            .ok_or_else(|| Error::Config("no corpus given".into()))
    }

    pub fn load_corpus(&self) -> Result<Vec<Instance>> {
        let path = self.corpus_path()?;
        load_corpus(path, corpus_format_for(path, self.data.corpus_format.as_deref())?)
    }
}

pub struct Lexicons {
    pub sentiment: SentimentLexicon,
    pub emotion: EmotionLexicon,
}

impl Lexicons {
    pub fn load(data: &DataConfig) -> Result<Self> {
        Ok(Lexicons {
            sentiment: match &data.sentiment_lexicon {
                Some(p) => SentimentLexicon::load(p)?,
                None => SentimentLexicon::bundled(),
            },
            emotion: match &data.emotion_lexicon {
                Some(p) => EmotionLexicon::load(p)?,
                None => EmotionLexicon::bundled(),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct AnnotatedInstance {
    pub tokenized: TokenizedInstance,
    pub affect: AffectAnnotation,
}

pub fn annotate_corpus(corpus: &[Instance], lexicons: &Lexicons) -> Vec<AnnotatedInstance> {
    corpus
        .par_iter()
        .map(|inst| {
            let tokenized = tokenize_instance(inst);
            let affect = annotate(&tokenized, &lexicons.sentiment, &lexicons.emotion);
            AnnotatedInstance { tokenized, affect }
        })
        .collect()
}

/// Source of the context part of each token's input.
#[derive(Debug, Clone)]
pub enum Encoder {
    Contextual(EmbeddingStore),
    Fallback(Vocabulary),
}

impl Encoder {
    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        match self {
            Encoder::Fallback(v) => Some(v),
            Encoder::Contextual(_) => None,
        }
    }
}

/// Opens the configured embedding file, or builds a fallback vocabulary
/// from the training split when there is none (or uses `vocab`). Fills the
/// data-dependent model fields of `cfg`.
pub fn prepare_encoder(
    cfg: &mut RunConfig,
    annotated: &[AnnotatedInstance],
    vocab: Option<Vocabulary>,
) -> Result<Encoder> {
    match &cfg.data.embeddings {
        Some(path) => {
            let store = read_embedding_file(path)?;
            let tokenized: Vec<TokenizedInstance> =
                annotated.iter().map(|a| a.tokenized.clone()).collect();
            let report = validate_store(&store, &tokenized);
            if !report.missing_ids.is_empty() {
                return Err(Error::MissingEmbeddings {
                    ids: report.missing_ids,
                });
            }
            if let Some(first) = report.errors.first() {
                return Err(Error::Validation(first.clone()));
            }
            if cfg.model.d_context != store.dim() {
                log::info!(
                    "context dimension set to {} from the embedding file",
                    store.dim()
                );
                if cfg.model.affect_dim == cfg.model.d_context {
                    cfg.model.affect_dim = store.dim();
                }
                cfg.model.d_context = store.dim();
            }
            cfg.model.fallback_vocab = None;
            Ok(Encoder::Contextual(store))
        }
        None => {
            let vocab = match vocab {
                Some(v) => v,
                None => {
                    let seqs: Vec<Vec<String>> = annotated
                        .iter()
                        .filter(|a| a.tokenized.instance.split == Split::Train)
                        .map(|a| build_sequence(&a.tokenized, cfg.data.layout, cfg.data.max_len).tokens)
                        .collect();
                    Vocabulary::build(seqs.iter().map(|s| s.as_slice()), cfg.data.min_count)
                }
            };
            cfg.model.fallback_vocab = Some(vocab.len());
            Ok(Encoder::Fallback(vocab))
        }
    }
}

/// One instance encoded for the network.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub annotated: AnnotatedInstance,
    pub tokens: Vec<String>,
    pub word_alignment: Vec<Option<u32>>,
    pub truncated: usize,
    pub example: Example,
}

fn model_input(
    context: ContextInput,
    alignment: &[Option<u32>],
    affect: &AffectAnnotation,
) -> Result<ModelInput> {
    let (sentiment, emotion) = align_affect(affect, alignment)?;
    Ok(ModelInput {
        context,
        sentiment,
        emotion,
    })
}

pub fn encode_instance(
    annotated: &AnnotatedInstance,
    encoder: &Encoder,
    data: &DataConfig,
    with_question: bool,
) -> Result<Prepared> {
    let id = &annotated.tokenized.instance.id;
    let (tokens, word_alignment, truncated, context) = match encoder {
        Encoder::Contextual(store) => {
            let rec = store
                .get(id)
                .ok_or_else(|| Error::MissingEmbeddings { ids: vec![id.clone()] })?;
            (
                rec.tokens.clone(),
                rec.word_alignment.clone(),
                0,
                ContextInput::Frozen(rec.to_tensor()),
            )
        }
        Encoder::Fallback(vocab) => {
            let seq = build_sequence(&annotated.tokenized, data.layout, data.max_len);
            let ids = vocab.ids(&seq.tokens);
            (seq.tokens, seq.word_alignment, seq.truncated, ContextInput::Trainable(ids))
        }
    };
    if tokens.is_empty() {
        return Err(Error::Shape(format!("instance {id:?} has no tokens")));
    }
    let input = model_input(context, &word_alignment, &annotated.affect)?;
    let question = if with_question {
        let (ctx, align) = match encoder {
            Encoder::Contextual(store) => {
                let qid = question_record_id(id);
                let rec = store
                    .get(&qid)
                    .ok_or_else(|| Error::MissingEmbeddings { ids: vec![qid.clone()] })?;
                (ContextInput::Frozen(rec.to_tensor()), rec.word_alignment.clone())
            }
            Encoder::Fallback(vocab) => {
                let seq = build_question_sequence(&annotated.tokenized, data.layout, data.max_len);
                (ContextInput::Trainable(vocab.ids(&seq.tokens)), seq.word_alignment)
            }
        };
        Some(model_input(ctx, &align, &annotated.affect)?)
    } else {
        None
    };
    Ok(Prepared {
        example: Example {
            id: id.clone(),
            input,
            question,
            gold: annotated.tokenized.instance.stance,
        },
        annotated: annotated.clone(),
        tokens,
        word_alignment,
        truncated,
    })
}

pub fn encode_all(
    annotated: &[AnnotatedInstance],
    encoder: &Encoder,
    data: &DataConfig,
    with_question: bool,
) -> Result<Vec<Prepared>> {
    let out: Vec<Prepared> = annotated
        .par_iter()
        .map(|a| encode_instance(a, encoder, data, with_question))
        .collect::<Result<_>>()?;
    let truncated = out.iter().filter(|p| p.truncated > 0).count();
    if truncated > 0 {
        log::warn!("{truncated} instances truncated to {} tokens", data.max_len);
    }
    Ok(out)
}

/// Examples of one split, in corpus order.
pub fn split_examples(prepared: &[Prepared], split: Split) -> Vec<Example> {
    prepared
        .iter()
        .filter(|p| p.annotated.tokenized.instance.split == split)
        .map(|p| p.example.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub best_epoch: usize,
    pub best_dev_f1: f64,
    pub epochs_run: usize,
    pub stopped_early: bool,
    pub initial_train_loss: f64,
    pub parameter_count: usize,
    pub train_instances: usize,
    pub dev_instances: usize,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Trains a model from scratch and writes the run directory:
/// `config.json`, `vocab.json` (fallback mode), `history.jsonl`,
/// `best.ckpt` and `summary.json`.
pub fn run_training(mut cfg: RunConfig, out_dir: &Path) -> Result<(TrainSummary, TrainHistory)> {
    cfg.validate()?;
    cfg.check_paths()?;
    let corpus = cfg.load_corpus()?;
    let lexicons = Lexicons::load(&cfg.data)?;
    let annotated = annotate_corpus(&corpus, &lexicons);
    let encoder = prepare_encoder(&mut cfg, &annotated, None)?;
    let with_question = cfg.train.consistency_weight > 0.0;
    let prepared = encode_all(&annotated, &encoder, &cfg.data, with_question)?;
    let train_set = split_examples(&prepared, Split::Train);
    let dev_set = split_examples(&prepared, Split::Dev);
    cfg.validate()?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_json(&out_dir.join(CONFIG_FILE), &cfg)?;
    if let Some(v) = encoder.vocabulary() {
        write_json(&out_dir.join(VOCAB_FILE), v)?;
    }
    let history_path = out_dir.join(HISTORY_FILE);
    let mut history_file = BufWriter::new(
        File::create(&history_path).map_err(|e| Error::io(&history_path, e))?,
    );
    let ckpt_path = out_dir.join(CHECKPOINT_FILE);

    let model = Model::new(cfg.model.clone())?;
    let parameter_count = model.parameter_count();
    log::info!(
        "training on {} instances ({} dev), {parameter_count} parameters",
        train_set.len(),
        dev_set.len()
    );
    let outcome = train(model, &train_set, &dev_set, &cfg.train, |rec: &EpochRecord, best| {
        let line = serde_json::to_string(rec)?;
        writeln!(history_file, "{line}")
            .and_then(|_| history_file.flush())
            .map_err(|e| Error::io(&history_path, e))?;
        if let Some(m) = best {
            write_checkpoint(&ckpt_path, m)?;
        }
        Ok(())
    })?;
    let h = &outcome.history;
    let summary = TrainSummary {
        best_epoch: h.best_epoch,
        best_dev_f1: h.best_dev_f1,
        epochs_run: h.epochs.len(),
        stopped_early: h.stopped_early,
        initial_train_loss: h.initial_train_loss,
        parameter_count,
        train_instances: train_set.len(),
        dev_instances: dev_set.len(),
    };
    write_json(&out_dir.join(SUMMARY_FILE), &summary)?;
    Ok((summary, outcome.history))
}

/// A finished run loaded back from its directory.
pub struct LoadedRun {
    pub config: RunConfig,
    pub model: Model,
    pub vocab: Option<Vocabulary>,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let cfg_path = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?;
    let mut config: RunConfig = serde_json::from_str(&text)?;
    let model = read_checkpoint(dir.join(CHECKPOINT_FILE))?;
    config.model = model.config.clone();
    let vocab_path = dir.join(VOCAB_FILE);
    let vocab = if model.config.fallback_vocab.is_some() {
        Some(Vocabulary::load(&vocab_path)?)
    } else {
        None
    };
    Ok(LoadedRun {
        config,
        model,
        vocab,
    })
}

impl LoadedRun {
    /// Annotates and encodes `corpus` the way the run was trained.
    pub fn prepare(&self, corpus: &[Instance]) -> Result<Vec<Prepared>> {
        let mut cfg = self.config.clone();
        let lexicons = Lexicons::load(&cfg.data)?;
        let annotated = annotate_corpus(corpus, &lexicons);
        let encoder = prepare_encoder(&mut cfg, &annotated, self.vocab.clone())?;
        if cfg.model.d_context != self.model.config.d_context {
            return Err(Error::Config(format!(
                "embeddings have dimension {}, the model expects {}",
                cfg.model.d_context, self.model.config.d_context
            )));
        }
        encode_all(&annotated, &encoder, &cfg.data, false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub pred: Stance,
}

/// Predictions for prepared instances, in order.
pub fn predict_prepared(model: &Model, prepared: &[Prepared]) -> Result<Vec<PredictionRecord>> {
    let inputs: Vec<&ModelInput> = prepared.iter().map(|p| &p.example.input).collect();
    let probs = predict_probs(model, &inputs)?;
    Ok(prepared
        .iter()
        .zip(probs)
        .map(|(p, pr)| PredictionRecord {
            id: p.example.id.clone(),
            pred: if pr[1] > pr[0] { Stance::Con } else { Stance::Pro },
        })
        .collect())
}

pub fn write_predictions(path: &Path, preds: &[PredictionRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in preds {
        writeln!(w, "{}", serde_json::to_string(p)?).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord = serde_json::from_str(&line).map_err(|e| Error::Corpus {
            line: i + 1,
            message: format!("{}: {e}", path.display()),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Forward pass and engagement for one instance of a loaded run.
pub struct Explanation {
    pub prepared: Prepared,
    pub cache: ForwardCache,
    pub engagement: Engagement,
    pub meta: HeatmapMeta,
}

pub fn explain_instance(run: &LoadedRun, corpus: &[Instance], id: &str) -> Result<Explanation> {
    let inst = corpus
        .iter()
        .find(|i| i.id == id)
        .ok_or_else(|| Error::UnknownInstance(id.to_string()))?;
    let prepared = run
        .prepare(std::slice::from_ref(inst))?
        .pop()
        .expect("one instance prepared");
    let cache = run.model.forward(&prepared.example.input)?;
    let engagement = engagement_scores(
        &cache,
        &prepared.tokens,
        &prepared.word_alignment,
        prepared.annotated.tokenized.question_tokens.len(),
    )?;
    let meta = HeatmapMeta {
        id: inst.id.clone(),
        question: inst.question.clone(),
        predicted: Some(cache.predicted()),
        gold: Some(inst.stance),
    };
    Ok(Explanation {
        prepared,
        cache,
        engagement,
        meta,
    })
}

/// Parameter count report against a reference model size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub parameter_count: usize,
    pub reference: usize,
    /// `reference / parameter_count`
    pub ratio: f64,
    pub model: ModelConfig,
}

/// Size of the BERT-base reference model.
pub const REFERENCE_PARAMETERS: usize = 110_000_000;

pub fn param_report(model: &ModelConfig) -> Result<ParamReport> {
    let n = parameter_count(model)?;
    Ok(ParamReport {
        parameter_count: n,
        reference: REFERENCE_PARAMETERS,
        ratio: REFERENCE_PARAMETERS as f64 / n as f64,
        model: model.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let file = ConfigOverrides {
            hidden: Some(32),
            epochs: Some(4),
            seed: Some(1),
            ..Default::default()
        };
        let flags = ConfigOverrides {
            epochs: Some(2),
            ..Default::default()
        };
        let cfg = flags.or(file).resolve().unwrap();
        assert_eq!(cfg.train.epochs, 2);
        assert_eq!(cfg.model.hidden, 32);
        assert_eq!(cfg.train.batch_size, 8);
        assert_eq!((cfg.model.seed, cfg.train.seed), (1, 1));
    }

    #[test]
    fn mode_sets_direction_and_affect_dim() {
        let cfg = ConfigOverrides {
            mode: Some(AffectMode::Emotion),
            context_dim: Some(16),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert!(cfg.model.emotion_mode && !cfg.model.bidirectional);
        assert_eq!(cfg.model.affect_dim, 16);
        let cfg = ConfigOverrides::default().resolve().unwrap();
        assert!(cfg.model.sentiment_mode && cfg.model.bidirectional);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<ConfigOverrides>(r#"{"hiden": 3}"#).is_err());
        let o: ConfigOverrides = serde_json::from_str(r#"{"mode": "none", "layout": "unary"}"#).unwrap();
        assert_eq!(o.mode, Some(AffectMode::None));
        assert_eq!(o.layout, Some(InputLayout::Unary));
    }

    #[test]
    fn format_inference() {
        assert_eq!(
            corpus_format_for(Path::new("a.tsv"), None).unwrap(),
            CorpusFormat::Delimited(b'\t')
        );
        assert_eq!(corpus_format_for(Path::new("a.jsonl"), None).unwrap(), CorpusFormat::Jsonl);
        assert_eq!(
            corpus_format_for(Path::new("a.jsonl"), Some("csv")).unwrap(),
            CorpusFormat::Delimited(b',')
        );
        assert!(parse_corpus_format("xml").is_err());
    }

    #[test]
    fn default_param_report() {
        let r = param_report(&ModelConfig::default()).unwrap();
        assert_eq!(r.parameter_count, 4_435_202);
        assert!(r.ratio > 20.0);
    }
}
