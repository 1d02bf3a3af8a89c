//! Token embedding inputs: the binary file of precomputed contextual token
//! states, and the trainable fallback vocabulary used when no contextual
//! embeddings are available.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! header:  magic "STNCEMB1" | version u32 | dim u32 | count u64
//! record:  id_len u32 | id utf-8
//!          T u32
//!          T x (tok_len u32 | tok utf-8)
//!          T x alignment u32        (u32::MAX marks a special token)
//!          T x dim f32, row-major
//! ```

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affect::{AffectAnnotation, Emotion, Sentiment};
use crate::corpus::TokenizedInstance;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 8] = b"STNCEMB1";
pub const VERSION: u32 = 1;
/// On-disk alignment value for tokens that belong to no word.
pub const NO_WORD: u32 = u32::MAX;
/// Separator between question and perspective in pair layout.
pub const SEP_TOKEN: &str = "[SEP]";
const HEADER_LEN: u64 = 8 + 4 + 4 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub instance_id: String,
    /// Sub-token strings, one per matrix row.
    pub tokens: Vec<String>,
    /// Source word of each sub-token, `None` for special tokens.
    pub word_alignment: Vec<Option<u32>>,
    pub dim: usize,
    /// `tokens.len() x dim`, row-major.
    pub matrix: Vec<f32>,
}

impl EmbeddingRecord {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.matrix[t * self.dim..(t + 1) * self.dim]
    }

    /// The matrix promoted to `f64`.
    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_vec(
            self.len(),
            self.dim,
            self.matrix.iter().map(|&x| f64::from(x)).collect(),
        )
    }

    fn check(&self) -> std::result::Result<(), String> {
        let t = self.tokens.len();
        if self.word_alignment.len() != t {
            return Err(format!(
                "record {:?}: {} alignment entries for {} tokens",
                self.instance_id,
                self.word_alignment.len(),
                t
            ));
        }
        if self.matrix.len() != t * self.dim {
            return Err(format!(
                "record {:?}: matrix has {} values, expected {}",
                self.instance_id,
                self.matrix.len(),
                t * self.dim
            ));
        }
        check_alignment(&self.word_alignment)
            .map_err(|pos| format!("record {:?}: alignment decreases at position {pos}", self.instance_id))
    }
}

/// Word indices must be non-decreasing once special tokens are skipped.
fn check_alignment(alignment: &[Option<u32>]) -> std::result::Result<(), usize> {
    let mut last = None;
    for (pos, w) in alignment.iter().enumerate() {
        if let Some(w) = *w {
            if last.is_some_and(|l| w < l) {
                return Err(pos);
            }
            last = Some(w);
        }
    }
    Ok(())
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

/// Serializes records; every record must have dimension `dim`.
pub fn encode_embeddings(dim: usize, records: &[EmbeddingRecord]) -> Result<Vec<u8>> {
    if dim == 0 || dim > u32::MAX as usize {
        return Err(Error::Config(format!("embedding dimension {dim} out of range")));
    }
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, dim as u32);
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for rec in records {
        if rec.dim != dim {
            return Err(Error::DimMismatch {
                id: rec.instance_id.clone(),
                expected: dim,
                found: rec.dim,
            });
        }
        rec.check().map_err(Error::Shape)?;
        put_str(&mut out, &rec.instance_id);
        put_u32(&mut out, rec.tokens.len() as u32);
        for tok in &rec.tokens {
            put_str(&mut out, tok);
        }
        for w in &rec.word_alignment {
            put_u32(&mut out, w.unwrap_or(NO_WORD));
        }
        for v in &rec.matrix {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Writes an embedding file and returns the number of records written.
pub fn write_embedding_file(
    path: impl AsRef<Path>,
    dim: usize,
    records: &[EmbeddingRecord],
) -> Result<u64> {
    let path = path.as_ref();
    let bytes = encode_embeddings(dim, records)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))?;
    Ok(records.len() as u64)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let remaining = self.buf.len() - self.pos;
        if n > remaining {
            return Err(Error::Truncated {
                offset: self.pos as u64,
                needed: (n - remaining) as u64,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let at = self.pos as u64;
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::EmbeddingFormat {
            offset: at,
            message: "invalid UTF-8 string".into(),
        })
    }
}

/// In-memory, id-indexed view of an embedding file.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    records: Vec<EmbeddingRecord>,
    index: HashMap<String, usize>,
}

impl EmbeddingStore {
    pub fn decode(buf: &[u8]) -> Result<Self> {
        if buf.len() < MAGIC.len() || &buf[..MAGIC.len()] != MAGIC {
            return Err(Error::NotEmbeddingFile);
        }
        let mut r = Reader { buf, pos: MAGIC.len() };
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let dim = r.u32()? as usize;
        if dim == 0 {
            return Err(Error::EmbeddingFormat {
                offset: 12,
                message: "dimension is zero".into(),
            });
        }
        let count = r.u64()?;
        debug_assert_eq!(r.pos as u64, HEADER_LEN);
        let mut records = Vec::new();
        let mut index = HashMap::new();
        for _ in 0..count {
            let start = r.pos as u64;
            let instance_id = r.string()?;
            let t = r.u32()? as usize;
            let tokens = (0..t).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
            let word_alignment = (0..t)
                .map(|_| r.u32().map(|w| (w != NO_WORD).then_some(w)))
                .collect::<Result<Vec<_>>>()?;
            let raw = r.take(t * dim * 4)?;
            let matrix = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            let rec = EmbeddingRecord {
                instance_id,
                tokens,
                word_alignment,
                dim,
                matrix,
            };
            rec.check().map_err(|message| Error::EmbeddingFormat {
                offset: start,
                message,
            })?;
            if index.insert(rec.instance_id.clone(), records.len()).is_some() {
                return Err(Error::EmbeddingFormat {
                    offset: start,
                    message: format!("duplicate record id {:?}", rec.instance_id),
                });
            }
            records.push(rec);
        }
        if r.pos != buf.len() {
            return Err(Error::EmbeddingFormat {
                offset: r.pos as u64,
                message: format!(
                    "{} trailing bytes after {count} records",
                    buf.len() - r.pos
                ),
            });
        }
        Ok(EmbeddingStore {
            dim,
            records,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }
}

pub fn read_embedding_file(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    EmbeddingStore::decode(&buf)
}

/// How question and perspective tokens are laid out in one input sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputLayout {
    /// question, separator, perspective
    #[default]
    Pair,
    /// question and perspective concatenated
    Unary,
}

/// Token sequence fed to the model, aligned back to instance words.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub word_alignment: Vec<Option<u32>>,
    /// Tokens dropped from the tail to respect the length limit.
    pub truncated: usize,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Word-level sequence for fallback mode. Tails beyond `max_len` are cut.
pub fn build_sequence(
    tokenized: &TokenizedInstance,
    layout: InputLayout,
    max_len: usize,
) -> TokenSequence {
    let nq = tokenized.question_tokens.len();
    let mut tokens: Vec<String> = tokenized.question_tokens.clone();
    let mut word_alignment: Vec<Option<u32>> = (0..nq as u32).map(Some).collect();
    if layout == InputLayout::Pair {
        tokens.push(SEP_TOKEN.to_string());
        word_alignment.push(None);
    }
    for (i, tok) in tokenized.perspective_tokens.iter().enumerate() {
        tokens.push(tok.clone());
        word_alignment.push(Some((nq + i) as u32));
    }
    let truncated = tokens.len().saturating_sub(max_len);
    tokens.truncate(max_len);
    word_alignment.truncate(max_len);
    TokenSequence {
        tokens,
        word_alignment,
        truncated,
    }
}

/// Question-only sequence (question, then separator in pair layout), used
/// by the consistency penalty.
pub fn build_question_sequence(
    tokenized: &TokenizedInstance,
    layout: InputLayout,
    max_len: usize,
) -> TokenSequence {
    let nq = tokenized.question_tokens.len();
    let mut tokens = tokenized.question_tokens.clone();
    let mut word_alignment: Vec<Option<u32>> = (0..nq as u32).map(Some).collect();
    if layout == InputLayout::Pair {
        tokens.push(SEP_TOKEN.to_string());
        word_alignment.push(None);
    }
    let truncated = tokens.len().saturating_sub(max_len);
    tokens.truncate(max_len);
    word_alignment.truncate(max_len);
    TokenSequence {
        tokens,
        word_alignment,
        truncated,
    }
}

/// Broadcasts word-level affect labels onto sequence positions. Sub-tokens
/// inherit their word's labels; special tokens are neutral.
pub fn align_affect(
    annotation: &AffectAnnotation,
    word_alignment: &[Option<u32>],
) -> Result<(Vec<Sentiment>, Vec<Emotion>)> {
    let n = annotation.len();
    let mut sentiment = Vec::with_capacity(word_alignment.len());
    let mut emotion = Vec::with_capacity(word_alignment.len());
    for (pos, w) in word_alignment.iter().enumerate() {
        match *w {
            None => {
                sentiment.push(Sentiment::Neutral);
                emotion.push(Emotion::Neutral);
            }
            Some(w) if (w as usize) < n => {
                sentiment.push(annotation.sentiment_labels[w as usize]);
                emotion.push(annotation.emotion_labels[w as usize]);
            }
            Some(w) => {
                return Err(Error::Shape(format!(
                    "token {pos} aligned to word {w}, but the instance has {n} words"
                )))
            }
        }
    }
    Ok((sentiment, emotion))
}

/// Token-to-row map for the trainable fallback table. Row 0 is reserved for
/// out-of-vocabulary tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

pub const OOV_TOKEN: &str = "[UNK]";

impl Vocabulary {
    /// Builds a vocabulary from token sequences in first-seen order, keeping
    /// tokens seen at least `min_count` times.
    pub fn build<'a, I, S>(sequences: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = &'a [S]>,
        S: AsRef<str> + 'a,
    {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut order: Vec<&str> = Vec::new();
        for seq in sequences {
            for t in seq {
                let t = t.as_ref();
                let c = counts.entry(t).or_insert_with(|| {
                    order.push(t);
                    0
                });
                *c += 1;
            }
        }
        let tokens = std::iter::once(OOV_TOKEN.to_string())
            .chain(
                order
                    .into_iter()
                    .filter(|t| counts[t] >= min_count && *t != OOV_TOKEN)
                    .map(str::to_string),
            )
            .collect();
        Self::from_tokens(tokens)
    }

    /// `tokens[0]` is taken as the out-of-vocabulary row.
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn ids<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let v: Vocabulary = serde_json::from_str(&text)?;
        Ok(Self::from_tokens(v.tokens))
    }
}

/// Token-level context input to the network.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextInput {
    /// Precomputed contextual states, `T x d`; receive no gradient.
    Frozen(Tensor),
    /// Row ids into the model's trainable fallback table.
    Trainable(Vec<usize>),
}

impl ContextInput {
    pub fn len(&self) -> usize {
        match self {
            ContextInput::Frozen(m) => m.rows(),
            ContextInput::Trainable(ids) => ids.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Where token embeddings come from.
#[derive(Debug, Clone, Copy)]
pub enum EmbeddingSource<'a> {
    Contextual(&'a EmbeddingStore),
    Fallback {
        vocab: &'a Vocabulary,
        layout: InputLayout,
        max_len: usize,
    },
}

/// Embedded sequence for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEmbedding {
    pub tokens: Vec<String>,
    pub word_alignment: Vec<Option<u32>>,
    pub context: ContextInput,
    pub truncated: usize,
}

pub fn embeddings_for(
    tokenized: &TokenizedInstance,
    source: EmbeddingSource<'_>,
) -> Result<SequenceEmbedding> {
    match source {
        EmbeddingSource::Contextual(store) => {
            let id = &tokenized.instance.id;
            let rec = store.get(id).ok_or_else(|| Error::MissingEmbeddings {
                ids: vec![id.clone()],
            })?;
            Ok(SequenceEmbedding {
                tokens: rec.tokens.clone(),
                word_alignment: rec.word_alignment.clone(),
                context: ContextInput::Frozen(rec.to_tensor()),
                truncated: 0,
            })
        }
        EmbeddingSource::Fallback {
            vocab,
            layout,
            max_len,
        } => {
            let seq = build_sequence(tokenized, layout, max_len);
            Ok(SequenceEmbedding {
                context: ContextInput::Trainable(vocab.ids(&seq.tokens)),
                tokens: seq.tokens,
                word_alignment: seq.word_alignment,
                truncated: seq.truncated,
            })
        }
    }
}

/// Id under which an exporter stores the question-only record of an instance.
pub fn question_record_id(instance_id: &str) -> String {
    format!("{instance_id}::question")
}

/// Problems found by [`validate_store`]; an empty report means the file is
/// consistent with the corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub records: usize,
    pub dim: usize,
    pub missing_ids: Vec<String>,
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.missing_ids.is_empty() && self.errors.is_empty()
    }
}

/// Cross-checks a decoded store against tokenized instances: every instance
/// has a record and every alignment index is within the instance's words.
pub fn validate_store(store: &EmbeddingStore, corpus: &[TokenizedInstance]) -> ValidationReport {
    let mut report = ValidationReport {
        records: store.len(),
        dim: store.dim(),
        ..Default::default()
    };
    for tok in corpus {
        let Some(rec) = store.get(&tok.instance.id) else {
            report.missing_ids.push(tok.instance.id.clone());
            continue;
        };
        if rec.is_empty() {
            report
                .errors
                .push(format!("record {:?} has no tokens", rec.instance_id));
        }
        if let Some(bad) = rec
            .word_alignment
            .iter()
            .flatten()
            .find(|&&w| w as usize >= tok.len())
        {
            report.errors.push(format!(
                "record {:?}: alignment index {bad} exceeds {} words",
                rec.instance_id,
                tok.len()
            ));
        }
        if rec.matrix.iter().any(|v| !v.is_finite()) {
            report
                .errors
                .push(format!("record {:?}: non-finite values", rec.instance_id));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize_instance, Instance, Split, Stance};

    fn record(id: &str, t: usize, dim: usize) -> EmbeddingRecord {
        EmbeddingRecord {
            instance_id: id.into(),
            tokens: (0..t).map(|i| format!("tok{i}")).collect(),
            word_alignment: (0..t as u32).map(Some).collect(),
            dim,
            matrix: (0..t * dim).map(|i| i as f32 * 0.5).collect(),
        }
    }

    #[test]
    fn zero_records_is_a_valid_file() {
        let bytes = encode_embeddings(8, &[]).unwrap();
        assert_eq!(bytes.len() as u64, HEADER_LEN);
        let store = EmbeddingStore::decode(&bytes).unwrap();
        assert!(store.is_empty());
        assert_eq!(store.dim(), 8);
    }

    #[test]
    fn mixed_dims_rejected() {
        let err = encode_embeddings(768, &[record("a", 2, 768), record("b", 2, 512)]).unwrap_err();
        assert!(matches!(err, Error::DimMismatch { found: 512, .. }));
    }

    #[test]
    fn bad_magic_and_trailing_bytes() {
        let mut bytes = encode_embeddings(4, &[record("a", 3, 4)]).unwrap();
        let mut flipped = bytes.clone();
        flipped[0] ^= 0xff;
        assert!(matches!(
            EmbeddingStore::decode(&flipped),
            Err(Error::NotEmbeddingFile)
        ));
        assert_eq!(Error::NotEmbeddingFile.to_string(), "not an embedding file");
        bytes.push(0);
        assert!(matches!(
            EmbeddingStore::decode(&bytes),
            Err(Error::EmbeddingFormat { .. })
        ));
    }

    #[test]
    fn decreasing_alignment_rejected() {
        let mut r = record("a", 3, 2);
        r.word_alignment = vec![Some(1), None, Some(0)];
        assert!(encode_embeddings(2, &[r]).is_err());
        assert_eq!(check_alignment(&[Some(0), None, Some(0), Some(2)]), Ok(()));
    }

    #[test]
    fn vocabulary_reserves_oov_row() {
        let seqs: Vec<Vec<&str>> = vec![vec!["a", "b", "a"], vec!["c"]];
        let v = Vocabulary::build(seqs.iter().map(|s| s.as_slice()), 1);
        assert_eq!(v.len(), 4);
        assert_eq!(v.id("a"), 1);
        assert_eq!(v.id("zzz"), 0);
        assert_eq!(v.ids(&["c", "a", "q"]), vec![3, 1, 0]);
        let v2 = Vocabulary::build(seqs.iter().map(|s| s.as_slice()), 2);
        assert_eq!(v2.len(), 2);
    }

    fn tokenized() -> TokenizedInstance {
        tokenize_instance(&Instance {
            id: "x".into(),
            topic: "t".into(),
            question: "Is it safe?".into(),
            perspective: "Yes it is. Really.".into(),
            stance: Stance::Pro,
            split: Split::Train,
        })
    }

    #[test]
    fn pair_layout_inserts_separator() {
        let tok = tokenized();
        let seq = build_sequence(&tok, InputLayout::Pair, 512);
        assert_eq!(seq.tokens[4], SEP_TOKEN);
        assert_eq!(seq.word_alignment[4], None);
        assert_eq!(seq.len(), tok.len() + 1);
        let unary = build_sequence(&tok, InputLayout::Unary, 512);
        assert_eq!(unary.len(), tok.len());
        let cut = build_sequence(&tok, InputLayout::Pair, 6);
        assert_eq!(cut.len(), 6);
        assert_eq!(cut.truncated, tok.len() + 1 - 6);
        let q = build_question_sequence(&tok, InputLayout::Pair, 512);
        assert_eq!(q.tokens, vec!["is", "it", "safe", "?", SEP_TOKEN]);
    }

    #[test]
    fn fallback_ids_share_rows() {
        let tok = tokenized();
        let words: Vec<&str> = tok.words().collect();
        let vocab = Vocabulary::build([words.as_slice()], 1);
        let emb = embeddings_for(
            &tok,
            EmbeddingSource::Fallback {
                vocab: &vocab,
                layout: InputLayout::Pair,
                max_len: 512,
            },
        )
        .unwrap();
        let ContextInput::Trainable(ids) = emb.context else {
            panic!("fallback yields trainable ids");
        };
        // "it" occurs twice and maps to one row; separator is OOV
        assert_eq!(ids[1], ids[6]);
        assert_eq!(ids[4], 0);
    }

    #[test]
    fn contextual_lookup() {
        let tok = tokenized();
        let mut rec = record("x", 140, 768);
        rec.word_alignment = vec![None; 140];
        let store = EmbeddingStore::decode(&encode_embeddings(768, &[rec]).unwrap()).unwrap();
        let emb = embeddings_for(&tok, EmbeddingSource::Contextual(&store)).unwrap();
        let ContextInput::Frozen(m) = &emb.context else {
            panic!("contextual yields frozen matrix");
        };
        assert_eq!(m.shape(), (140, 768));

        let empty = EmbeddingStore::decode(&encode_embeddings(768, &[]).unwrap()).unwrap();
        match embeddings_for(&tok, EmbeddingSource::Contextual(&empty)).unwrap_err() {
            Error::MissingEmbeddings { ids } => assert_eq!(ids, vec!["x".to_string()]),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn affect_alignment_broadcasts_to_subtokens() {
        let ann = AffectAnnotation {
            sentiment_labels: vec![Sentiment::Positive, Sentiment::Negative],
            emotion_labels: vec![Emotion::Joy, Emotion::Fear],
            sentence_scores: vec![0.5, -0.5],
        };
        let (s, e) = align_affect(&ann, &[None, Some(0), Some(1), Some(1), Some(1), None]).unwrap();
        assert_eq!(
            s,
            vec![
                Sentiment::Neutral,
                Sentiment::Positive,
                Sentiment::Negative,
                Sentiment::Negative,
                Sentiment::Negative,
                Sentiment::Neutral
            ]
        );
        assert_eq!(e[3], Emotion::Fear);
        assert!(align_affect(&ann, &[Some(2)]).is_err());
    }
}
