//! Question/perspective corpus: loading, tokenization, sentence segmentation,
//! split statistics and synthetic fixtures.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Pro,
    Con,
}

impl Stance {
    /// Class index used by the classifier head.
    pub fn index(self) -> usize {
        match self {
            Stance::Pro => 0,
            Stance::Con => 1,
        }
    }

    pub fn from_index(i: usize) -> Stance {
        if i == 0 {
            Stance::Pro
        } else {
            Stance::Con
        }
    }

    pub fn other(self) -> Stance {
        match self {
            Stance::Pro => Stance::Con,
            Stance::Con => Stance::Pro,
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stance::Pro => "pro",
            Stance::Con => "con",
        })
    }
}

impl FromStr for Stance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pro" => Ok(Stance::Pro),
            "con" => Ok(Stance::Con),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(s.to_string()),
        }
    }
}

/// One question/perspective pair with its gold stance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub topic: String,
    pub question: String,
    pub perspective: String,
    pub stance: Stance,
    pub split: Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON object per line.
    Jsonl,
    /// Delimiter-separated values with a header row naming the columns.
    Delimited(u8),
}

/// Raw record as found on disk; stance and split are normalized afterwards.
#[derive(Debug, Deserialize)]
struct RawRecord {
    id: String,
    topic: String,
    question: String,
    perspective: String,
    stance: String,
    split: String,
}

impl RawRecord {
    fn into_instance(self, line: usize) -> Result<Instance> {
        let stance = self.stance.parse::<Stance>().map_err(|value| Error::UnknownStance {
            id: self.id.clone(),
            value,
        })?;
        let split = self.split.parse::<Split>().map_err(|value| Error::Corpus {
            line,
            message: format!("record {:?}: unknown split {:?}", self.id, value),
        })?;
        if self.id.is_empty() {
            return Err(Error::Corpus {
                line,
                message: "empty id".into(),
            });
        }
        if self.question.trim().is_empty() || self.perspective.trim().is_empty() {
            return Err(Error::Corpus {
                line,
                message: format!("record {:?}: question and perspective must be non-empty", self.id),
            });
        }
        Ok(Instance {
            id: self.id,
            topic: self.topic,
            question: self.question,
            perspective: self.perspective,
            stance,
            split,
        })
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file)),
        CorpusFormat::Delimited(delimiter) => read_delimited(file, delimiter),
    }
}

/// Parses a JSON-lines corpus. Blank lines are skipped.
pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<Instance>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Corpus {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Corpus {
            line: line_no,
            message: format!("malformed record: {e}"),
        })?;
        let inst = raw.into_instance(line_no)?;
        if !seen.insert(inst.id.clone()) {
            return Err(Error::DuplicateId {
                id: inst.id,
                line: line_no,
            });
        }
        out.push(inst);
    }
    Ok(out)
}

fn read_delimited(reader: impl std::io::Read, delimiter: u8) -> Result<Vec<Instance>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .from_reader(reader);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<RawRecord>().enumerate() {
        // header is line 1
        let line_no = i + 2;
        let raw = rec.map_err(|e| Error::Corpus {
            line: line_no,
            message: format!("malformed record: {e}"),
        })?;
        let inst = raw.into_instance(line_no)?;
        if !seen.insert(inst.id.clone()) {
            return Err(Error::DuplicateId {
                id: inst.id,
                line: line_no,
            });
        }
        out.push(inst);
    }
    Ok(out)
}

pub fn write_jsonl(mut writer: impl Write, corpus: &[Instance]) -> std::io::Result<()> {
    for inst in corpus {
        serde_json::to_writer(&mut writer, inst)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn save_corpus(path: impl AsRef<Path>, corpus: &[Instance]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_jsonl(BufWriter::new(file), corpus).map_err(|e| Error::io(path, e))
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '-' | '\u{2019}')
}

/// Lowercasing word/punctuation tokenizer.
///
/// Words are maximal alphanumeric runs; an apostrophe or hyphen between two
/// alphanumerics stays inside the word ("aren't", "e-cigarettes"). Every
/// other non-space character becomes its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut word = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
            continue;
        }
        let joins = is_joiner(c)
            && !word.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if joins {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            tokens.push(c.to_lowercase().collect());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

/// Words that end with a period without ending the sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "a.m", "approx", "assn", "ave", "capt", "cf", "co", "col", "corp", "dept", "dr", "e.g", "est",
    "etc", "fig", "gen", "gov", "i.e", "inc", "jr", "lt", "ltd", "mr", "mrs", "ms", "mt", "p.m",
    "ph.d", "prof", "rep", "rev", "sen", "sgt", "sr", "st", "u.k", "u.n", "u.s", "vol", "vs",
];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_abbreviation(text: &str, dot: usize) -> bool {
    let start = text[..dot]
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let word = text[start..dot]
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    !word.is_empty() && ABBREVIATIONS.contains(&word.as_str())
}

/// Rule-based sentence segmentation.
///
/// Returns byte ranges that tile `text` exactly; whitespace following a
/// sentence belongs to that sentence. A run of `.`, `!`, `?` (plus closing
/// quotes or brackets) followed by whitespace or end of text ends a sentence,
/// unless it is a single period after a word in [`ABBREVIATIONS`].
pub fn split_sentences(text: &str) -> Vec<Range<usize>> {
    if text.is_empty() {
        return Vec::new();
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        let run_len = j - i;
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
        if !at_boundary || (run_len == 1 && c == '.' && is_abbreviation(text, pos)) {
            i = j.max(i + 1);
            continue;
        }
        while j < chars.len() && chars[j].1.is_whitespace() {
            j += 1;
        }
        let end = chars.get(j).map(|&(p, _)| p).unwrap_or(text.len());
        spans.push(start..end);
        start = end;
        i = j;
    }
    if start < text.len() {
        spans.push(start..text.len());
    }
    spans
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Question,
    Perspective,
}

/// A sentence with its token range in the combined question+perspective
/// token sequence and its original (trimmed) text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub segment: Segment,
    pub tokens: Range<usize>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedInstance {
    pub instance: Instance,
    pub question_tokens: Vec<String>,
    pub perspective_tokens: Vec<String>,
    /// Sentences in order, question first. Their token ranges tile
    /// `0..question_tokens.len() + perspective_tokens.len()`.
    pub sentences: Vec<Sentence>,
}

impl TokenizedInstance {
    pub fn len(&self) -> usize {
        self.question_tokens.len() + self.perspective_tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Question tokens followed by perspective tokens.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.question_tokens
            .iter()
            .chain(&self.perspective_tokens)
            .map(String::as_str)
    }
}

pub fn tokenize_instance(instance: &Instance) -> TokenizedInstance {
    let mut sentences = Vec::new();
    let mut offset = 0;
    let mut segment_tokens = |text: &str, segment: Segment, sentences: &mut Vec<Sentence>| {
        let mut tokens = Vec::new();
        for span in split_sentences(text) {
            let piece = &text[span];
            let toks = tokenize(piece);
            if toks.is_empty() {
                continue;
            }
            sentences.push(Sentence {
                segment,
                tokens: offset..offset + toks.len(),
                text: piece.trim().to_string(),
            });
            offset += toks.len();
            tokens.extend(toks);
        }
        tokens
    };
    let question_tokens = segment_tokens(&instance.question, Segment::Question, &mut sentences);
    let perspective_tokens =
        segment_tokens(&instance.perspective, Segment::Perspective, &mut sentences);
    TokenizedInstance {
        instance: instance.clone(),
        question_tokens,
        perspective_tokens,
        sentences,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStats {
    pub split: Split,
    pub n_topics: usize,
    pub avg_words: usize,
    pub n_pro: usize,
    pub n_con: usize,
    pub total: usize,
}

/// Per-split counts. Average words is the whitespace word count of the
/// perspective, rounded to the nearest integer. Splits with no instances are
/// omitted.
pub fn corpus_stats(corpus: &[Instance]) -> Vec<SplitStats> {
    Split::ALL
        .iter()
        .filter_map(|&split| {
            let members: Vec<&Instance> = corpus.iter().filter(|i| i.split == split).collect();
            if members.is_empty() {
                return None;
            }
            let topics: BTreeSet<&str> = members.iter().map(|i| i.topic.as_str()).collect();
            let words: usize = members
                .iter()
                .map(|i| i.perspective.split_whitespace().count())
                .sum();
            let n_pro = members.iter().filter(|i| i.stance == Stance::Pro).count();
            let total = members.len();
            Some(SplitStats {
                split,
                n_topics: topics.len(),
                avg_words: (words as f64 / total as f64).round() as usize,
                n_pro,
                n_con: total - n_pro,
                total,
            })
        })
        .collect()
}

/// Issues used by the synthetic fixtures.
pub const FIXTURE_TOPICS: &[(&str, &str)] = &[
    ("vaping", "Is vaping with e-cigarettes safe?"),
    ("uniforms", "Should students have to wear school uniforms?"),
    ("milk", "Is drinking milk healthy for humans?"),
    ("voting-machines", "Do electronic voting machines improve the voting process?"),
    ("marijuana", "Should recreational marijuana be legal?"),
];

/// Sentiment-neutral filler vocabulary.
pub const FIXTURE_FILLER: &[&str] = &[
    "the", "city", "report", "data", "shows", "that", "people", "many", "schools", "year",
    "local", "program", "policy", "study", "researchers", "students", "members", "council",
    "market", "state", "this", "plan", "which", "number", "of", "in", "for", "from", "on",
    "their", "several", "families", "workers", "board", "survey", "cost", "rules", "was", "is",
    "are", "has", "have", "been", "during", "after", "each", "week", "month", "area", "county",
    "industry", "analysis", "figures", "officials", "regional",
];

/// Planted words with positive valence.
pub const FIXTURE_POSITIVE: &[&str] = &[
    "good", "great", "excellent", "beneficial", "helpful", "wonderful", "effective", "healthy",
    "valuable", "successful", "fair", "useful", "safe", "best", "better", "happy", "strong",
    "benefit", "improve", "hope", "nice", "perfect", "brilliant", "positive",
];

/// Planted words with negative valence.
pub const FIXTURE_NEGATIVE: &[&str] = &[
    "bad", "terrible", "harmful", "dangerous", "awful", "horrible", "useless", "worst", "worse",
    "unfair", "toxic", "failure", "hurt", "damage", "poor", "sad", "hate", "weak", "problem",
    "crisis", "pain", "threat", "disaster", "fail",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureConfig {
    pub seed: u64,
    pub n_instances: usize,
    /// Probability that the planted sentiment words agree with the stance.
    pub affect_signal_strength: f64,
    /// Draw planted words for dev/test from a pool disjoint from the one
    /// used for train, so that only the affect labels carry over.
    pub disjoint_eval_vocabulary: bool,
}

/// Synthetic corpus whose stance is carried by planted sentiment words.
pub fn make_fixture(seed: u64, n_instances: usize, affect_signal_strength: f64) -> Vec<Instance> {
    make_fixture_with(FixtureConfig {
        seed,
        n_instances,
        affect_signal_strength,
        disjoint_eval_vocabulary: false,
    })
}

pub fn make_fixture_with(cfg: FixtureConfig) -> Vec<Instance> {
    assert!(cfg.n_instances >= 2, "fixture needs at least two instances");
    let strength = cfg.affect_signal_strength.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = FIXTURE_POSITIVE.len() / 2;
    (0..cfg.n_instances)
        .map(|i| {
            let stance = if i % 2 == 0 { Stance::Pro } else { Stance::Con };
            let split = match (i / 2) % 10 {
                0..=6 => Split::Train,
                7 | 8 => Split::Dev,
                _ => Split::Test,
            };
            let (topic, question) = *FIXTURE_TOPICS.choose(&mut rng).expect("topics");
            let positive = if rng.random_bool(strength) {
                stance == Stance::Pro
            } else {
                rng.random_bool(0.5)
            };
            let pool = if positive { FIXTURE_POSITIVE } else { FIXTURE_NEGATIVE };
            let pool = match (cfg.disjoint_eval_vocabulary, split) {
                (false, _) => pool,
                (true, Split::Train) => &pool[..half],
                (true, _) => &pool[half..],
            };

            let n_sentences = rng.random_range(3..=4);
            let planted_at = rng.random_range(0..n_sentences);
            let mut sentences = Vec::with_capacity(n_sentences);
            for s in 0..n_sentences {
                let len = rng.random_range(5..=8);
                let mut words: Vec<&str> = (0..len)
                    .map(|_| *FIXTURE_FILLER.choose(&mut rng).expect("filler"))
                    .collect();
                if s == planted_at {
                    let n_planted = rng.random_range(1..=2);
                    for _ in 0..n_planted {
                        let at = rng.random_range(1..=words.len());
                        words.insert(at, pool.choose(&mut rng).expect("pool"));
                    }
                }
                let mut sentence = words.join(" ");
                if let Some(first) = sentence.get_mut(0..1) {
                    first.make_ascii_uppercase();
                }
                sentence.push('.');
                sentences.push(sentence);
            }
            Instance {
                id: format!("fx{}-{:05}", cfg.seed, i),
                topic: topic.to_string(),
                question: question.to_string(),
                perspective: sentences.join(" "),
                stance,
                split,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spans_text<'a>(text: &'a str, spans: &[Range<usize>]) -> Vec<&'a str> {
        spans.iter().map(|r| text[r.clone()].trim()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Is vaping safe?"), vec!["is", "vaping", "safe", "?"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("e-cigarettes aren't"), vec!["e-cigarettes", "aren't"]);
        assert_eq!(tokenize("-- 'quoted' end-"), vec!["-", "-", "'", "quoted", "'", "end", "-"]);
    }

    #[test]
    fn sentence_examples() {
        let t = "A. B? C!";
        assert_eq!(spans_text(t, &split_sentences(t)), vec!["A.", "B?", "C!"]);
        let t = "no terminator here";
        assert_eq!(split_sentences(t), vec![0..t.len()]);
        let t = "Dr. Smith agrees. So do we.";
        assert_eq!(spans_text(t, &split_sentences(t)), vec!["Dr. Smith agrees.", "So do we."]);
        assert!(split_sentences("").is_empty());
    }

    #[test]
    fn sentences_handle_decimals_quotes_and_runs() {
        let t = "It rose 3.5 percent. \"Really?!\" she asked... Yes.";
        assert_eq!(
            spans_text(t, &split_sentences(t)),
            vec!["It rose 3.5 percent.", "\"Really?!\"", "she asked...", "Yes."]
        );
    }

    #[test]
    fn stance_parsing_is_case_insensitive() {
        assert_eq!("PRO".parse::<Stance>(), Ok(Stance::Pro));
        assert_eq!(" Con ".parse::<Stance>(), Ok(Stance::Con));
        assert!("maybe".parse::<Stance>().is_err());
    }

    #[test]
    fn unknown_stance_names_the_record() {
        let line = r#"{"id":"x7","topic":"t","question":"q?","perspective":"p.","stance":"maybe","split":"train"}"#;
        let err = read_jsonl(line.as_bytes()).unwrap_err();
        match err {
            Error::UnknownStance { id, value } => {
                assert_eq!(id, "x7");
                assert_eq!(value, "maybe");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_duplicate_records_are_rejected() {
        let good = r#"{"id":"a","topic":"t","question":"q?","perspective":"p.","stance":"Pro","split":"dev"}"#;
        let text = format!("{good}\n{{\"id\": \"b\"}}\n");
        match read_jsonl(text.as_bytes()).unwrap_err() {
            Error::Corpus { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{good}\n\n{good}\n");
        match read_jsonl(text.as_bytes()).unwrap_err() {
            Error::DuplicateId { id, line } => {
                assert_eq!(id, "a");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        let parsed = read_jsonl(good.as_bytes()).unwrap();
        assert_eq!(parsed[0].stance, Stance::Pro);
        assert!(read_jsonl("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn delimited_ingest() {
        let tsv = "id\ttopic\tquestion\tperspective\tstance\tsplit\n\
                   1\tmilk\tIs milk healthy?\tIt has calcium.\tPRO\ttrain\n";
        let parsed = read_delimited(tsv.as_bytes(), b'\t').unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].stance, Stance::Pro);
        assert_eq!(parsed[0].perspective, "It has calcium.");
    }

    #[test]
    fn tokenized_instance_sentences_tile_tokens() {
        let inst = Instance {
            id: "1".into(),
            topic: "t".into(),
            question: "Is it safe?".into(),
            perspective: "Yes. Dr. Who says so! It is fine".into(),
            stance: Stance::Pro,
            split: Split::Train,
        };
        let tok = tokenize_instance(&inst);
        let mut next = 0;
        for s in &tok.sentences {
            assert_eq!(s.tokens.start, next);
            next = s.tokens.end;
        }
        assert_eq!(next, tok.len());
        assert_eq!(tok.sentences.len(), 4);
        assert_eq!(tok.sentences[0].segment, Segment::Question);
        assert_eq!(tok.sentences[2].text, "Dr. Who says so!");
    }

    #[test]
    fn stats_single_instance() {
        let inst = Instance {
            id: "1".into(),
            topic: "t".into(),
            question: "Q?".into(),
            perspective: "one two  three".into(),
            stance: Stance::Con,
            split: Split::Test,
        };
        let stats = corpus_stats(&[inst]);
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].total, 1);
        assert_eq!(stats[0].avg_words, 3);
        assert_eq!(stats[0].n_con, 1);
    }

    #[test]
    fn fixture_is_deterministic_and_balanced() {
        let a = make_fixture(7, 100, 1.0);
        let b = make_fixture(7, 100, 1.0);
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        write_jsonl(&mut ba, &a).unwrap();
        write_jsonl(&mut bb, &b).unwrap();
        assert_eq!(ba, bb);
        for n in [2, 3, 17, 100] {
            let c = make_fixture(1, n, 0.5);
            let pro = c.iter().filter(|i| i.stance == Stance::Pro).count() as i64;
            assert!((2 * pro - n as i64).abs() <= 1);
        }
        assert_ne!(make_fixture(8, 10, 1.0), make_fixture(7, 10, 1.0));
    }
}
