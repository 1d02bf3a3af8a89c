use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight basic emotions plus the added neutral class. The declaration
/// order is the tie-break priority for words carrying several emotions.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger = 0,
    Anticipation = 1,
    Disgust = 2,
    Fear = 3,
    Joy = 4,
    Sadness = 5,
    Surprise = 6,
    Trust = 7,
    Neutral = 8,
}

impl Emotion {
    pub const COUNT: usize = 9;

    pub const BASIC: [Emotion; 8] = [
        Emotion::Anger,
        Emotion::Anticipation,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Trust,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Anticipation => "anticipation",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
            Emotion::Trust => "trust",
            Emotion::Neutral => "neutral",
        }
    }

    fn from_category(s: &str) -> Option<Emotion> {
        Emotion::BASIC.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Word to emotion-set associations.
#[derive(Debug, Clone, Default)]
pub struct EmotionLexicon {
    entries: HashMap<String, BTreeSet<Emotion>>,
}

impl EmotionLexicon {
    /// Parses `word<TAB>category<TAB>flag` rows. Only flagged rows of the
    /// eight emotion categories are kept; polarity rows are ignored and
    /// unknown categories skipped with a warning.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: HashMap<String, BTreeSet<Emotion>> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [word, category, flag] = fields[..] else {
                return Err(Error::Lexicon {
                    line: i + 1,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            };
            let flag = match flag.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Lexicon {
                        line: i + 1,
                        message: format!("flag must be 0 or 1, found {other:?}"),
                    })
                }
            };
            let category = category.trim().to_lowercase();
            let emotion = match Emotion::from_category(&category) {
                Some(e) => e,
                None if category == "positive" || category == "negative" => continue,
                None => {
                    log::warn!("emotion lexicon line {}: unknown category {category:?}", i + 1);
                    continue;
                }
            };
            if flag {
                entries
                    .entry(word.trim().to_lowercase())
                    .or_default()
                    .insert(emotion);
            }
        }
        Ok(EmotionLexicon { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Small hand-authored sample in the same layout, shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(include_str!("../../data/emotion_lexicon_sample.txt"))
            .expect("bundled emotion lexicon parses")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, word: &str) -> Option<&BTreeSet<Emotion>> {
        self.entries.get(&word.to_lowercase())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<Emotion>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Single label for a word: highest-priority emotion, or neutral.
    pub fn label(&self, word: &str) -> Emotion {
        self.lookup(word)
            .and_then(|set| set.iter().next().copied())
            .unwrap_or(Emotion::Neutral)
    }
}

/// Per-token emotion labels.
pub fn annotate_emotion<S: AsRef<str>>(tokens: &[S], lexicon: &EmotionLexicon) -> Vec<Emotion> {
    tokens.iter().map(|t| lexicon.label(t.as_ref())).collect()
}
