//! Sentence-level sentiment and token-level emotion labels.
//!
//! Sentiment is scored once per sentence and every token of the sentence
//! takes that sentence's three-way label. Emotion is a per-word lookup with
//! an extra neutral class for words outside the lexicon.

mod emotion;
mod vader;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use emotion::{annotate_emotion, Emotion, EmotionLexicon};
pub use vader::{normalize, SentimentLexicon, ALPHA};

use crate::corpus::TokenizedInstance;

/// Compound scores at or below this are negative.
pub const NEGATIVE_THRESHOLD: f64 = -0.05;
/// Compound scores at or above this are positive.
pub const POSITIVE_THRESHOLD: f64 = 0.05;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative = 0,
    Neutral = 1,
    Positive = 2,
}

impl Sentiment {
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
            Sentiment::Positive => "positive",
        })
    }
}

/// Three-way label with inclusive ±0.05 boundaries.
pub fn label_from_score(score: f64) -> Sentiment {
    if score <= NEGATIVE_THRESHOLD {
        Sentiment::Negative
    } else if score >= POSITIVE_THRESHOLD {
        Sentiment::Positive
    } else {
        Sentiment::Neutral
    }
}

/// Compound score of one sentence's whitespace tokens.
pub fn compound_score<S: AsRef<str>>(sentence_tokens: &[S], lexicon: &SentimentLexicon) -> f64 {
    lexicon.compound_score(sentence_tokens)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentAnnotation {
    pub sentence_scores: Vec<f64>,
    pub labels: Vec<Sentiment>,
}

/// Scores every sentence once and broadcasts its label over its tokens.
pub fn annotate_sentiment(
    tokenized: &TokenizedInstance,
    lexicon: &SentimentLexicon,
) -> SentimentAnnotation {
    let mut labels = vec![Sentiment::Neutral; tokenized.len()];
    let sentence_scores = tokenized
        .sentences
        .iter()
        .map(|s| {
            let score = lexicon.compound_text(&s.text);
            let label = label_from_score(score);
            labels[s.tokens.clone()].fill(label);
            score
        })
        .collect();
    SentimentAnnotation {
        sentence_scores,
        labels,
    }
}

/// Affect labels aligned 1:1 with the words of a tokenized instance
/// (question words first, then perspective words).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffectAnnotation {
    pub sentiment_labels: Vec<Sentiment>,
    pub emotion_labels: Vec<Emotion>,
    pub sentence_scores: Vec<f64>,
}

impl AffectAnnotation {
    pub fn len(&self) -> usize {
        self.sentiment_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentiment_labels.is_empty()
    }
}

pub fn annotate(
    tokenized: &TokenizedInstance,
    sentiment: &SentimentLexicon,
    emotion: &EmotionLexicon,
) -> AffectAnnotation {
    let s = annotate_sentiment(tokenized, sentiment);
    let words: Vec<&str> = tokenized.words().collect();
    AffectAnnotation {
        sentiment_labels: s.labels,
        emotion_labels: annotate_emotion(&words, emotion),
        sentence_scores: s.sentence_scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize_instance, Instance, Split, Stance};

    #[test]
    fn thresholds_are_inclusive() {
        assert_eq!(label_from_score(-0.05), Sentiment::Negative);
        assert_eq!(label_from_score(0.0), Sentiment::Neutral);
        assert_eq!(label_from_score(0.05), Sentiment::Positive);
        assert_eq!(label_from_score(-0.0499999), Sentiment::Neutral);
        assert_eq!(label_from_score(0.0499999), Sentiment::Neutral);
        assert_eq!(label_from_score(-1.0), Sentiment::Negative);
        assert_eq!(label_from_score(1.0), Sentiment::Positive);
    }

    fn instance(q: &str, p: &str) -> Instance {
        Instance {
            id: "i".into(),
            topic: "t".into(),
            question: q.into(),
            perspective: p.into(),
            stance: Stance::Pro,
            split: Split::Train,
        }
    }

    #[test]
    fn sentence_labels_broadcast() {
        let mut lex = SentimentLexicon::new();
        lex.insert("grim", -3.0);
        lex.insert("fine", 1.0);
        let tok = tokenize_instance(&instance("Well?", "It is grim here. It is fine now."));
        let ann = annotate_sentiment(&tok, &lex);
        assert_eq!(ann.sentence_scores.len(), 3);
        assert!(ann.sentence_scores[1] < -0.05 && ann.sentence_scores[2] > 0.05);
        for s in &tok.sentences {
            let first = ann.labels[s.tokens.start];
            assert!(ann.labels[s.tokens.clone()].iter().all(|&l| l == first));
        }
        assert_eq!(ann.labels[2], Sentiment::Negative);
        assert_eq!(*ann.labels.last().unwrap(), Sentiment::Positive);
    }

    #[test]
    fn no_hits_means_all_neutral() {
        let lex = SentimentLexicon::bundled();
        let tok = tokenize_instance(&instance("Is the city report in?", "The council has data."));
        let ann = annotate(&tok, &lex, &EmotionLexicon::bundled());
        assert!(ann.sentiment_labels.iter().all(|&l| l == Sentiment::Neutral));
        assert!(ann.emotion_labels.iter().all(|&e| e == Emotion::Neutral));
        assert_eq!(ann.len(), tok.len());
    }
}
