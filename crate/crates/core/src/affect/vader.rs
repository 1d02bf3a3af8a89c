//! Port of the VADER compound sentiment rules (valence lookup, booster
//! words, negation, capitalization and punctuation emphasis, "but" and
//! "least" handling, special-case idioms).
//!
//! The arithmetic mirrors the reference implementation operation for
//! operation so scores agree to floating point precision.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Mean valence increase for booster words.
const B_INCR: f64 = 0.293;
const B_DECR: f64 = -0.293;
/// Increase for an ALL CAPS word among mixed-case words.
const C_INCR: f64 = 0.733;
/// Negation scalar.
const N_SCALAR: f64 = -0.74;
/// Normalization constant approximating the maximum expected raw score.
pub const ALPHA: f64 = 15.0;

const NEGATE: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't",
    "can't", "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't",
    "mightn't", "mustn't", "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing",
    "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "oughtn't", "shan't",
    "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt", "won't", "wouldn't",
    "rarely", "seldom", "despite",
];

const BOOST_UP: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
    "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
    "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin",
    "frackin", "fracking", "fricking", "frickin", "frigging", "friggin", "fully", "fuckin",
    "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely", "incredible",
    "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally",
    "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly", "very",
];

const BOOST_DOWN: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less",
    "little", "marginal", "marginally", "occasional", "occasionally", "partly", "scarce",
    "scarcely", "slight", "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of",
];

const SPECIAL_CASES: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

/// Token valences plus booster increments and negation words.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
    boosters: HashMap<String, f64>,
    negations: HashSet<String>,
    special_cases: HashMap<String, f64>,
}

impl SentimentLexicon {
    /// Empty valence table with the standard booster, negation and idiom rules.
    pub fn new() -> Self {
        let boosters = BOOST_UP
            .iter()
            .map(|w| (w.to_string(), B_INCR))
            .chain(BOOST_DOWN.iter().map(|w| (w.to_string(), B_DECR)))
            .collect();
        SentimentLexicon {
            valences: HashMap::new(),
            boosters,
            negations: NEGATE.iter().map(|w| w.to_string()).collect(),
            special_cases: SPECIAL_CASES
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    /// Parses `token<TAB>mean valence[<TAB>ignored...]` rows. A repeated
    /// token keeps the last value.
    pub fn parse(text: &str) -> Result<Self> {
        let (lex, duplicates) = Self::parse_counting(text)?;
        if duplicates > 0 {
            log::warn!("sentiment lexicon: {duplicates} repeated tokens, keeping the last value of each");
        }
        Ok(lex)
    }

    fn parse_counting(text: &str) -> Result<(Self, usize)> {
        let mut lex = SentimentLexicon::new();
        let mut duplicates = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let token = fields.next().unwrap_or_default();
            let valence = fields.next().ok_or_else(|| Error::Lexicon {
                line: i + 1,
                message: "missing valence column".into(),
            })?;
            let valence: f64 = valence.trim().parse().map_err(|_| Error::Lexicon {
                line: i + 1,
                message: format!("unparsable valence {valence:?}"),
            })?;
            if !valence.is_finite() {
                return Err(Error::Lexicon {
                    line: i + 1,
                    message: format!("non-finite valence for {token:?}"),
                });
            }
            if lex.valences.insert(token.to_string(), valence).is_some() {
                log::debug!("sentiment lexicon line {}: duplicate token {token:?}", i + 1);
                duplicates += 1;
            }
        }
        if lex.valences.is_empty() {
            log::warn!("sentiment lexicon is empty");
        }
        Ok((lex, duplicates))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The VADER 3.3.2 lexicon shipped with the crate.
    pub fn bundled() -> Self {
        // the upstream file repeats a handful of emoticons
        Self::parse_counting(include_str!("../../data/vader_lexicon.txt"))
            .expect("bundled lexicon parses")
            .0
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    /// Valence of `word`, matched on its lowercase form.
    pub fn lookup(&self, word: &str) -> Option<f64> {
        self.valences.get(&word.to_lowercase()).copied()
    }

    pub fn insert(&mut self, word: &str, valence: f64) {
        self.valences.insert(word.to_string(), valence);
    }

    fn contains(&self, lower: &str) -> bool {
        self.valences.contains_key(lower)
    }

    fn booster(&self, lower: &str) -> Option<f64> {
        self.boosters.get(lower).copied()
    }

    fn is_negation(&self, lower: &str) -> bool {
        self.negations.contains(lower) || lower.contains("n't")
    }

    /// Compound score of one sentence given its whitespace-separated tokens.
    pub fn compound_score<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let text = tokens
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<_>>()
            .join(" ");
        self.compound_text(&text)
    }

    /// Compound score of raw sentence text.
    pub fn compound_text(&self, text: &str) -> f64 {
        let text = text.trim();
        let words: Vec<String> = text.split_whitespace().map(strip_punc_if_word).collect();
        let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
        let cap_diff = allcap_differential(&words);

        let mut sentiments = Vec::with_capacity(words.len());
        for (i, item) in words.iter().enumerate() {
            if self.booster(&lower[i]).is_some()
                || (i + 1 < words.len() && lower[i] == "kind" && lower[i + 1] == "of")
            {
                sentiments.push(0.0);
                continue;
            }
            sentiments.push(self.sentiment_valence(&words, &lower, cap_diff, item, i));
        }
        but_check(&lower, &mut sentiments);
        score_valence(&sentiments, text)
    }

    fn sentiment_valence(
        &self,
        words: &[String],
        lower: &[String],
        cap_diff: bool,
        item: &str,
        i: usize,
    ) -> f64 {
        let item_lower = &lower[i];
        let Some(base) = self.valences.get(item_lower.as_str()).copied() else {
            return 0.0;
        };
        let mut valence = base;
        if item_lower == "no" && i + 1 != words.len() && self.contains(&lower[i + 1]) {
            valence = 0.0;
        }
        if (i > 0 && lower[i - 1] == "no")
            || (i > 1 && lower[i - 2] == "no")
            || (i > 2 && lower[i - 3] == "no" && (lower[i - 1] == "or" || lower[i - 1] == "nor"))
        {
            valence = base * N_SCALAR;
        }
        if is_upper(item) && cap_diff {
            if valence > 0.0 {
                valence += C_INCR;
            } else {
                valence -= C_INCR;
            }
        }
        for start_i in 0..3 {
            if i > start_i && !self.contains(&lower[i - (start_i + 1)]) {
                let mut s = self.scalar_inc_dec(&words[i - (start_i + 1)], valence, cap_diff);
                if start_i == 1 && s != 0.0 {
                    s *= 0.95;
                }
                if start_i == 2 && s != 0.0 {
                    s *= 0.9;
                }
                valence += s;
                valence = self.negation_check(valence, lower, start_i, i);
                if start_i == 2 {
                    valence = self.special_idioms_check(valence, lower, i);
                }
            }
        }
        self.least_check(valence, lower, i)
    }

    fn scalar_inc_dec(&self, word: &str, valence: f64, cap_diff: bool) -> f64 {
        let Some(mut scalar) = self.booster(&word.to_lowercase()) else {
            return 0.0;
        };
        if valence < 0.0 {
            scalar *= -1.0;
        }
        if is_upper(word) && cap_diff {
            if valence > 0.0 {
                scalar += C_INCR;
            } else {
                scalar -= C_INCR;
            }
        }
        scalar
    }

    fn negation_check(&self, valence: f64, lower: &[String], start_i: usize, i: usize) -> f64 {
        let w = |k: usize| lower[i - k].as_str();
        match start_i {
            0 => {
                if self.is_negation(w(1)) {
                    return valence * N_SCALAR;
                }
            }
            1 => {
                if w(2) == "never" && (w(1) == "so" || w(1) == "this") {
                    return valence * 1.25;
                } else if w(2) == "without" && w(1) == "doubt" {
                    return valence;
                } else if self.is_negation(w(2)) {
                    return valence * N_SCALAR;
                }
            }
            _ => {
                // operator precedence follows the reference: (a and b) or c
                if (w(3) == "never" && (w(2) == "so" || w(2) == "this"))
                    || (w(1) == "so" || w(1) == "this")
                {
                    return valence * 1.25;
                } else if w(3) == "without" && (w(2) == "doubt" || w(1) == "doubt") {
                    return valence;
                } else if self.is_negation(w(3)) {
                    return valence * N_SCALAR;
                }
            }
        }
        valence
    }

    fn special_idioms_check(&self, mut valence: f64, lower: &[String], i: usize) -> f64 {
        let w = |k: usize| lower[k].as_str();
        let onezero = format!("{} {}", w(i - 1), w(i));
        let twoonezero = format!("{} {} {}", w(i - 2), w(i - 1), w(i));
        let twoone = format!("{} {}", w(i - 2), w(i - 1));
        let threetwoone = format!("{} {} {}", w(i - 3), w(i - 2), w(i - 1));
        let threetwo = format!("{} {}", w(i - 3), w(i - 2));

        for seq in [&onezero, &twoonezero, &twoone, &threetwoone, &threetwo] {
            if let Some(&v) = self.special_cases.get(seq.as_str()) {
                valence = v;
                break;
            }
        }
        if lower.len() - 1 > i {
            let zeroone = format!("{} {}", w(i), w(i + 1));
            if let Some(&v) = self.special_cases.get(zeroone.as_str()) {
                valence = v;
            }
        }
        if lower.len() - 1 > i + 1 {
            let zeroonetwo = format!("{} {} {}", w(i), w(i + 1), w(i + 2));
            if let Some(&v) = self.special_cases.get(zeroonetwo.as_str()) {
                valence = v;
            }
        }
        for n_gram in [&threetwoone, &threetwo, &twoone] {
            if let Some(b) = self.booster(n_gram) {
                valence += b;
            }
        }
        valence
    }

    fn least_check(&self, valence: f64, lower: &[String], i: usize) -> f64 {
        if i > 1 && !self.contains(&lower[i - 1]) && lower[i - 1] == "least" {
            if lower[i - 2] != "at" && lower[i - 2] != "very" {
                return valence * N_SCALAR;
            }
        } else if i > 0 && !self.contains(&lower[i - 1]) && lower[i - 1] == "least" {
            return valence * N_SCALAR;
        }
        valence
    }
}

/// Python's `str.isupper`: at least one cased character and no lowercase ones.
fn is_upper(s: &str) -> bool {
    let mut cased = false;
    for c in s.chars() {
        if c.is_lowercase() {
            return false;
        }
        if c.is_uppercase() {
            cased = true;
        }
    }
    cased
}

fn allcap_differential(words: &[String]) -> bool {
    let allcap = words.iter().filter(|w| is_upper(w)).count();
    let diff = words.len() - allcap;
    0 < diff && diff < words.len()
}

/// Strips leading/trailing ASCII punctuation unless that leaves two or fewer
/// characters (likely an emoticon).
fn strip_punc_if_word(token: &str) -> String {
    let stripped = token.trim_matches(|c: char| c.is_ascii_punctuation());
    if stripped.chars().count() <= 2 {
        token.to_string()
    } else {
        stripped.to_string()
    }
}

/// Contrastive "but": halve sentiments before it, boost those after.
///
/// Replicates the reference's list mutation, which locates each value by its
/// first equal occurrence.
fn but_check(lower: &[String], sentiments: &mut [f64]) {
    let Some(bi) = lower.iter().position(|w| w == "but") else {
        return;
    };
    for k in 0..sentiments.len() {
        let s = sentiments[k];
        let si = sentiments
            .iter()
            .position(|&x| x == s)
            .expect("value is present");
        if si < bi {
            sentiments[si] = s * 0.5;
        } else if si > bi {
            sentiments[si] = s * 1.5;
        }
    }
}

fn punctuation_emphasis(text: &str) -> f64 {
    let ep = text.matches('!').count().min(4) as f64 * 0.292;
    let qm_count = text.matches('?').count();
    let qm = if qm_count > 1 {
        if qm_count <= 3 {
            qm_count as f64 * 0.18
        } else {
            0.96
        }
    } else {
        0.0
    };
    ep + qm
}

/// `score / sqrt(score^2 + alpha)`, clamped to [-1, 1].
pub fn normalize(score: f64, alpha: f64) -> f64 {
    let norm = score / (score * score + alpha).sqrt();
    norm.clamp(-1.0, 1.0)
}

fn score_valence(sentiments: &[f64], text: &str) -> f64 {
    if sentiments.is_empty() {
        return 0.0;
    }
    let mut sum = sentiments.iter().fold(0.0, |acc, s| acc + s);
    let amp = punctuation_emphasis(text);
    if sum > 0.0 {
        sum += amp;
    } else if sum < 0.0 {
        sum -= amp;
    }
    normalize(sum, ALPHA)
}
