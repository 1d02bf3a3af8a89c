//! Max-pooling engagement: how many pooled max columns each token wins.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Segment, Stance};
use crate::error::{Error, Result};
use crate::network::ForwardCache;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Engagement {
    pub tokens: Vec<String>,
    pub scores: Vec<usize>,
    /// Word index per token, `None` for separators and other special tokens.
    pub word_alignment: Vec<Option<u32>>,
    /// Segment per token, `None` for special tokens.
    pub segments: Vec<Option<Segment>>,
}

impl Engagement {
    pub fn total(&self) -> usize {
        self.scores.iter().sum()
    }

    pub fn max_score(&self) -> usize {
        self.scores.iter().copied().max().unwrap_or(0)
    }
}

/// Per-row count of columns whose argmax is that row.
pub fn engagement_counts(argmax: &[usize], rows: usize) -> Vec<usize> {
    let mut scores = vec![0; rows];
    for &t in argmax {
        scores[t] += 1;
    }
    scores
}

/// Engagement of every token of a forward pass. Words with index below
/// `question_words` belong to the question.
pub fn engagement_scores(
    cache: &ForwardCache,
    tokens: &[String],
    word_alignment: &[Option<u32>],
    question_words: usize,
) -> Result<Engagement> {
    if tokens.len() != cache.len() || word_alignment.len() != cache.len() {
        return Err(Error::Shape(format!(
            "{} tokens and {} alignments for a sequence of {}",
            tokens.len(),
            word_alignment.len(),
            cache.len()
        )));
    }
    let segments = word_alignment
        .iter()
        .map(|a| {
            a.map(|w| {
                if (w as usize) < question_words {
                    Segment::Question
                } else {
                    Segment::Perspective
                }
            })
        })
        .collect();
    Ok(Engagement {
        tokens: tokens.to_vec(),
        scores: engagement_counts(&cache.argmax, cache.len()),
        word_alignment: word_alignment.to_vec(),
        segments,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedToken {
    pub text: String,
    pub score: usize,
    /// Position of the (first) token in the sequence.
    pub position: usize,
}

/// Continuation marker of WordPiece sub-tokens.
const SUBWORD_PREFIX: &str = "##";

fn strip_subword(t: &str) -> &str {
    t.strip_prefix(SUBWORD_PREFIX).unwrap_or(t)
}

/// Highest-scoring entries, ties broken by earliest position. With `merge`,
/// sub-tokens aligned to the same word are summed into one entry whose text
/// joins the pieces.
pub fn top_tokens(engagement: &Engagement, k: usize, merge: bool) -> Vec<RankedToken> {
    let mut entries: Vec<RankedToken> = Vec::new();
    let mut last_word: Option<u32> = None;
    for (t, tok) in engagement.tokens.iter().enumerate() {
        let word = engagement.word_alignment[t];
        let score = engagement.scores[t];
        match (merge, word) {
            (true, Some(w)) if last_word == Some(w) => {
                let e = entries.last_mut().expect("previous entry exists");
                e.text.push_str(strip_subword(tok));
                e.score += score;
            }
            _ => entries.push(RankedToken {
                text: if merge { strip_subword(tok) } else { tok.as_str() }.to_string(),
                score,
                position: t,
            }),
        }
        last_word = word;
    }
    entries.sort_by(|a, b| b.score.cmp(&a.score).then(a.position.cmp(&b.position)));
    entries.truncate(k);
    entries
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapFormat {
    Json,
    Html,
    Ansi,
}

impl FromStr for HeatmapFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(HeatmapFormat::Json),
            "html" => Ok(HeatmapFormat::Html),
            "ansi" => Ok(HeatmapFormat::Ansi),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// Context shown alongside a heatmap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapMeta {
    pub id: String,
    pub question: String,
    pub predicted: Option<Stance>,
    pub gold: Option<Stance>,
}

#[derive(Serialize, Deserialize)]
struct HeatmapJson {
    id: String,
    question: String,
    predicted: Option<Stance>,
    gold: Option<Stance>,
    tokens: Vec<String>,
    scores: Vec<usize>,
    segments: Vec<Option<Segment>>,
}

/// Linear intensity `score / max score`, all zero when nothing scores.
pub fn intensities(engagement: &Engagement) -> Vec<f64> {
    let max = engagement.max_score();
    engagement
        .scores
        .iter()
        .map(|&s| if max == 0 { 0.0 } else { s as f64 / max as f64 })
        .collect()
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn segment_class(s: Option<Segment>) -> &'static str {
    match s {
        Some(Segment::Question) => "q",
        Some(Segment::Perspective) => "p",
        None => "s",
    }
}

fn stance_label(s: Option<Stance>) -> String {
    s.map_or_else(|| "-".to_string(), |s| s.to_string())
}

const ANSI_RAMP: [u8; 5] = [224, 217, 210, 203, 196];

pub fn render_heatmap(
    engagement: &Engagement,
    meta: &HeatmapMeta,
    format: HeatmapFormat,
) -> Result<String> {
    let levels = intensities(engagement);
    match format {
        HeatmapFormat::Json => {
            let doc = HeatmapJson {
                id: meta.id.clone(),
                question: meta.question.clone(),
                predicted: meta.predicted,
                gold: meta.gold,
                tokens: engagement.tokens.clone(),
                scores: engagement.scores.clone(),
                segments: engagement.segments.clone(),
            };
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        HeatmapFormat::Html => {
            let mut out = String::new();
            out.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n");
            let _ = writeln!(out, "<title>{}</title>", escape_html(&meta.id));
            out.push_str(
                "<style>\nbody { font-family: sans-serif; line-height: 2; }\n\
                 .tok { padding: 2px 3px; border-radius: 3px; }\n\
                 .q { font-style: italic; }\n\
                 .s { color: #888; }\n</style>\n</head>\n<body>\n",
            );
            let _ = writeln!(
                out,
                "<p class=\"meta\">id: {} | predicted: {} | gold: {}</p>",
                escape_html(&meta.id),
                stance_label(meta.predicted),
                stance_label(meta.gold)
            );
            let _ = writeln!(out, "<p class=\"question\">{}</p>", escape_html(&meta.question));
            out.push_str("<p class=\"heatmap\">\n");
            for (t, tok) in engagement.tokens.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "<span class=\"tok {}\" title=\"{}\" style=\"background-color: rgba(220, 40, 40, {:.3})\">{}</span>",
                    segment_class(engagement.segments[t]),
                    engagement.scores[t],
                    levels[t],
                    escape_html(tok)
                );
            }
            out.push_str("</p>\n</body>\n</html>\n");
            Ok(out)
        }
        HeatmapFormat::Ansi => {
            let mut out = format!(
                "{} (predicted {}, gold {})\n",
                meta.id,
                stance_label(meta.predicted),
                stance_label(meta.gold)
            );
            for (t, tok) in engagement.tokens.iter().enumerate() {
                if t > 0 {
                    out.push(' ');
                }
                if levels[t] == 0.0 {
                    out.push_str(tok);
                } else {
                    let i = ((levels[t] * ANSI_RAMP.len() as f64).ceil() as usize)
                        .clamp(1, ANSI_RAMP.len())
                        - 1;
                    let _ = write!(out, "\x1b[48;5;{}m{tok}\x1b[0m", ANSI_RAMP[i]);
                }
            }
            out.push('\n');
            Ok(out)
        }
    }
}
