use serde::Deserialize;
use stancelab::affect::{label_from_score, Sentiment, SentimentLexicon};

#[derive(Deserialize)]
struct OracleRow {
    text: String,
    compound: f64,
    label: Sentiment,
}

#[derive(Deserialize)]
struct Oracle {
    sentences: Vec<OracleRow>,
}

fn oracle() -> Vec<OracleRow> {
    let o: Oracle = serde_json::from_str(include_str!("fixtures/vader_oracle.json")).unwrap();
    o.sentences
}

#[test]
fn compound_scores_match_reference_scorer() {
    let lex = SentimentLexicon::bundled();
    let rows = oracle();
    assert_eq!(rows.len(), 50);
    let sentences: Vec<&str> = include_str!("fixtures/vader_sentences.txt").lines().collect();
    for (row, text) in rows.iter().zip(&sentences) {
        assert_eq!(&row.text, text);
        let got = lex.compound_text(&row.text);
        assert!((got - row.compound).abs() <= 1e-4, "{:?}: {got} vs {}", row.text, row.compound);
        assert_eq!(label_from_score(got), row.label, "{:?}", row.text);
    }
}

#[test]
fn fixture_covers_all_three_labels() {
    let rows = oracle();
    for l in [Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive] {
        assert!(rows.iter().any(|r| r.label == l), "{l:?}");
    }
}

#[test]
fn threshold_boundaries() {
    assert_eq!(label_from_score(-0.05), Sentiment::Negative);
    assert_eq!(label_from_score(0.05), Sentiment::Positive);
    assert_eq!(label_from_score(-0.049_999), Sentiment::Neutral);
    assert_eq!(label_from_score(0.049_999), Sentiment::Neutral);
}
