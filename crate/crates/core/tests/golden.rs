//! Byte-for-byte renders of a pinned instance. Set STANCELAB_BLESS=1 to
//! rewrite the files after checking a render by eye.

use std::path::PathBuf;

use stancelab::corpus::make_fixture;
use stancelab::explain::{engagement_scores, render_heatmap, HeatmapFormat, HeatmapMeta};
use stancelab::network::Model;
use stancelab::pipeline::{annotate_corpus, encode_instance, prepare_encoder, ConfigOverrides, Lexicons};

fn render(format: HeatmapFormat) -> String {
    let corpus = make_fixture(7, 20, 1.0);
    let mut cfg = ConfigOverrides {
        context_dim: Some(8),
        affect_dim: Some(4),
        hidden: Some(4),
        seed: Some(3),
        ..Default::default()
    }
    .resolve()
    .unwrap();
    let lexicons = Lexicons::load(&cfg.data).unwrap();
    let annotated = annotate_corpus(&corpus, &lexicons);
    let encoder = prepare_encoder(&mut cfg, &annotated, None).unwrap();
    let prepared = encode_instance(&annotated[0], &encoder, &cfg.data, false).unwrap();
    let model = Model::new(cfg.model).unwrap();
    let cache = model.forward(&prepared.example.input).unwrap();
    let eng = engagement_scores(
        &cache,
        &prepared.tokens,
        &prepared.word_alignment,
        annotated[0].tokenized.question_tokens.len(),
    )
    .unwrap();
    assert_eq!(eng.total(), 8);
    let meta = HeatmapMeta {
        id: corpus[0].id.clone(),
        question: corpus[0].question.clone(),
        predicted: Some(cache.predicted()),
        gold: Some(corpus[0].stance),
    };
    render_heatmap(&eng, &meta, format).unwrap()
}

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("STANCELAB_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "{name} drifted from the committed render");
}

#[test]
fn html_heatmap_matches_golden() {
    golden("heatmap.html", &render(HeatmapFormat::Html));
}

#[test]
fn json_heatmap_matches_golden() {
    let doc = render(HeatmapFormat::Json);
    golden("heatmap.json", &doc);
    let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    assert_eq!(v["tokens"].as_array().unwrap().len(), v["scores"].as_array().unwrap().len());
}

#[test]
fn renders_are_repeatable() {
    assert_eq!(render(HeatmapFormat::Ansi), render(HeatmapFormat::Ansi));
}
