#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stancelab::affect::{Emotion, Sentiment};
use stancelab::embeddings::ContextInput;
use stancelab::network::{Model, ModelConfig, ModelInput};
use stancelab::tensor::Tensor;

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
}

/// Tiny configuration within d <= 8, H <= 6. `mode` 0 is sentiment,
/// 1 emotion, 2 neither.
pub fn tiny_config(rng: &mut ChaCha8Rng, seed: u64, mode: usize) -> ModelConfig {
    let d = rng.random_range(2..=8);
    ModelConfig {
        d_context: d,
        sentiment_mode: mode == 0,
        emotion_mode: mode == 1,
        bidirectional: rng.random_bool(0.5),
        hidden: rng.random_range(1..=6),
        affect_dim: rng.random_range(1..=4),
        seed,
        fallback_vocab: rng.random_bool(0.3).then_some(5),
        dropout: 0.0,
    }
}

/// Seeded model with every scalar, biases included, drawn from U(-0.5, 0.5).
pub fn random_model(cfg: ModelConfig) -> Model {
    let mut model = Model::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed ^ 0x5eed);
    for (_, t) in model.params.tensors_mut() {
        for v in t.as_mut_slice() {
            *v = rng.random_range(-0.5..0.5);
        }
    }
    model
}

pub fn input_for(cfg: &ModelConfig, t: usize, rng: &mut ChaCha8Rng) -> ModelInput {
    let context = match cfg.fallback_vocab {
        Some(v) => ContextInput::Trainable((0..t).map(|_| rng.random_range(0..v)).collect()),
        None => ContextInput::Frozen(random_matrix(t, cfg.d_context, rng)),
    };
    let sents = [Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive];
    ModelInput {
        context,
        sentiment: (0..t).map(|_| sents[rng.random_range(0..3)]).collect(),
        emotion: (0..t)
            .map(|_| {
                let i = rng.random_range(0..Emotion::COUNT);
                *Emotion::BASIC.get(i).unwrap_or(&Emotion::Neutral)
            })
            .collect(),
    }
}
