mod common;

use common::{input_for, random_matrix, random_model, tiny_config};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stancelab::corpus::Stance;
use stancelab::embeddings::ContextInput;
use stancelab::network::{
    gradient_check, gradient_check_with, gru_step, run_gru, GruParams, Model, ModelConfig,
};
use stancelab::tensor::Tensor;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Straight-line GRU cell written from the gate equations, indexing the
/// stacked weights by hand.
fn oracle_step(x: &[f64], h: &[f64], p: &GruParams) -> Vec<f64> {
    let hd = h.len();
    let w = |m: &Tensor, r: usize, c: usize| m.get(r, c);
    let mut out = Vec::new();
    for j in 0..hd {
        let mut ar = p.b_ih.as_slice()[j] + p.b_hh.as_slice()[j];
        let mut az = p.b_ih.as_slice()[hd + j] + p.b_hh.as_slice()[hd + j];
        let mut ain = p.b_ih.as_slice()[2 * hd + j];
        let mut ahn = p.b_hh.as_slice()[2 * hd + j];
        for (k, xk) in x.iter().enumerate() {
            ar += w(&p.w_ih, j, k) * xk;
            az += w(&p.w_ih, hd + j, k) * xk;
            ain += w(&p.w_ih, 2 * hd + j, k) * xk;
        }
        for (k, hk) in h.iter().enumerate() {
            ar += w(&p.w_hh, j, k) * hk;
            az += w(&p.w_hh, hd + j, k) * hk;
            ahn += w(&p.w_hh, 2 * hd + j, k) * hk;
        }
        let r = sig(ar);
        let z = sig(az);
        let n = (ain + r * ahn).tanh();
        out.push((1.0 - z) * n + z * h[j]);
    }
    out
}

fn random_gru(input: usize, hidden: usize, rng: &mut ChaCha8Rng) -> GruParams {
    let mut p = GruParams::zeros(input, hidden);
    for t in [&mut p.w_ih, &mut p.w_hh, &mut p.b_ih, &mut p.b_hh] {
        for v in t.as_mut_slice() {
            *v = rng.random_range(-0.8..0.8);
        }
    }
    p
}

#[test]
fn gru_step_matches_scalar_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let p = random_gru(5, 5, &mut rng);
    let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let h: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let got = gru_step(&x, &h, &p).unwrap();
    for (a, b) in got.iter().zip(oracle_step(&x, &h, &p)) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn single_step_sequence() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_gru(3, 2, &mut rng);
    let b = random_gru(3, 2, &mut rng);
    let x = random_matrix(1, 3, &mut rng);
    let z = run_gru(&x, &f, Some(&b)).unwrap();
    assert_eq!(z.shape(), (1, 4));
    assert_eq!(&z.row(0)[..2], gru_step(x.row(0), &[0.0, 0.0], &f).unwrap().as_slice());
    assert_eq!(&z.row(0)[2..], gru_step(x.row(0), &[0.0, 0.0], &b).unwrap().as_slice());
    assert_eq!(run_gru(&x, &f, None).unwrap().cols(), 2);
}

#[test]
fn backward_states_are_reversed_forward_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_gru(4, 3, &mut rng);
    let b = random_gru(4, 3, &mut rng);
    let x = random_matrix(6, 4, &mut rng);
    let z = run_gru(&x, &f, Some(&b)).unwrap();
    let mut rev = Tensor::zeros(6, 4);
    for t in 0..6 {
        rev.row_mut(t).copy_from_slice(x.row(5 - t));
    }
    let zr = run_gru(&rev, &b, None).unwrap();
    for t in 0..6 {
        assert_eq!(&z.row(t)[3..], zr.row(5 - t));
    }
}

#[test]
fn logits_match_straight_line_recomputation() {
    let cfg = ModelConfig {
        d_context: 4,
        hidden: 3,
        affect_dim: 2,
        seed: 5,
        ..ModelConfig::sentiment(4)
    };
    let model = Model::new(cfg.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let input = input_for(&cfg, 2, &mut rng);
    let cache = model.forward(&input).unwrap();

    let ContextInput::Frozen(ctx) = &input.context else { unreachable!() };
    let snt = model.params.sentiment_embedding.as_ref().unwrap();
    let xs: Vec<Vec<f64>> = (0..2)
        .map(|t| {
            let mut v = ctx.row(t).to_vec();
            v.extend_from_slice(snt.row(input.sentiment[t] as usize));
            v
        })
        .collect();
    let p = &model.params;
    let f1 = oracle_step(&xs[0], &[0.0; 3], &p.gru_forward);
    let f2 = oracle_step(&xs[1], &f1, &p.gru_forward);
    let bw = p.gru_backward.as_ref().unwrap();
    let b2 = oracle_step(&xs[1], &[0.0; 3], bw);
    let b1 = oracle_step(&xs[0], &b2, bw);
    let z1: Vec<f64> = f1.iter().chain(&b1).copied().collect();
    let z2: Vec<f64> = f2.iter().chain(&b2).copied().collect();
    let mut u: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| (a + b) / 2.0).collect();
    u.extend(z1.iter().zip(&z2).map(|(a, b)| a.max(*b)));
    u.extend_from_slice(&z2);
    for k in 0..2 {
        let mut l = p.head_bias.as_slice()[k];
        for (j, uj) in u.iter().enumerate() {
            l += p.head_weight.get(k, j) * uj;
        }
        assert!((l - cache.logits[k]).abs() < 1e-12, "{l} vs {}", cache.logits[k]);
    }
}

#[test]
fn tiny_model_gradient_check() {
    let cfg = ModelConfig {
        d_context: 6,
        hidden: 4,
        affect_dim: 6,
        seed: 3,
        ..ModelConfig::sentiment(6)
    };
    let model = random_model(cfg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let input = input_for(&cfg, 3, &mut rng);
    let report = gradient_check(&model, &input, None, Stance::Con, 0.0, 1e-4, 0).unwrap();
    assert!(report.checked >= 200, "{report:?}");
    assert!(report.max_rel_error < 1e-4, "{report:?}");
}

#[test]
fn random_models_pass_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for seed in 0..20 {
        let cfg = tiny_config(&mut rng, seed, (seed % 3) as usize);
        let model = random_model(cfg.clone());
        let t = rng.random_range(1..=5);
        let input = input_for(&cfg, t, &mut rng);
        let gold = Stance::from_index(seed as usize % 2);
        let report = gradient_check(&model, &input, None, gold, 0.0, 1e-4, seed).unwrap();
        assert!(report.max_rel_error < 1e-4, "seed {seed} {cfg:?} {report:?}");
    }
}

#[test]
fn consistency_term_passes_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..6 {
        let cfg = tiny_config(&mut rng, seed, (seed % 3) as usize);
        let model = random_model(cfg.clone());
        let input = input_for(&cfg, 4, &mut rng);
        let question = input_for(&cfg, 2, &mut rng);
        let gold = Stance::from_index(seed as usize % 2);
        let report =
            gradient_check(&model, &input, Some(&question), gold, 1.0, 1e-4, seed).unwrap();
        assert!(report.max_rel_error < 1e-4, "seed {seed} {report:?}");
    }
}

#[test]
fn corrupted_gradient_is_caught() {
    let cfg = ModelConfig {
        d_context: 4,
        hidden: 3,
        affect_dim: 2,
        ..ModelConfig::emotion(4)
    };
    let model = Model::new(cfg.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let input = input_for(&cfg, 3, &mut rng);
    let cache = model.forward(&input).unwrap();
    let mut grads = model.backward(&input, &cache, Stance::Pro);
    grads.gru_forward.w_hh.scale(-1.0);
    let report = gradient_check_with(
        &model,
        |m| m.loss(&input, None, Stance::Pro, 0.0),
        &grads,
        1e-4,
        0,
    )
    .unwrap();
    assert!(report.max_rel_error > 1.0, "{report:?}");
    assert!(report.worst.unwrap().0.contains("w_hh"));
}

#[test]
fn zero_loss_configuration_skips_everything() {
    let cfg = ModelConfig {
        d_context: 3,
        hidden: 2,
        affect_dim: 2,
        ..ModelConfig::sentiment(3)
    };
    let mut model = Model::new(cfg.clone()).unwrap();
    model.params.head_bias.as_mut_slice().copy_from_slice(&[80.0, -80.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let input = input_for(&cfg, 2, &mut rng);
    let report = gradient_check(&model, &input, None, Stance::Pro, 0.0, 1e-4, 0).unwrap();
    assert_eq!(report.checked, 0);
    assert!(report.skipped > 0);
    assert_eq!(report.max_rel_error, 0.0);
}

#[test]
fn default_sentiment_model_fits_budget() {
    let cfg = ModelConfig::default();
    let closed = stancelab::network::parameter_count(&cfg).unwrap();
    let model = Model::new(cfg).unwrap();
    assert_eq!(closed, model.params.allocated_scalars());
    assert_eq!(closed, 4_435_202);
    assert!(closed <= 5_500_000);
}
