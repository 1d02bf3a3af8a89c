//! Affect-enriched recurrent classifier.
//!
//! Each token's input is its context vector, optionally followed by the
//! embedding row of its sentiment or emotion label. A uni- or bidirectional
//! GRU runs over the inputs; the hidden states `Z` are pooled into
//! `u = [mean(Z); max(Z); z_T]` and a dense softmax layer maps `u` to
//! pro/con probabilities.

mod checkpoint;
mod gradcheck;
mod gru;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affect::{Emotion, Sentiment};
use crate::corpus::Stance;
use crate::embeddings::ContextInput;
use crate::error::{Error, Result};
use crate::tensor::{dot, softmax, Tensor};

pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint};
pub use gradcheck::{gradient_check, gradient_check_with, GradCheckReport, GRADCHECK_FLOOR};
pub use gru::{gru_step, run_gru, GruParams};

pub const DEFAULT_CONTEXT_DIM: usize = 768;
pub const DEFAULT_HIDDEN: usize = 384;
/// Half-width of the uniform range for affect and fallback embeddings.
pub const EMBEDDING_INIT_RANGE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub d_context: usize,
    pub sentiment_mode: bool,
    pub emotion_mode: bool,
    pub bidirectional: bool,
    /// Hidden units per direction.
    pub hidden: usize,
    pub affect_dim: usize,
    pub seed: u64,
    /// Rows of a trainable token table used in place of precomputed
    /// contextual embeddings.
    pub fallback_vocab: Option<usize>,
    /// Dropout probability on the pooled vector during training.
    pub dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::sentiment(DEFAULT_CONTEXT_DIM)
    }
}

impl ModelConfig {
    /// Bidirectional model with sentence sentiment labels.
    pub fn sentiment(d_context: usize) -> Self {
        ModelConfig {
            d_context,
            sentiment_mode: true,
            emotion_mode: false,
            bidirectional: true,
            hidden: DEFAULT_HIDDEN,
            affect_dim: d_context,
            seed: 0,
            fallback_vocab: None,
            dropout: 0.0,
        }
    }

    /// Unidirectional model with token emotion labels.
    pub fn emotion(d_context: usize) -> Self {
        ModelConfig {
            sentiment_mode: false,
            emotion_mode: true,
            bidirectional: false,
            ..ModelConfig::sentiment(d_context)
        }
    }

    /// No affect input.
    pub fn plain(d_context: usize, bidirectional: bool) -> Self {
        ModelConfig {
            sentiment_mode: false,
            emotion_mode: false,
            bidirectional,
            ..ModelConfig::sentiment(d_context)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sentiment_mode && self.emotion_mode {
            return Err(Error::Config(
                "sentiment and emotion modes are mutually exclusive".into(),
            ));
        }
        if self.hidden == 0 {
            return Err(Error::Config("hidden size must be positive".into()));
        }
        if self.d_context == 0 {
            return Err(Error::Config("context dimension must be positive".into()));
        }
        if self.has_affect() && self.affect_dim == 0 {
            return Err(Error::Config("affect dimension must be positive".into()));
        }
        if self.fallback_vocab == Some(0) {
            return Err(Error::Config("fallback vocabulary is empty".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }

    pub fn has_affect(&self) -> bool {
        self.sentiment_mode || self.emotion_mode
    }

    pub fn input_dim(&self) -> usize {
        self.d_context + if self.has_affect() { self.affect_dim } else { 0 }
    }

    pub fn directions(&self) -> usize {
        if self.bidirectional {
            2
        } else {
            1
        }
    }

    /// Width of `Z` and of each of the three pooled blocks.
    pub fn state_width(&self) -> usize {
        self.hidden * self.directions()
    }

    pub fn pooled_width(&self) -> usize {
        3 * self.state_width()
    }
}

/// Trainable parameter count from the tensor shapes.
pub fn parameter_count(config: &ModelConfig) -> Result<usize> {
    config.validate()?;
    let h = config.hidden;
    let gru = 3 * h * (config.input_dim() + h + 2) * config.directions();
    let affect = if config.sentiment_mode {
        Sentiment::COUNT * config.affect_dim
    } else if config.emotion_mode {
        Emotion::COUNT * config.affect_dim
    } else {
        0
    };
    let fallback = config.fallback_vocab.unwrap_or(0) * config.d_context;
    let head = 2 * config.pooled_width() + 2;
    Ok(fallback + affect + gru + head)
}

/// All trainable tensors. Optional tensors are present exactly when the
/// configuration needs them.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub embedding: Option<Tensor>,
    pub sentiment_embedding: Option<Tensor>,
    pub emotion_embedding: Option<Tensor>,
    pub gru_forward: GruParams,
    pub gru_backward: Option<GruParams>,
    pub head_weight: Tensor,
    pub head_bias: Tensor,
}

impl ModelParams {
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let d_in = config.input_dim();
        let h = config.hidden;
        Ok(ModelParams {
            embedding: config
                .fallback_vocab
                .map(|v| Tensor::zeros(v, config.d_context)),
            sentiment_embedding: config
                .sentiment_mode
                .then(|| Tensor::zeros(Sentiment::COUNT, config.affect_dim)),
            emotion_embedding: config
                .emotion_mode
                .then(|| Tensor::zeros(Emotion::COUNT, config.affect_dim)),
            gru_forward: GruParams::zeros(d_in, h),
            gru_backward: config.bidirectional.then(|| GruParams::zeros(d_in, h)),
            head_weight: Tensor::zeros(2, config.pooled_width()),
            head_bias: Tensor::zeros(2, 1),
        })
    }

    /// Seeded initialization: embeddings uniform in ±0.1, recurrent weights
    /// uniform in ±1/sqrt(hidden), head weights uniform in ±1/sqrt(fan_in),
    /// biases zero. Tensors are filled in declaration order from one stream.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let gru_bound = 1.0 / (config.hidden as f64).sqrt();
        let head_bound = 1.0 / (config.pooled_width() as f64).sqrt();
        for (name, t) in p.tensors_mut() {
            let bound = if name.ends_with("bias") || name.contains(".b_") {
                continue;
            } else if name.contains("embedding") {
                EMBEDDING_INIT_RANGE
            } else if name.starts_with("gru") {
                gru_bound
            } else {
                head_bound
            };
            for v in t.as_mut_slice() {
                *v = rng.random_range(-bound..bound);
            }
        }
        Ok(p)
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, t) in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    /// Named tensors in declaration order.
    pub fn tensors(&self) -> Vec<(&'static str, &Tensor)> {
        let mut out = Vec::new();
        if let Some(t) = &self.embedding {
            out.push(("embedding", t));
        }
        if let Some(t) = &self.sentiment_embedding {
            out.push(("sentiment_embedding", t));
        }
        if let Some(t) = &self.emotion_embedding {
            out.push(("emotion_embedding", t));
        }
        const FWD: [&str; 4] = ["gru.forward.w_ih", "gru.forward.w_hh", "gru.forward.b_ih", "gru.forward.b_hh"];
        const BWD: [&str; 4] = ["gru.backward.w_ih", "gru.backward.w_hh", "gru.backward.b_ih", "gru.backward.b_hh"];
        out.extend(FWD.into_iter().zip(self.gru_forward.tensors()));
        if let Some(g) = &self.gru_backward {
            out.extend(BWD.into_iter().zip(g.tensors()));
        }
        out.push(("head.weight", &self.head_weight));
        out.push(("head.bias", &self.head_bias));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Tensor)> {
        let mut out = Vec::new();
        if let Some(t) = &mut self.embedding {
            out.push(("embedding", t));
        }
        if let Some(t) = &mut self.sentiment_embedding {
            out.push(("sentiment_embedding", t));
        }
        if let Some(t) = &mut self.emotion_embedding {
            out.push(("emotion_embedding", t));
        }
        const FWD: [&str; 4] = ["gru.forward.w_ih", "gru.forward.w_hh", "gru.forward.b_ih", "gru.forward.b_hh"];
        const BWD: [&str; 4] = ["gru.backward.w_ih", "gru.backward.w_hh", "gru.backward.b_ih", "gru.backward.b_hh"];
        out.extend(FWD.into_iter().zip(self.gru_forward.tensors_mut()));
        if let Some(g) = &mut self.gru_backward {
            out.extend(BWD.into_iter().zip(g.tensors_mut()));
        }
        out.push(("head.weight", &mut self.head_weight));
        out.push(("head.bias", &mut self.head_bias));
        out
    }

    /// Number of scalars actually allocated.
    pub fn allocated_scalars(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.is_finite())
    }

    /// `self += other`, tensor by tensor.
    pub fn add_assign(&mut self, other: &ModelParams) {
        for ((_, a), (_, b)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for (_, t) in self.tensors_mut() {
            t.scale(s);
        }
    }
}

/// Network input for one sequence: context plus per-token affect labels.
/// Labels for a disabled mode are ignored and may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInput {
    pub context: ContextInput,
    pub sentiment: Vec<Sentiment>,
    pub emotion: Vec<Emotion>,
}

impl ModelInput {
    pub fn len(&self) -> usize {
        self.context.len()
    }

    pub fn is_empty(&self) -> bool {
        self.context.is_empty()
    }
}

/// Everything the backward pass and the explainer need from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub x: Tensor,
    pub z: Tensor,
    pub argmax: Vec<usize>,
    /// Pooled vector before dropout.
    pub u: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    dropout_mask: Option<Vec<f64>>,
    fwd_trace: Vec<gru::StepTrace>,
    bwd_trace: Option<Vec<gru::StepTrace>>,
}

impl ForwardCache {
    pub fn len(&self) -> usize {
        self.z.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.z.rows() == 0
    }

    pub fn predicted(&self) -> Stance {
        Stance::from_index(argmax_first(&self.probs))
    }
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Pooled vector `[column means; column maxes; last row]` and, per column,
/// the smallest row index attaining the maximum.
pub fn pool_and_assemble(z: &Tensor) -> (Vec<f64>, Vec<usize>) {
    let (t_len, w) = z.shape();
    assert!(t_len > 0, "pooling an empty sequence");
    let mut u = vec![0.0; 3 * w];
    let mut argmax = vec![0usize; w];
    u[w..2 * w].copy_from_slice(z.row(0));
    for t in 0..t_len {
        let row = z.row(t);
        for j in 0..w {
            u[j] += row[j];
            if row[j] > u[w + j] {
                u[w + j] = row[j];
                argmax[j] = t;
            }
        }
    }
    for v in &mut u[..w] {
        *v /= t_len as f64;
    }
    u[2 * w..].copy_from_slice(z.row(t_len - 1));
    (u, argmax)
}

/// Parameters plus the configuration that shaped them.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ModelParams,
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Self> {
        let params = ModelParams::init(&config)?;
        Ok(Model { config, params })
    }

    pub fn parameter_count(&self) -> usize {
        self.params.allocated_scalars()
    }

    fn affect_row(&self, input: &ModelInput, t: usize) -> Option<&[f64]> {
        if let Some(w) = &self.params.sentiment_embedding {
            Some(w.row(input.sentiment[t].index()))
        } else if let Some(w) = &self.params.emotion_embedding {
            Some(w.row(input.emotion[t].index()))
        } else {
            None
        }
    }

    /// Builds `X`, one row per token.
    pub fn assemble_inputs(&self, input: &ModelInput) -> Result<Tensor> {
        let cfg = &self.config;
        let t_len = input.len();
        if t_len == 0 {
            return Err(Error::Shape("empty input sequence".into()));
        }
        if cfg.sentiment_mode && input.sentiment.len() != t_len {
            return Err(Error::Shape(format!(
                "{} sentiment labels for {t_len} tokens",
                input.sentiment.len()
            )));
        }
        if cfg.emotion_mode && input.emotion.len() != t_len {
            return Err(Error::Shape(format!(
                "{} emotion labels for {t_len} tokens",
                input.emotion.len()
            )));
        }
        let d = cfg.d_context;
        let mut x = Tensor::zeros(t_len, cfg.input_dim());
        match &input.context {
            ContextInput::Frozen(m) => {
                if m.cols() != d {
                    return Err(Error::Shape(format!(
                        "context width {} but model expects {d}",
                        m.cols()
                    )));
                }
                for t in 0..t_len {
                    x.row_mut(t)[..d].copy_from_slice(m.row(t));
                }
            }
            ContextInput::Trainable(ids) => {
                let table = self.params.embedding.as_ref().ok_or_else(|| {
                    Error::Config("token ids given but the model has no fallback table".into())
                })?;
                for (t, &id) in ids.iter().enumerate() {
                    if id >= table.rows() {
                        return Err(Error::Shape(format!(
                            "token id {id} outside fallback table of {} rows",
                            table.rows()
                        )));
                    }
                    x.row_mut(t)[..d].copy_from_slice(table.row(id));
                }
            }
        }
        for t in 0..t_len {
            if let Some(row) = self.affect_row(input, t) {
                x.row_mut(t)[d..].copy_from_slice(row);
            }
        }
        Ok(x)
    }

    /// Inference forward pass.
    pub fn forward(&self, input: &ModelInput) -> Result<ForwardCache> {
        self.forward_impl(input, None::<&mut ChaCha8Rng>)
    }

    /// Forward pass that applies dropout to `u` when the configuration asks
    /// for it.
    pub fn forward_train<R: Rng>(&self, input: &ModelInput, rng: &mut R) -> Result<ForwardCache> {
        self.forward_impl(input, Some(rng))
    }

    fn forward_impl<R: Rng>(&self, input: &ModelInput, rng: Option<&mut R>) -> Result<ForwardCache> {
        let x = self.assemble_inputs(input)?;
        let run = gru::run_traced(
            &x,
            &self.params.gru_forward,
            self.params.gru_backward.as_ref(),
        )?;
        let (u, argmax) = pool_and_assemble(&run.z);
        let p = self.config.dropout;
        let dropout_mask = match rng {
            Some(rng) if p > 0.0 => Some(
                (0..u.len())
                    .map(|_| if rng.random_bool(p) { 0.0 } else { 1.0 / (1.0 - p) })
                    .collect::<Vec<_>>(),
            ),
            _ => None,
        };
        let mut logits = self.params.head_bias.as_slice().to_vec();
        match &dropout_mask {
            Some(mask) => {
                let ud: Vec<f64> = u.iter().zip(mask).map(|(a, m)| a * m).collect();
                self.params.head_weight.matvec_acc(&ud, &mut logits);
            }
            None => self.params.head_weight.matvec_acc(&u, &mut logits),
        }
        if !logits.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("logits".into()));
        }
        let probs = softmax(&logits);
        Ok(ForwardCache {
            x,
            z: run.z,
            argmax,
            u,
            logits,
            probs,
            dropout_mask,
            fwd_trace: run.fwd,
            bwd_trace: run.bwd,
        })
    }

    /// Cross-entropy gradient for one instance.
    pub fn backward(&self, input: &ModelInput, cache: &ForwardCache, gold: Stance) -> ModelParams {
        let mut grads = self.params.zeros_like();
        self.backward_into(input, cache, Some(gold), None, &mut grads);
        grads
    }

    /// Accumulates into `grads` the gradient of cross-entropy against `gold`
    /// (if given) plus an extra gradient `du` arriving at the pooled vector.
    pub fn backward_into(
        &self,
        input: &ModelInput,
        cache: &ForwardCache,
        gold: Option<Stance>,
        du_extra: Option<&[f64]>,
        grads: &mut ModelParams,
    ) {
        let cfg = &self.config;
        let w = cfg.state_width();
        let t_len = cache.len();
        let mut du = vec![0.0; 3 * w];

        if let Some(gold) = gold {
            let mut dlogits = cache.probs.clone();
            dlogits[gold.index()] -= 1.0;
            let pooled: Vec<f64> = match &cache.dropout_mask {
                Some(mask) => cache.u.iter().zip(mask).map(|(a, m)| a * m).collect(),
                None => cache.u.clone(),
            };
            grads.head_weight.add_outer(&dlogits, &pooled);
            for (g, d) in grads.head_bias.as_mut_slice().iter_mut().zip(&dlogits) {
                *g += d;
            }
            self.params.head_weight.matvec_t_acc(&dlogits, &mut du);
            if let Some(mask) = &cache.dropout_mask {
                for (d, m) in du.iter_mut().zip(mask) {
                    *d *= m;
                }
            }
        }
        if let Some(extra) = du_extra {
            for (d, e) in du.iter_mut().zip(extra) {
                *d += e;
            }
        }

        // dL/dZ from the three pooled blocks
        let mut dz = Tensor::zeros(t_len, w);
        let inv_t = 1.0 / t_len as f64;
        for t in 0..t_len {
            let row = dz.row_mut(t);
            for j in 0..w {
                row[j] += du[j] * inv_t;
            }
        }
        for j in 0..w {
            let t = cache.argmax[j];
            dz.row_mut(t)[j] += du[w + j];
        }
        {
            let last = dz.row_mut(t_len - 1);
            for j in 0..w {
                last[j] += du[2 * w + j];
            }
        }

        let hd = cfg.hidden;
        let mut dx = Tensor::zeros(t_len, cfg.input_dim());
        let positions: Vec<usize> = (0..t_len).collect();
        let dh: Vec<Vec<f64>> = (0..t_len).map(|t| dz.row(t)[..hd].to_vec()).collect();
        gru::scan_backward(
            &cache.fwd_trace,
            &positions,
            &dh,
            &cache.x,
            &self.params.gru_forward,
            &mut grads.gru_forward,
            &mut dx,
        );
        if let (Some(trace), Some(p), Some(g)) = (
            &cache.bwd_trace,
            &self.params.gru_backward,
            &mut grads.gru_backward,
        ) {
            let positions: Vec<usize> = (0..t_len).rev().collect();
            let dh: Vec<Vec<f64>> = positions.iter().map(|&t| dz.row(t)[hd..].to_vec()).collect();
            gru::scan_backward(trace, &positions, &dh, &cache.x, p, g, &mut dx);
        }

        let d = cfg.d_context;
        if let (ContextInput::Trainable(ids), Some(g)) = (&input.context, &mut grads.embedding) {
            for (t, &id) in ids.iter().enumerate() {
                for (a, b) in g.row_mut(id).iter_mut().zip(&dx.row(t)[..d]) {
                    *a += b;
                }
            }
        }
        let affect = match (&mut grads.sentiment_embedding, &mut grads.emotion_embedding) {
            (Some(g), _) => Some((g, input.sentiment.iter().map(|s| s.index()).collect::<Vec<_>>())),
            (None, Some(g)) => Some((g, input.emotion.iter().map(|e| e.index()).collect())),
            (None, None) => None,
        };
        if let Some((g, rows)) = affect {
            for (t, &r) in rows.iter().enumerate().take(t_len) {
                for (a, b) in g.row_mut(r).iter_mut().zip(&dx.row(t)[d..]) {
                    *a += b;
                }
            }
        }
    }

    /// Loss and gradient for one training instance: cross-entropy plus, when
    /// `lambda > 0` and a question-only input is given, the weighted
    /// consistency penalty.
    pub fn loss_and_grad<R: Rng>(
        &self,
        input: &ModelInput,
        question: Option<&ModelInput>,
        gold: Stance,
        lambda: f64,
        rng: &mut R,
    ) -> Result<(f64, ModelParams)> {
        let cache = self.forward_train(input, rng)?;
        let mut loss = cross_entropy(&cache.probs, gold);
        let mut grads = self.params.zeros_like();
        match question {
            Some(q) if lambda > 0.0 => {
                let qcache = self.forward_train(q, rng)?;
                let (pen, g_q, g_qp) = consistency_penalty_grad(&qcache.u, &cache.u, gold);
                loss += lambda * pen;
                let g_q: Vec<f64> = g_q.iter().map(|v| v * lambda).collect();
                let g_qp: Vec<f64> = g_qp.iter().map(|v| v * lambda).collect();
                self.backward_into(input, &cache, Some(gold), Some(&g_qp), &mut grads);
                self.backward_into(q, &qcache, None, Some(&g_q), &mut grads);
            }
            _ => self.backward_into(input, &cache, Some(gold), None, &mut grads),
        }
        Ok((loss, grads))
    }

    /// Deterministic objective used by gradient checks (no dropout).
    pub fn loss(&self, input: &ModelInput, question: Option<&ModelInput>, gold: Stance, lambda: f64) -> Result<f64> {
        let cache = self.forward(input)?;
        let mut loss = cross_entropy(&cache.probs, gold);
        if let (Some(q), true) = (question, lambda > 0.0) {
            let qcache = self.forward(q)?;
            loss += lambda * consistency_penalty(&qcache.u, &cache.u, gold);
        }
        Ok(loss)
    }
}

/// Smallest probability fed to the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// `-ln p[gold]`, with `p` clamped below at [`PROB_FLOOR`].
pub fn cross_entropy(probs: &[f64], gold: Stance) -> f64 {
    let p = probs[gold.index()];
    if p < PROB_FLOOR {
        log::warn!("probability {p:e} clamped to {PROB_FLOOR:e} in cross-entropy");
    }
    -p.max(PROB_FLOOR).ln()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Cosine penalty between the question-only and question+perspective pooled
/// vectors: `1 - cos` for pro, `max(0, cos)` for con.
pub fn consistency_penalty(u_q: &[f64], u_qp: &[f64], label: Stance) -> f64 {
    consistency_penalty_grad(u_q, u_qp, label).0
}

/// Penalty value with its gradients with respect to `u_q` and `u_qp`.
pub fn consistency_penalty_grad(
    u_q: &[f64],
    u_qp: &[f64],
    label: Stance,
) -> (f64, Vec<f64>, Vec<f64>) {
    let (na, nb) = (norm(u_q), norm(u_qp));
    let zero = || vec![0.0; u_q.len()];
    if na == 0.0 || nb == 0.0 {
        log::warn!("zero-norm pooled vector in consistency penalty");
        return (0.0, zero(), zero());
    }
    let c = dot(u_q, u_qp) / (na * nb);
    let (value, dc) = match label {
        Stance::Pro => (1.0 - c, -1.0),
        Stance::Con if c > 0.0 => (c, 1.0),
        Stance::Con => return (0.0, zero(), zero()),
    };
    let ga = u_q
        .iter()
        .zip(u_qp)
        .map(|(a, b)| dc * (b / (na * nb) - c * a / (na * na)))
        .collect();
    let gb = u_q
        .iter()
        .zip(u_qp)
        .map(|(a, b)| dc * (a / (na * nb) - c * b / (nb * nb)))
        .collect();
    (value, ga, gb)
}
