//! Binary classification metrics, McNemar's test and per-topic sentiment
//! profiles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::affect::AffectAnnotation;
use crate::corpus::{Segment, Stance, TokenizedInstance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub positive_class: Stance,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(preds: &[Stance], golds: &[Stance], positive: Stance) -> Result<Metrics> {
    if preds.len() != golds.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} gold labels",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Shape("no predictions to score".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &g) in preds.iter().zip(golds) {
        match (p == positive, g == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Ok(Metrics {
        precision,
        recall,
        f1: f1_score(precision, recall),
        positive_class: positive,
        tp,
        fp,
        fn_,
        tn,
    })
}

/// Metrics with each class as positive, their macro average and accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub pro: Metrics,
    pub con: Metrics,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

pub fn evaluate(preds: &[Stance], golds: &[Stance]) -> Result<EvalReport> {
    let pro = compute_metrics(preds, golds, Stance::Pro)?;
    let con = compute_metrics(preds, golds, Stance::Con)?;
    Ok(EvalReport {
        n: preds.len(),
        accuracy: ratio(pro.tp + pro.tn, preds.len()),
        pro,
        con,
        macro_precision: (pro.precision + con.precision) / 2.0,
        macro_recall: (pro.recall + con.recall) / 2.0,
        macro_f1: (pro.f1 + con.f1) / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// A right, B wrong.
    pub b: u64,
    /// A wrong, B right.
    pub c: u64,
    /// Continuity-corrected statistic; 0 when `b + c = 0`.
    pub chi2_statistic: f64,
    pub chi2_defined: bool,
    pub p_exact: f64,
    pub p_chi2: f64,
}

/// Two-sided exact binomial p-value for `b` against `c` under p = 1/2.
pub fn mcnemar_exact_p(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 {
        return 1.0;
    }
    let k = b.min(c);
    let ln2n = n as f64 * std::f64::consts::LN_2;
    // ln C(n, i) built incrementally
    let mut ln_c = 0.0;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        tail += (ln_c - ln2n).exp();
    }
    (2.0 * tail).min(1.0)
}

pub fn mcnemar_from_counts(b: u64, c: u64) -> McNemarResult {
    let n = b + c;
    let (chi2_statistic, p_chi2, chi2_defined) = if n == 0 {
        (0.0, 1.0, false)
    } else {
        let d = (b as f64 - c as f64).abs() - 1.0;
        let stat = d * d / n as f64;
        let dist = ChiSquared::new(1.0).expect("one degree of freedom");
        (stat, dist.sf(stat).clamp(0.0, 1.0), true)
    };
    McNemarResult {
        b,
        c,
        chi2_statistic,
        chi2_defined,
        p_exact: mcnemar_exact_p(b, c),
        p_chi2,
    }
}

pub fn mcnemar_test(preds_a: &[Stance], preds_b: &[Stance], golds: &[Stance]) -> Result<McNemarResult> {
    if preds_a.len() != golds.len() || preds_b.len() != golds.len() {
        return Err(Error::Shape(format!(
            "prediction lengths {} and {} for {} gold labels",
            preds_a.len(),
            preds_b.len(),
            golds.len()
        )));
    }
    let (mut b, mut c) = (0, 0);
    for ((&a, &bb), &g) in preds_a.iter().zip(preds_b).zip(golds) {
        match (a == g, bb == g) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(mcnemar_from_counts(b, c))
}

/// Mean perspective sentiment per topic and stance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub topic: String,
    pub pro_avg: Option<f64>,
    pub con_avg: Option<f64>,
    pub pro_count: usize,
    pub con_count: usize,
}

/// Mean of a perspective's sentence compound scores, or `None` when it has
/// no sentences.
pub fn perspective_score(tokenized: &TokenizedInstance, annotation: &AffectAnnotation) -> Option<f64> {
    let scores: Vec<f64> = tokenized
        .sentences
        .iter()
        .zip(&annotation.sentence_scores)
        .filter(|(s, _)| s.segment == Segment::Perspective)
        .map(|(_, &v)| v)
        .collect();
    (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Per-topic averages of perspective scores, topics in sorted order. An
/// empty `topics` filter keeps every topic.
pub fn sentiment_profile(
    corpus: &[TokenizedInstance],
    annotations: &[AffectAnnotation],
    topics: &[String],
) -> Result<Vec<ProfileRow>> {
    if corpus.len() != annotations.len() {
        return Err(Error::Shape(format!(
            "{} annotations for {} instances",
            annotations.len(),
            corpus.len()
        )));
    }
    let mut acc: BTreeMap<&str, [(f64, usize); 2]> = BTreeMap::new();
    for (tok, ann) in corpus.iter().zip(annotations) {
        let topic = tok.instance.topic.as_str();
        if !topics.is_empty() && !topics.iter().any(|t| t == topic) {
            continue;
        }
        let Some(score) = perspective_score(tok, ann) else {
            continue;
        };
        let slot = &mut acc.entry(topic).or_default()[tok.instance.stance.index()];
        slot.0 += score;
        slot.1 += 1;
    }
    for t in topics {
        if !acc.contains_key(t.as_str()) {
            log::warn!("topic {t:?} has no perspectives");
        }
    }
    let mean = |(s, n): (f64, usize)| (n > 0).then(|| s / n as f64);
    Ok(acc
        .into_iter()
        .map(|(topic, [pro, con])| ProfileRow {
            topic: topic.to_string(),
            pro_avg: mean(pro),
            con_avg: mean(con),
            pro_count: pro.1,
            con_count: con.1,
        })
        .collect())
}
