use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Model, ModelInput, ModelParams};
use crate::corpus::Stance;
use crate::error::Result;

/// Coordinates whose analytic and numeric gradients are both below this
/// magnitude are not compared.
pub const GRADCHECK_FLOOR: f64 = 1e-10;
/// Minimum number of coordinates sampled (all of them for smaller models).
pub const GRADCHECK_MIN_COORDS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub skipped: usize,
    /// Tensor name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

/// Compares `analytic` with central differences of `objective` on a seeded
/// sample of coordinates drawn from every tensor.
pub fn gradient_check_with<F>(
    model: &Model,
    objective: F,
    analytic: &ModelParams,
    eps: f64,
    seed: u64,
) -> Result<GradCheckReport>
where
    F: Fn(&Model) -> Result<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = model.params.tensors().iter().map(|(_, t)| t.len()).collect();
    let quota = sample_quota(&sizes, GRADCHECK_MIN_COORDS);
    let picks: Vec<(usize, Vec<usize>)> = sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let idx = if n <= quota {
                (0..n).collect()
            } else {
                let mut v = sample(&mut rng, n, quota).into_vec();
                v.sort_unstable();
                v
            };
            (k, idx)
        })
        .collect();

    let analytic = analytic.tensors();
    let mut probe = model.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
        worst: None,
    };
    for (k, idx) in picks {
        for i in idx {
            let orig = probe.params.tensors()[k].1.as_slice()[i];
            probe.params.tensors_mut()[k].1.as_mut_slice()[i] = orig + eps;
            let plus = objective(&probe)?;
            probe.params.tensors_mut()[k].1.as_mut_slice()[i] = orig - eps;
            let minus = objective(&probe)?;
            probe.params.tensors_mut()[k].1.as_mut_slice()[i] = orig;

            let numeric = (plus - minus) / (2.0 * eps);
            let exact = analytic[k].1.as_slice()[i];
            let scale = numeric.abs().max(exact.abs());
            if scale < GRADCHECK_FLOOR {
                report.skipped += 1;
                continue;
            }
            report.checked += 1;
            let rel = (numeric - exact).abs() / scale;
            if report.worst.is_none() || rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = Some((analytic[k].0.to_string(), i));
            }
        }
    }
    Ok(report)
}

/// Smallest per-tensor sample size that yields at least `target`
/// coordinates overall (or every coordinate when there are fewer).
fn sample_quota(sizes: &[usize], target: usize) -> usize {
    let largest = sizes.iter().copied().max().unwrap_or(0);
    let covered = |q: usize| sizes.iter().map(|&n| n.min(q)).sum::<usize>();
    let mut q = target.div_ceil(sizes.len().max(1)).max(1);
    while q < largest && covered(q) < target {
        q += 1;
    }
    q
}

/// Gradient check of the training objective for one instance.
pub fn gradient_check(
    model: &Model,
    input: &ModelInput,
    question: Option<&ModelInput>,
    gold: Stance,
    lambda: f64,
    eps: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deterministic = model.clone();
    deterministic.config.dropout = 0.0;
    let (_, grads) = deterministic.loss_and_grad(input, question, gold, lambda, &mut rng)?;
    gradient_check_with(
        &deterministic,
        |m| m.loss(input, question, gold, lambda),
        &grads,
        eps,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::sample_quota;

    #[test]
    fn quota_reaches_target() {
        assert_eq!(sample_quota(&[1000, 1000], 200), 100);
        assert_eq!(sample_quota(&[10, 10, 1000], 200), 180);
        assert!(sample_quota(&[3, 4], 200) >= 4);
    }
}
