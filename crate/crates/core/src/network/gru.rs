//! Gated recurrent unit with gates stacked as `[reset; update; candidate]`:
//!
//! ```text
//! r  = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//! z  = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//! n  = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//! h' = (1 - z) * n + z * h
//! ```

use crate::error::{Error, Result};
use crate::tensor::{sigmoid, Tensor};

/// Parameters of one GRU direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    /// `3h x d_in`
    pub w_ih: Tensor,
    /// `3h x h`
    pub w_hh: Tensor,
    /// `3h`
    pub b_ih: Tensor,
    /// `3h`
    pub b_hh: Tensor,
}

impl GruParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        GruParams {
            w_ih: Tensor::zeros(3 * hidden, input),
            w_hh: Tensor::zeros(3 * hidden, hidden),
            b_ih: Tensor::zeros(3 * hidden, 1),
            b_hh: Tensor::zeros(3 * hidden, 1),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.cols()
    }

    pub fn input(&self) -> usize {
        self.w_ih.cols()
    }

    pub(crate) fn tensors(&self) -> [&Tensor; 4] {
        [&self.w_ih, &self.w_hh, &self.b_ih, &self.b_hh]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut Tensor; 4] {
        [
            &mut self.w_ih,
            &mut self.w_hh,
            &mut self.b_ih,
            &mut self.b_hh,
        ]
    }
}

/// Intermediate values of one step, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StepTrace {
    pub h_prev: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub n: Vec<f64>,
    /// `W_hn h + b_hn`
    pub hn: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn step_traced(x: &[f64], h_prev: &[f64], p: &GruParams) -> StepTrace {
    let hd = p.hidden();
    let mut gi = p.b_ih.as_slice().to_vec();
    p.w_ih.matvec_acc(x, &mut gi);
    let mut gh = p.b_hh.as_slice().to_vec();
    p.w_hh.matvec_acc(h_prev, &mut gh);

    let mut r = vec![0.0; hd];
    let mut z = vec![0.0; hd];
    let mut n = vec![0.0; hd];
    let mut h = vec![0.0; hd];
    for j in 0..hd {
        r[j] = sigmoid(gi[j] + gh[j]);
        z[j] = sigmoid(gi[hd + j] + gh[hd + j]);
        n[j] = (gi[2 * hd + j] + r[j] * gh[2 * hd + j]).tanh();
        h[j] = (1.0 - z[j]) * n[j] + z[j] * h_prev[j];
    }
    StepTrace {
        h_prev: h_prev.to_vec(),
        r,
        z,
        n,
        hn: gh[2 * hd..].to_vec(),
        h,
    }
}

/// One recurrent step.
pub fn gru_step(x: &[f64], h_prev: &[f64], params: &GruParams) -> Result<Vec<f64>> {
    if x.len() != params.input() || h_prev.len() != params.hidden() {
        return Err(Error::Shape(format!(
            "gru step expects input {} and state {}, got {} and {}",
            params.input(),
            params.hidden(),
            x.len(),
            h_prev.len()
        )));
    }
    if !x.iter().chain(h_prev).all(|v| v.is_finite()) {
        return Err(Error::NonFinite("gru step input".into()));
    }
    Ok(step_traced(x, h_prev, params).h)
}

/// Scans `order` positions of `x` from a zero state.
pub(crate) fn scan(x: &Tensor, p: &GruParams, order: impl Iterator<Item = usize>) -> Vec<StepTrace> {
    let mut h = vec![0.0; p.hidden()];
    order
        .map(|t| {
            let tr = step_traced(x.row(t), &h, p);
            h.clone_from(&tr.h);
            tr
        })
        .collect()
}

pub(crate) struct GruRun {
    pub z: Tensor,
    pub fwd: Vec<StepTrace>,
    /// In scan order: element `s` is position `T - 1 - s`.
    pub bwd: Option<Vec<StepTrace>>,
}

pub(crate) fn run_traced(x: &Tensor, fwd: &GruParams, bwd: Option<&GruParams>) -> Result<GruRun> {
    let t_len = x.rows();
    if t_len == 0 {
        return Err(Error::Shape("recurrent pass over an empty sequence".into()));
    }
    if x.cols() != fwd.input() || bwd.is_some_and(|b| b.input() != x.cols()) {
        return Err(Error::Shape(format!(
            "input width {} does not match recurrent input {}",
            x.cols(),
            fwd.input()
        )));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("recurrent input".into()));
    }
    let hd = fwd.hidden();
    let fwd_trace = scan(x, fwd, 0..t_len);
    let bwd_trace = bwd.map(|b| scan(x, b, (0..t_len).rev()));
    let width = hd + bwd.map_or(0, |b| b.hidden());
    let mut z = Tensor::zeros(t_len, width);
    for (t, tr) in fwd_trace.iter().enumerate() {
        z.row_mut(t)[..hd].copy_from_slice(&tr.h);
    }
    if let Some(bt) = &bwd_trace {
        for (s, tr) in bt.iter().enumerate() {
            z.row_mut(t_len - 1 - s)[hd..].copy_from_slice(&tr.h);
        }
    }
    Ok(GruRun {
        z,
        fwd: fwd_trace,
        bwd: bwd_trace,
    })
}

/// Hidden states for every position. With a backward cell, row `t` is the
/// forward state at `t` followed by the backward state at `t`.
pub fn run_gru(x: &Tensor, fwd: &GruParams, bwd: Option<&GruParams>) -> Result<Tensor> {
    run_traced(x, fwd, bwd).map(|r| r.z)
}

/// Backpropagates through one scan. `dh_out[s]` is the loss gradient with
/// respect to the state emitted at scan step `s`; `positions[s]` is the input
/// row consumed at that step. Accumulates parameter gradients into `grad`
/// and input gradients into `dx`.
pub(crate) fn scan_backward(
    trace: &[StepTrace],
    positions: &[usize],
    dh_out: &[Vec<f64>],
    x: &Tensor,
    p: &GruParams,
    grad: &mut GruParams,
    dx: &mut Tensor,
) {
    let hd = p.hidden();
    let mut carry = vec![0.0; hd];
    let mut da_i = vec![0.0; 3 * hd];
    let mut da_h = vec![0.0; 3 * hd];
    for s in (0..trace.len()).rev() {
        let tr = &trace[s];
        let t = positions[s];
        let dh: Vec<f64> = dh_out[s].iter().zip(&carry).map(|(a, b)| a + b).collect();
        let mut dh_prev = vec![0.0; hd];
        for j in 0..hd {
            let (r, z, n) = (tr.r[j], tr.z[j], tr.n[j]);
            let dn = dh[j] * (1.0 - z);
            let dz = dh[j] * (tr.h_prev[j] - n);
            dh_prev[j] = dh[j] * z;
            let dn_pre = dn * (1.0 - n * n);
            let dr = dn_pre * tr.hn[j];
            let dr_pre = dr * r * (1.0 - r);
            let dz_pre = dz * z * (1.0 - z);
            da_i[j] = dr_pre;
            da_i[hd + j] = dz_pre;
            da_i[2 * hd + j] = dn_pre;
            da_h[j] = dr_pre;
            da_h[hd + j] = dz_pre;
            da_h[2 * hd + j] = dn_pre * r;
        }
        grad.w_ih.add_outer(&da_i, x.row(t));
        grad.w_hh.add_outer(&da_h, &tr.h_prev);
        for (g, d) in grad.b_ih.as_mut_slice().iter_mut().zip(&da_i) {
            *g += d;
        }
        for (g, d) in grad.b_hh.as_mut_slice().iter_mut().zip(&da_h) {
            *g += d;
        }
        p.w_ih.matvec_t_acc(&da_i, dx.row_mut(t));
        p.w_hh.matvec_t_acc(&da_h, &mut dh_prev);
        carry = dh_prev;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_a_fixed_point() {
        let p = GruParams::zeros(3, 2);
        let h = gru_step(&[0.0; 3], &[0.0; 2], &p).unwrap();
        assert_eq!(h, vec![0.0, 0.0]);
    }

    #[test]
    fn candidate_equal_to_state_is_a_fixed_point() {
        // zero weights with candidate bias atanh(h*) make n == h* for any gates
        let hs = [0.3, -0.6];
        let mut p = GruParams::zeros(2, 2);
        p.b_ih.as_mut_slice()[4] = f64::atanh(hs[0]);
        p.b_ih.as_mut_slice()[5] = f64::atanh(hs[1]);
        p.b_ih.as_mut_slice()[2] = 1.7;
        let h = gru_step(&[0.0, 0.0], &hs, &p).unwrap();
        for (a, b) in h.iter().zip(&hs) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        let p = GruParams::zeros(2, 2);
        assert!(matches!(
            gru_step(&[f64::NAN, 0.0], &[0.0, 0.0], &p),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(gru_step(&[0.0], &[0.0, 0.0], &p), Err(Error::Shape(_))));
        assert!(run_gru(&Tensor::zeros(0, 2), &p, None).is_err());
    }
}
