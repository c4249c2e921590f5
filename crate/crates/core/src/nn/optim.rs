use serde::{Deserialize, Serialize};

use super::{Param, Tensor};

/// Exponential learning-rate decay: `lr_t = lr_0 · γ^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub base: f64,
    pub gamma: f64,
}

impl LrSchedule {
    pub fn lr(&self, epoch: usize) -> f64 {
        self.base * self.gamma.powi(epoch as i32)
    }
}

/// Scales every gradient by `max_norm / ‖g‖` when the global L2 norm
/// exceeds `max_norm`. Returns the norm before clipping.
pub fn clip_grad_norm(params: &mut [&mut Param], max_norm: f64) -> f64 {
    let norm = params.iter().map(|p| p.grad.norm_sq()).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for p in params.iter_mut() {
            p.grad.data.iter_mut().for_each(|g| *g *= scale);
        }
    }
    norm
}

/// Adam with per-parameter moment buffers.
///
/// Row-sparse parameters (embedding tables) are updated lazily: a row whose
/// gradient is entirely zero keeps its value and its moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
}

impl Adam {
    pub fn new(params: &[&Param]) -> Self {
        let zeros = |p: &&Param| Tensor::zeros(p.value.rows, p.value.cols);
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: params.iter().map(zeros).collect(),
            v: params.iter().map(zeros).collect(),
        }
    }

    pub fn update(&mut self, params: &mut [&mut Param], lr: f64) {
        assert_eq!(
            params.len(),
            self.m.len(),
            "optimizer built for a different parameter set"
        );
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        for ((p, m), v) in params.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            let cols = p.value.cols.max(1);
            let rows = p.value.rows;
            for r in 0..rows {
                let span = r * cols..(r + 1) * cols;
                let g = &p.grad.data[span.clone()];
                if p.row_sparse && g.iter().all(|&x| x == 0.0) {
                    continue;
                }
                let w = &mut p.value.data[span.clone()];
                let mr = &mut m.data[span.clone()];
                let vr = &mut v.data[span];
                for k in 0..g.len() {
                    mr[k] = b1 * mr[k] + (1.0 - b1) * g[k];
                    vr[k] = b2 * vr[k] + (1.0 - b2) * g[k] * g[k];
                    let mhat = mr[k] / c1;
                    let vhat = vr[k] / c2;
                    w[k] -= lr * mhat / (vhat.sqrt() + eps);
                }
            }
        }
    }
}
