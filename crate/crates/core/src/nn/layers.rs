use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Param, Tensor};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::par;

/// `ĥ_i = mean{h_j : j ∈ Γ_i ∪ {i}}`; an isolated node keeps its own row.
///
/// The self term is added first, then neighbors in ascending id order.
pub fn mean_aggregate(g: &Graph, h: &Tensor) -> Result<Tensor> {
    if h.rows != g.node_count() {
        return Err(Error::Shape(format!(
            "aggregation input has {} rows for {} nodes",
            h.rows,
            g.node_count()
        )));
    }
    let mut out = Tensor::zeros(h.rows, h.cols);
    par::for_each_row(&mut out.data, h.cols, |i, row| {
        row.copy_from_slice(h.row(i));
        let nbrs = g.neighbors(i as NodeId);
        for &j in nbrs {
            for (o, &x) in row.iter_mut().zip(h.row(j as usize)) {
                *o += x;
            }
        }
        let scale = (nbrs.len() + 1) as f64;
        row.iter_mut().for_each(|o| *o /= scale);
    });
    Ok(out)
}

/// Gradient of [`mean_aggregate`] with respect to its input.
///
/// Row `j` collects `d_out[i] / (deg(i) + 1)` from every `i` whose
/// aggregation set contains `j`; on an undirected graph that is `j` itself
/// and its neighbors.
pub fn mean_aggregate_backward(g: &Graph, d_out: &Tensor) -> Tensor {
    let mut d_in = Tensor::zeros(d_out.rows, d_out.cols);
    par::for_each_row(&mut d_in.data, d_out.cols, |j, row| {
        let own = (g.degree(j as NodeId) + 1) as f64;
        for (o, &x) in row.iter_mut().zip(d_out.row(j)) {
            *o = x / own;
        }
        for &i in g.neighbors(j as NodeId) {
            let scale = (g.degree(i) + 1) as f64;
            for (o, &x) in row.iter_mut().zip(d_out.row(i as usize)) {
                *o += x / scale;
            }
        }
    });
    d_in
}

/// One aggregation layer: mean over the closed neighborhood, then `· W`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnLayer {
    pub weight: Param,
}

impl GcnLayer {
    pub fn new(weight: Param) -> Self {
        Self { weight }
    }

    /// Returns `(aggregated, output)`; `aggregated` is needed by backward.
    pub fn forward(&self, g: &Graph, h_in: &Tensor) -> Result<(Tensor, Tensor)> {
        if h_in.cols != self.weight.value.rows {
            return Err(Error::Shape(format!(
                "layer expects width {}, got {}",
                self.weight.value.rows, h_in.cols
            )));
        }
        let agg = mean_aggregate(g, h_in)?;
        let out = agg.matmul(&self.weight.value)?;
        Ok((agg, out))
    }

    /// Accumulates the weight gradient and returns the input gradient.
    pub fn backward(&mut self, g: &Graph, agg: &Tensor, d_out: &Tensor) -> Result<Tensor> {
        let dw = agg.t_matmul(d_out)?;
        add_into(&mut self.weight.grad, &dw);
        let d_agg = d_out.matmul_t(&self.weight.value)?;
        Ok(mean_aggregate_backward(g, &d_agg))
    }
}

/// Forward pass of one layer without caching.
pub fn gcn_forward(g: &Graph, h_in: &Tensor, layer: &GcnLayer) -> Result<Tensor> {
    Ok(layer.forward(g, h_in)?.1)
}

/// Fully connected layer `x · W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Param,
    pub bias: Param,
}

impl Linear {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut z = x.matmul(&self.weight.value)?;
        let b = &self.bias.value.data;
        par::for_each_row(&mut z.data, b.len(), |_, row| {
            row.iter_mut().zip(b).for_each(|(o, &bi)| *o += bi);
        });
        Ok(z)
    }

    pub fn backward(&mut self, x: &Tensor, d_out: &Tensor) -> Result<Tensor> {
        let dw = x.t_matmul(d_out)?;
        add_into(&mut self.weight.grad, &dw);
        for i in 0..d_out.rows {
            for (g, &d) in self.bias.grad.data.iter_mut().zip(d_out.row(i)) {
                *g += d;
            }
        }
        d_out.matmul_t(&self.weight.value)
    }
}

pub(crate) fn add_into(acc: &mut Tensor, x: &Tensor) {
    acc.data.iter_mut().zip(&x.data).for_each(|(a, &b)| *a += b);
}

pub fn relu(x: &Tensor) -> Tensor {
    Tensor {
        rows: x.rows,
        cols: x.cols,
        data: x.data.iter().map(|&v| v.max(0.0)).collect(),
    }
}

/// Zeroes gradient entries where the pre-activation was not positive.
pub fn relu_backward(pre: &Tensor, d_out: &Tensor) -> Tensor {
    Tensor {
        rows: d_out.rows,
        cols: d_out.cols,
        data: pre
            .data
            .iter()
            .zip(&d_out.data)
            .map(|(&p, &d)| if p > 0.0 { d } else { 0.0 })
            .collect(),
    }
}

/// Inverted dropout. Returns the output and the per-entry scale mask
/// (`None` when the layer is the identity).
pub fn dropout<R: Rng + ?Sized>(x: &Tensor, rate: f64, rng: &mut R, training: bool) -> (Tensor, Option<Vec<f64>>) {
    if !training || rate <= 0.0 {
        return (x.clone(), None);
    }
    let keep = 1.0 - rate;
    let mask: Vec<f64> = (0..x.data.len())
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { 1.0 / keep })
        .collect();
    let data = x.data.iter().zip(&mask).map(|(a, m)| a * m).collect();
    (
        Tensor {
            rows: x.rows,
            cols: x.cols,
            data,
        },
        Some(mask),
    )
}

pub fn dropout_backward(mask: Option<&[f64]>, d_out: Tensor) -> Tensor {
    match mask {
        None => d_out,
        Some(m) => Tensor {
            rows: d_out.rows,
            cols: d_out.cols,
            data: d_out.data.iter().zip(m).map(|(d, s)| d * s).collect(),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineMode {
    Hadamard,
    Concat,
}

impl CombineMode {
    pub fn output_dim(self, dim: usize) -> usize {
        match self {
            CombineMode::Hadamard => dim,
            CombineMode::Concat => 2 * dim,
        }
    }
}

/// Pair representation from two node representations.
pub fn combine(hv: &[f64], hu: &[f64], mode: CombineMode) -> Vec<f64> {
    match mode {
        CombineMode::Hadamard => hv.iter().zip(hu).map(|(a, b)| a * b).collect(),
        CombineMode::Concat => hv.iter().chain(hu).copied().collect(),
    }
}

/// Gradients of [`combine`] with respect to `hv` and `hu`.
pub fn combine_backward(hv: &[f64], hu: &[f64], d: &[f64], mode: CombineMode) -> (Vec<f64>, Vec<f64>) {
    match mode {
        CombineMode::Hadamard => (
            d.iter().zip(hu).map(|(g, b)| g * b).collect(),
            d.iter().zip(hv).map(|(g, a)| g * a).collect(),
        ),
        CombineMode::Concat => {
            let k = hv.len();
            (d[..k].to_vec(), d[k..].to_vec())
        }
    }
}
