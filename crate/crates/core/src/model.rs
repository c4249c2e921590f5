//! The link predictor: optional GNN over node features and/or trainable
//! node embeddings, optional heuristic embeddings, and an MLP on top.
//!
//! ```text
//! h⁰_i   = x_i | e_i | [x_i, e_i]
//! hˡ     = mean-aggregate(hˡ⁻¹) · Wˡ          (ReLU + dropout between layers)
//! h_vu   = COMBINE(hᴸ_v, hᴸ_u)
//! e_vu   = [emb_CN(v,u), emb_AA(v,u), ...]
//! ŷ_vu   = MLP([h_vu, e_vu])
//! ```
//!
//! [`ModelBundle::backward`] is the exact reverse of [`ModelBundle::forward`]
//! for this architecture and nothing else.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::HeuristicEncoder;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::heuristics::ScoreMatrix;
use crate::nn::layers::{add_into, dropout_backward, relu, relu_backward};
use crate::nn::{
    combine, combine_backward, dropout, init_params, CombineMode, GcnLayer, InitScheme, Linear, Param, Tensor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Variant {
    He,
    GnnX,
    GnnNe,
    GnnXne,
    GnnXHe,
    GnnNeHe,
    GnnXneHe,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::He,
        Variant::GnnX,
        Variant::GnnNe,
        Variant::GnnXne,
        Variant::GnnXHe,
        Variant::GnnNeHe,
        Variant::GnnXneHe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::He => "HE",
            Variant::GnnX => "GNN_X",
            Variant::GnnNe => "GNN_NE",
            Variant::GnnXne => "GNN_XNE",
            Variant::GnnXHe => "GNN_X_HE",
            Variant::GnnNeHe => "GNN_NE_HE",
            Variant::GnnXneHe => "GNN_XNE_HE",
        }
    }

    pub fn uses_gnn(self) -> bool {
        self != Variant::He
    }

    pub fn uses_features(self) -> bool {
        matches!(
            self,
            Variant::GnnX | Variant::GnnXne | Variant::GnnXHe | Variant::GnnXneHe
        )
    }

    pub fn uses_node_embeddings(self) -> bool {
        matches!(
            self,
            Variant::GnnNe | Variant::GnnXne | Variant::GnnNeHe | Variant::GnnXneHe
        )
    }

    pub fn uses_heuristics(self) -> bool {
        matches!(
            self,
            Variant::He | Variant::GnnXHe | Variant::GnnNeHe | Variant::GnnXneHe
        )
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            let valid: Vec<_> = Variant::ALL.iter().map(|v| v.name()).collect();
            Error::Config(format!("unknown variant {s:?}; valid: {}", valid.join(", ")))
        })
    }
}

impl TryFrom<String> for Variant {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Variant> for String {
    fn from(v: Variant) -> String {
        v.name().to_string()
    }
}

/// Layer sizes for [`ModelBundle::build`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelDims {
    pub gnn_layers: usize,
    pub hidden_dim: usize,
    pub node_emb_dim: usize,
    pub predictor_layers: usize,
    pub predictor_hidden: usize,
    pub combine: CombineMode,
    pub dropout: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub variant: Variant,
    pub node_count: usize,
    pub combine: CombineMode,
    pub dropout: f64,
    /// Fixed (non-trainable) node features.
    pub features: Option<Tensor>,
    pub node_embedding: Option<Param>,
    pub gcn: Vec<GcnLayer>,
    pub encoder: Option<HeuristicEncoder>,
    pub predictor: Vec<Linear>,
}

struct GnnCache {
    input: Tensor,
    agg: Tensor,
    pre: Tensor,
    mask: Option<Vec<f64>>,
}

struct MlpCache {
    input: Tensor,
    pre: Tensor,
    mask: Option<Vec<f64>>,
}

/// Activations recorded by [`ModelBundle::forward`] for the backward pass.
pub struct Tape {
    pairs: Vec<(NodeId, NodeId)>,
    gnn: Vec<GnnCache>,
    reps: Option<Tensor>,
    heuristic_indices: Vec<Vec<usize>>,
    mlp: Vec<MlpCache>,
}

impl ModelBundle {
    /// Allocates exactly the parameters `variant` needs.
    ///
    /// Initialization draws from `rng` in a fixed order: node embeddings,
    /// GNN weights, predictor layers. `encoder` tables are expected to be
    /// initialized already.
    pub fn build<R: Rng + ?Sized>(
        variant: Variant,
        node_count: usize,
        dims: &ModelDims,
        features: Option<Tensor>,
        encoder: Option<HeuristicEncoder>,
        rng: &mut R,
    ) -> Result<Self> {
        if variant.uses_features() {
            match &features {
                None => return Err(Error::Config(format!("variant {variant} needs node features"))),
                Some(x) if x.rows != node_count => {
                    return Err(Error::Shape(format!(
                        "feature matrix has {} rows for {node_count} nodes",
                        x.rows
                    )))
                }
                _ => {}
            }
        }
        let features = if variant.uses_features() { features } else { None };
        if variant.uses_heuristics() && encoder.as_ref().is_none_or(|e| e.specs.is_empty()) {
            return Err(Error::Config(format!("variant {variant} needs at least one heuristic")));
        }
        let encoder = if variant.uses_heuristics() { encoder } else { None };
        if variant.uses_gnn() && dims.gnn_layers == 0 {
            return Err(Error::Config("GNN variants need at least one GNN layer".into()));
        }
        if dims.predictor_layers == 0 {
            return Err(Error::Config("predictor needs at least one layer".into()));
        }

        let node_embedding = variant.uses_node_embeddings().then(|| {
            Param::table(
                "node_embedding",
                init_params(node_count, dims.node_emb_dim, InitScheme::Xavier, rng),
            )
        });
        let mut gcn = Vec::new();
        let mut rep_dim = 0;
        if variant.uses_gnn() {
            let mut width =
                features.as_ref().map_or(0, |x| x.cols) + node_embedding.as_ref().map_or(0, |e| e.value.cols);
            for l in 0..dims.gnn_layers {
                let scheme = if l + 1 < dims.gnn_layers {
                    InitScheme::He
                } else {
                    InitScheme::Xavier
                };
                let w = init_params(width, dims.hidden_dim, scheme, rng);
                gcn.push(GcnLayer::new(Param::new(format!("gcn.{l}.weight"), w)));
                width = dims.hidden_dim;
            }
            rep_dim = dims.combine.output_dim(dims.hidden_dim);
        }
        let mut width = rep_dim + encoder.as_ref().map_or(0, |e| e.width());
        let mut predictor = Vec::new();
        for k in 0..dims.predictor_layers {
            let last = k + 1 == dims.predictor_layers;
            let out = if last { 1 } else { dims.predictor_hidden };
            let scheme = if last { InitScheme::Xavier } else { InitScheme::He };
            predictor.push(Linear {
                weight: Param::new(format!("predictor.{k}.weight"), init_params(width, out, scheme, rng)),
                bias: Param::new(format!("predictor.{k}.bias"), Tensor::zeros(1, out)),
            });
            width = out;
        }
        Ok(Self {
            variant,
            node_count,
            combine: dims.combine,
            dropout: dims.dropout,
            features,
            node_embedding,
            gcn,
            encoder,
            predictor,
        })
    }

    /// Trainable parameters in a stable order.
    pub fn params(&self) -> Vec<&Param> {
        let mut out: Vec<&Param> = Vec::new();
        out.extend(self.node_embedding.iter());
        out.extend(self.gcn.iter().map(|l| &l.weight));
        if let Some(enc) = &self.encoder {
            out.extend(enc.tables.iter());
        }
        for lin in &self.predictor {
            out.push(&lin.weight);
            out.push(&lin.bias);
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out: Vec<&mut Param> = Vec::new();
        out.extend(self.node_embedding.iter_mut());
        out.extend(self.gcn.iter_mut().map(|l| &mut l.weight));
        if let Some(enc) = &mut self.encoder {
            out.extend(enc.tables.iter_mut());
        }
        for lin in &mut self.predictor {
            out.push(&mut lin.weight);
            out.push(&mut lin.bias);
        }
        out
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.params().iter().map(|p| p.name.clone()).collect()
    }

    pub fn zero_grad(&mut self) {
        self.params_mut().into_iter().for_each(Param::zero_grad);
    }

    fn input_representation(&self) -> Result<Tensor> {
        match (&self.features, &self.node_embedding) {
            (Some(x), Some(e)) => Tensor::hconcat(x, &e.value),
            (Some(x), None) => Ok(x.clone()),
            (None, Some(e)) => Ok(e.value.clone()),
            (None, None) => Err(Error::Config("GNN has no input".into())),
        }
    }

    /// Final-layer node representations for every node.
    pub fn node_representations(&self, g: &Graph) -> Result<Tensor> {
        Ok(self.propagate::<rand_chacha::ChaCha8Rng>(g, None)?.0)
    }

    fn propagate<R: Rng>(&self, g: &Graph, mut rng: Option<&mut R>) -> Result<(Tensor, Vec<GnnCache>)> {
        if g.node_count() != self.node_count {
            return Err(Error::Shape(format!(
                "model built for {} nodes, graph has {}",
                self.node_count,
                g.node_count()
            )));
        }
        let mut h = self.input_representation()?;
        let mut caches = Vec::with_capacity(self.gcn.len());
        let last = self.gcn.len() - 1;
        for (l, layer) in self.gcn.iter().enumerate() {
            let (agg, pre) = layer.forward(g, &h)?;
            let input = std::mem::replace(&mut h, Tensor::zeros(0, 0));
            let mut mask = None;
            h = if l < last {
                let act = relu(&pre);
                match rng.as_deref_mut() {
                    Some(r) => {
                        let (out, m) = dropout(&act, self.dropout, r, true);
                        mask = m;
                        out
                    }
                    None => act,
                }
            } else {
                pre.clone()
            };
            caches.push(GnnCache { input, agg, pre, mask });
        }
        Ok((h, caches))
    }

    /// Logits for `pairs`. Dropout is active iff `rng` is given.
    ///
    /// `heuristics` must hold one row per pair in encoder kind order when the
    /// variant uses heuristics.
    pub fn forward<R: Rng>(
        &self,
        g: &Graph,
        pairs: &[(NodeId, NodeId)],
        heuristics: Option<&ScoreMatrix>,
        mut rng: Option<&mut R>,
    ) -> Result<(Vec<f64>, Tape)> {
        let (reps, gnn) = if self.variant.uses_gnn() {
            let (h, c) = self.propagate(g, rng.as_deref_mut())?;
            (Some(h), c)
        } else {
            (None, Vec::new())
        };
        for &(v, u) in pairs {
            if v as usize >= self.node_count || u as usize >= self.node_count {
                return Err(Error::Data(format!("pair ({v}, {u}) out of range")));
            }
        }

        let pair_rep = reps.as_ref().map(|h| {
            let width = self.combine.output_dim(h.cols);
            let mut out = Tensor::zeros(pairs.len(), width);
            for (i, &(v, u)) in pairs.iter().enumerate() {
                out.row_mut(i)
                    .copy_from_slice(&combine(h.row(v as usize), h.row(u as usize), self.combine));
            }
            out
        });
        let (heur_emb, heuristic_indices) = match &self.encoder {
            Some(enc) => {
                let m = heuristics.ok_or_else(|| Error::Config("heuristic values required".into()))?;
                if m.rows() != pairs.len() || m.kinds != enc.kinds() {
                    return Err(Error::Shape(format!(
                        "heuristic matrix {}x{:?} does not match {} pairs and kinds {:?}",
                        m.rows(),
                        m.kinds,
                        pairs.len(),
                        enc.kinds()
                    )));
                }
                let rows: Vec<&[f64]> = (0..m.rows()).map(|i| m.row(i)).collect();
                let (t, idx) = enc.forward(&rows);
                (Some(t), idx)
            }
            None => (None, Vec::new()),
        };
        let mut x = match (pair_rep, heur_emb) {
            (Some(a), Some(b)) => Tensor::hconcat(&a, &b)?,
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(Error::Config("model has no pair input".into())),
        };

        let mut mlp = Vec::with_capacity(self.predictor.len());
        let last = self.predictor.len() - 1;
        for (k, lin) in self.predictor.iter().enumerate() {
            let pre = lin.forward(&x)?;
            let input = std::mem::replace(&mut x, Tensor::zeros(0, 0));
            let mut mask = None;
            x = if k < last {
                let act = relu(&pre);
                match rng.as_deref_mut() {
                    Some(r) => {
                        let (out, m) = dropout(&act, self.dropout, r, true);
                        mask = m;
                        out
                    }
                    None => act,
                }
            } else {
                pre.clone()
            };
            mlp.push(MlpCache { input, pre, mask });
        }
        let logits = x.data;
        let tape = Tape {
            pairs: pairs.to_vec(),
            gnn,
            reps,
            heuristic_indices,
            mlp,
        };
        Ok((logits, tape))
    }

    /// Accumulates `∂loss/∂θ` into every parameter's `grad` given
    /// `∂loss/∂logit` per pair.
    pub fn backward(&mut self, g: &Graph, tape: &Tape, d_logits: &[f64]) -> Result<()> {
        if d_logits.len() != tape.pairs.len() {
            return Err(Error::Shape(format!(
                "{} logit gradients for {} pairs",
                d_logits.len(),
                tape.pairs.len()
            )));
        }
        let mut d = Tensor::from_vec(d_logits.len(), 1, d_logits.to_vec())?;
        let last = self.predictor.len() - 1;
        for k in (0..self.predictor.len()).rev() {
            let cache = &tape.mlp[k];
            if k < last {
                d = dropout_backward(cache.mask.as_deref(), d);
                d = relu_backward(&cache.pre, &d);
            }
            d = self.predictor[k].backward(&cache.input, &d)?;
        }

        let rep_width = tape.reps.as_ref().map_or(0, |h| self.combine.output_dim(h.cols));
        if let Some(enc) = &mut self.encoder {
            let d_heur = d.column_slice(rep_width, enc.width());
            enc.backward(&tape.heuristic_indices, &d_heur);
        }
        let Some(reps) = &tape.reps else {
            return Ok(());
        };

        let mut d_h = Tensor::zeros(reps.rows, reps.cols);
        for (i, &(v, u)) in tape.pairs.iter().enumerate() {
            let (dv, du) = combine_backward(
                reps.row(v as usize),
                reps.row(u as usize),
                &d.row(i)[..rep_width],
                self.combine,
            );
            for (acc, x) in d_h.row_mut(v as usize).iter_mut().zip(dv) {
                *acc += x;
            }
            for (acc, x) in d_h.row_mut(u as usize).iter_mut().zip(du) {
                *acc += x;
            }
        }
        let last = self.gcn.len() - 1;
        for l in (0..self.gcn.len()).rev() {
            let cache = &tape.gnn[l];
            if l < last {
                d_h = dropout_backward(cache.mask.as_deref(), d_h);
                d_h = relu_backward(&cache.pre, &d_h);
            }
            debug_assert_eq!(cache.input.cols, self.gcn[l].weight.value.rows);
            d_h = self.gcn[l].backward(g, &cache.agg, &d_h)?;
        }
        if let Some(emb) = &mut self.node_embedding {
            let offset = self.features.as_ref().map_or(0, |x| x.cols);
            let d_emb = d_h.column_slice(offset, emb.value.cols);
            add_into(&mut emb.grad, &d_emb);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{fit, EncoderConfig};
    use crate::graph::build_graph;
    use crate::heuristics::{HeuristicConfig, HeuristicKind, Scorer};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dims() -> ModelDims {
        ModelDims {
            gnn_layers: 2,
            hidden_dim: 4,
            node_emb_dim: 3,
            predictor_layers: 2,
            predictor_hidden: 5,
            combine: CombineMode::Hadamard,
            dropout: 0.0,
        }
    }

    fn encoder(g: &Graph) -> HeuristicEncoder {
        let s = Scorer::new(g, &[HeuristicKind::CommonNeighbors], HeuristicConfig::default()).unwrap();
        let m = s.score_pairs(&[(0, 1), (0, 2)], &[HeuristicKind::CommonNeighbors], true);
        let specs = fit(
            &m.kinds,
            &[m.column(0)],
            &EncoderConfig {
                dim_h: 2,
                ..Default::default()
            },
            &HeuristicConfig::default(),
        )
        .unwrap();
        HeuristicEncoder::new(specs, &mut ChaCha8Rng::seed_from_u64(1))
    }

    #[test]
    fn variants_allocate_only_what_they_use() {
        let (g, _) = build_graph(&[(0, 1), (1, 2)], 3).unwrap();
        let x = Tensor::zeros(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let he = ModelBundle::build(Variant::He, 3, &dims(), Some(x.clone()), Some(encoder(&g)), &mut rng).unwrap();
        assert!(he.gcn.is_empty() && he.node_embedding.is_none() && he.features.is_none());
        let ne = ModelBundle::build(Variant::GnnNe, 3, &dims(), None, Some(encoder(&g)), &mut rng).unwrap();
        assert!(ne.encoder.is_none() && ne.node_embedding.is_some());
        let xne = ModelBundle::build(Variant::GnnXne, 3, &dims(), Some(x), None, &mut rng).unwrap();
        assert_eq!(xne.gcn[0].weight.value.rows, 2 + 3);
        assert!(ModelBundle::build(Variant::He, 3, &dims(), None, None, &mut rng).is_err());
        assert!(ModelBundle::build(Variant::GnnX, 3, &dims(), None, None, &mut rng).is_err());
    }

    #[test]
    fn variant_names_parse() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("GNN".parse::<Variant>().is_err());
    }

    #[test]
    fn hadamard_scores_are_symmetric() {
        let (g, _) = build_graph(&[(0, 1), (1, 2), (2, 3), (3, 0), (1, 4)], 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = ModelBundle::build(Variant::GnnNe, 5, &dims(), None, None, &mut rng).unwrap();
        let (a, _) = m.forward::<ChaCha8Rng>(&g, &[(0, 4), (2, 3)], None, None).unwrap();
        let (b, _) = m.forward::<ChaCha8Rng>(&g, &[(4, 0), (3, 2)], None, None).unwrap();
        assert_eq!(a, b);
    }
}
