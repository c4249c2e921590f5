//! Training loop: shuffled positive batches, fresh 1:1 negatives per batch,
//! BCE loss, clipped Adam steps, per-epoch validation with early stopping.
//!
//! Message passing always runs on the training graph. Heuristics for
//! training positives are computed with the target edge masked out.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::encoding::{fit as fit_bins, EncoderConfig, HeuristicEncoder};
use crate::error::{Error, Result};
use crate::graph::{sample_negative_edges, EdgeSet, Graph, NegativeSampling, NodeId};
use crate::heuristics::{HeuristicConfig, HeuristicKind, ScoreMatrix, Scorer};
use crate::io::DatasetSplit;
use crate::metrics;
use crate::model::{ModelBundle, ModelDims, Variant};
use crate::nn::{bce_with_logits, clip_grad_norm, Adam, CombineMode, LrSchedule, Tensor};
use crate::rng::{stream, Rng, Stream};

/// Validation metric driving early stopping and best-model selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ValidMetric {
    Auc,
    Mrr,
    Hits(usize),
}

impl fmt::Display for ValidMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidMetric::Auc => f.write_str("auc"),
            ValidMetric::Mrr => f.write_str("mrr"),
            ValidMetric::Hits(k) => write!(f, "hits@{k}"),
        }
    }
}

impl FromStr for ValidMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc" => Ok(ValidMetric::Auc),
            "mrr" => Ok(ValidMetric::Mrr),
            _ => s
                .strip_prefix("hits@")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k > 0)
                .map(ValidMetric::Hits)
                .ok_or_else(|| Error::Config(format!("unknown metric {s:?}; valid: auc, mrr, hits@<K>"))),
        }
    }
}

impl TryFrom<String> for ValidMetric {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ValidMetric> for String {
    fn from(m: ValidMetric) -> String {
        m.to_string()
    }
}

impl ValidMetric {
    pub fn compute(self, pos: &[f64], neg: &[f64]) -> Result<f64> {
        match self {
            ValidMetric::Auc => metrics::auc(pos, neg),
            ValidMetric::Mrr => metrics::mrr(pos, neg),
            ValidMetric::Hits(k) => metrics::hits_at_k(pos, neg, k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: Variant,
    pub gnn_layers: usize,
    pub hidden_dim: usize,
    pub node_emb_dim: usize,
    /// Width of the random node features generated when a variant needs X
    /// and no feature file is supplied.
    pub random_feature_dim: usize,
    pub predictor_layers: usize,
    pub predictor_hidden: usize,
    pub combine: CombineMode,
    pub heuristics: Vec<HeuristicKind>,
    pub heuristic_dim: usize,
    pub bins: usize,
    pub int_cap: usize,
    pub heuristic_params: HeuristicConfig,
    pub lr: f64,
    pub lr_decay: f64,
    pub dropout: f64,
    pub clip_norm: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub patience: usize,
    pub valid_metric: ValidMetric,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::preset("ogbl-ddi").expect("known preset")
    }
}

impl ModelConfig {
    pub const PRESETS: [&'static str; 4] = ["ogbl-ddi", "ogbl-collab", "ogbl-ppa", "ogbl-citation2"];

    /// Reference per-dataset configurations. Hidden widths, epochs and the
    /// decay factor are not part of them and use the shared defaults.
    pub fn preset(name: &str) -> Result<Self> {
        use HeuristicKind::*;
        let base = ModelConfig {
            variant: Variant::GnnNe,
            gnn_layers: 2,
            hidden_dim: 256,
            node_emb_dim: 512,
            random_feature_dim: 64,
            predictor_layers: 4,
            predictor_hidden: 256,
            combine: CombineMode::Hadamard,
            heuristics: Vec::new(),
            heuristic_dim: 32,
            bins: 64,
            int_cap: 64,
            heuristic_params: HeuristicConfig::default(),
            lr: 0.003,
            lr_decay: 0.995,
            dropout: 0.3,
            clip_norm: 5.0,
            batch_size: 100_000,
            epochs: 100,
            patience: 20,
            valid_metric: ValidMetric::Auc,
            seed: 0,
        };
        Ok(match name {
            "ogbl-ddi" => base,
            "ogbl-collab" => ModelConfig {
                variant: Variant::GnnXHe,
                predictor_layers: 5,
                heuristics: vec![ShortestPath, CommonNeighbors, AdamicAdar],
                lr: 0.002,
                clip_norm: 10.0,
                batch_size: 70_000,
                ..base
            },
            "ogbl-ppa" => ModelConfig {
                predictor_layers: 3,
                node_emb_dim: 256,
                lr: 0.001,
                ..base
            },
            "ogbl-citation2" => ModelConfig {
                variant: Variant::GnnXHe,
                heuristics: vec![ShortestPath, AdamicAdar],
                lr: 0.001,
                dropout: 0.25,
                clip_norm: 10.0,
                batch_size: 15_000,
                ..base
            },
            _ => {
                return Err(Error::Config(format!(
                    "unknown preset {name:?}; valid: {}",
                    Self::PRESETS.join(", ")
                )))
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.variant.uses_heuristics() && self.heuristics.is_empty() {
            return bad(format!("variant {} needs at least one heuristic kind", self.variant));
        }
        if self.variant.uses_gnn() && self.gnn_layers == 0 {
            return bad(format!("variant {} needs gnn_layers >= 1", self.variant));
        }
        if self.predictor_layers == 0 {
            return bad("predictor_layers must be >= 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must be in [0, 1), got {}", self.dropout));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be finite and >= 0, got {}", self.lr));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad(format!("lr_decay must be in (0, 1], got {}", self.lr_decay));
        }
        if self.clip_norm < 0.0 {
            return bad(format!("clip_norm must be >= 0, got {}", self.clip_norm));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(k) = self.heuristics.iter().find(|k| !seen.insert(**k)) {
            return bad(format!("heuristic {k} listed twice"));
        }
        for (name, v) in [
            ("hidden_dim", self.hidden_dim),
            ("node_emb_dim", self.node_emb_dim),
            ("predictor_hidden", self.predictor_hidden),
            ("heuristic_dim", self.heuristic_dim),
        ] {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        self.heuristic_params.validate()
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            gnn_layers: self.gnn_layers,
            hidden_dim: self.hidden_dim,
            node_emb_dim: self.node_emb_dim,
            predictor_layers: self.predictor_layers,
            predictor_hidden: self.predictor_hidden,
            combine: self.combine,
            dropout: self.dropout,
        }
    }

    pub fn encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            bins: self.bins,
            int_cap: self.int_cap,
            dim_h: self.heuristic_dim,
        }
    }

    /// Heuristic kinds the model actually consumes.
    pub fn active_heuristics(&self) -> &[HeuristicKind] {
        if self.variant.uses_heuristics() {
            &self.heuristics
        } else {
            &[]
        }
    }

    pub fn schedule(&self) -> LrSchedule {
        LrSchedule {
            base: self.lr,
            gamma: self.lr_decay,
        }
    }
}

/// Unit-variance uniform noise features, drawn from the features stream.
pub fn random_features(node_count: usize, dim: usize, seed: u64) -> Tensor {
    let mut rng = stream(seed, Stream::Features);
    let a = 3f64.sqrt();
    let data = (0..node_count * dim).map(|_| rng.gen_range(-a..=a)).collect();
    Tensor::from_vec(node_count, dim, data).expect("shape matches")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub valid_metric: Option<f64>,
    pub lr: f64,
}

/// Everything needed to continue training bitwise-identically.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub model: ModelBundle,
    /// Snapshot with the best validation metric so far.
    pub best: ModelBundle,
    pub adam: Adam,
    /// Completed epochs.
    pub epoch: usize,
    pub best_epoch: usize,
    pub best_metric: Option<f64>,
    pub stale_epochs: usize,
    pub stopped_early: bool,
    pub sampling_rng: Rng,
    pub dropout_rng: Rng,
    pub shuffle_rng: Rng,
    pub log: Vec<EpochLog>,
}

impl TrainState {
    pub fn log_jsonl(&self) -> String {
        self.log
            .iter()
            .map(|e| serde_json::to_string(e).expect("log entry serializes") + "\n")
            .collect()
    }
}

/// Precomputed, read-only inputs shared by every epoch.
pub struct TrainContext<'a> {
    pub graph: &'a Graph,
    pub split: &'a DatasetSplit,
    pub cfg: &'a ModelConfig,
    exclusion: EdgeSet,
    scorer: Option<Scorer<'a>>,
    train_heuristics: Option<ScoreMatrix>,
}

impl<'a> TrainContext<'a> {
    /// `graph` is the message-passing graph built from `split.train_pos`.
    pub fn new(graph: &'a Graph, split: &'a DatasetSplit, cfg: &'a ModelConfig) -> Result<Self> {
        cfg.validate()?;
        split.validate(graph.node_count())?;
        if split.train_pos.is_empty() {
            return Err(Error::Data("no training positives".into()));
        }
        let kinds = cfg.active_heuristics();
        let (scorer, train_heuristics) = if kinds.is_empty() {
            (None, None)
        } else {
            let s = Scorer::new(graph, kinds, cfg.heuristic_params)?;
            let m = s.score_pairs(&split.train_pos, kinds, true);
            (Some(s), Some(m))
        };
        Ok(Self {
            graph,
            split,
            cfg,
            exclusion: split.all_positives(),
            scorer,
            train_heuristics,
        })
    }

    fn heuristics_for(&self, pairs: &[(NodeId, NodeId)]) -> Option<ScoreMatrix> {
        self.scorer
            .as_ref()
            .map(|s| s.score_pairs(pairs, self.cfg.active_heuristics(), true))
    }

    /// Fits bins on the training positives plus an equal number of sampled
    /// non-edges and initializes the tables from `init`.
    fn build_encoder(&self, init: &mut Rng) -> Result<Option<HeuristicEncoder>> {
        let Some(pos) = &self.train_heuristics else {
            return Ok(None);
        };
        let mut rng = stream(self.cfg.seed, Stream::Encoder);
        let want = self
            .split
            .train_pos
            .len()
            .min(self.graph.non_edge_count().saturating_sub(self.exclusion.len()));
        let negs = sample_negative_edges(self.graph, want, &mut rng, &self.exclusion, NegativeSampling::default())?;
        let neg = self.heuristics_for(&negs).expect("scorer present");
        let columns: Vec<Vec<f64>> = (0..pos.kinds.len())
            .map(|k| {
                let mut c = pos.column(k);
                c.extend(neg.column(k));
                c
            })
            .collect();
        let specs = fit_bins(
            &pos.kinds,
            &columns,
            &self.cfg.encoder_config(),
            &self.cfg.heuristic_params,
        )?;
        Ok(Some(HeuristicEncoder::new(specs, init)))
    }

    /// Fresh model and optimizer. Random features are generated when the
    /// variant needs X and `features` is `None`.
    pub fn init_state(&self, features: Option<Tensor>) -> Result<TrainState> {
        let cfg = self.cfg;
        let n = self.graph.node_count();
        let mut init = stream(cfg.seed, Stream::Init);
        let features = match (cfg.variant.uses_features(), features) {
            (false, _) => None,
            (true, Some(x)) => Some(x),
            (true, None) => {
                if cfg.random_feature_dim == 0 {
                    return Err(Error::Config(format!(
                        "variant {} needs node features or random_feature_dim >= 1",
                        cfg.variant
                    )));
                }
                Some(random_features(n, cfg.random_feature_dim, cfg.seed))
            }
        };
        let encoder = self.build_encoder(&mut init)?;
        let model = ModelBundle::build(cfg.variant, n, &cfg.dims(), features, encoder, &mut init)?;
        let adam = Adam::new(&model.params());
        Ok(TrainState {
            best: model.clone(),
            model,
            adam,
            epoch: 0,
            best_epoch: 0,
            best_metric: None,
            stale_epochs: 0,
            stopped_early: false,
            sampling_rng: stream(cfg.seed, Stream::Sampling),
            dropout_rng: stream(cfg.seed, Stream::Dropout),
            shuffle_rng: stream(cfg.seed, Stream::Shuffle),
            log: Vec::new(),
        })
    }

    /// One optimizer step on `pos` plus as many fresh negatives.
    /// Returns the batch loss.
    pub fn train_step(&self, state: &mut TrainState, pos: &[(NodeId, NodeId)], lr: f64) -> Result<f64> {
        let negs = sample_negative_edges(
            self.graph,
            pos.len(),
            &mut state.sampling_rng,
            &self.exclusion,
            NegativeSampling::default(),
        )?;
        let mut pairs = pos.to_vec();
        pairs.extend_from_slice(&negs);
        let mut labels = vec![1.0; pos.len()];
        labels.resize(pairs.len(), 0.0);
        let heur = self.heuristics_for(&pairs);

        let model = &mut state.model;
        model.zero_grad();
        let (logits, tape) = model.forward(self.graph, &pairs, heur.as_ref(), Some(&mut state.dropout_rng))?;
        let (loss, d_logits) = bce_with_logits(&logits, &labels)?;
        model.backward(self.graph, &tape, &d_logits)?;
        let mut params = model.params_mut();
        if self.cfg.clip_norm > 0.0 {
            clip_grad_norm(&mut params, self.cfg.clip_norm);
        }
        state.adam.update(&mut params, lr);
        Ok(loss)
    }

    /// One pass over the shuffled training positives; mean batch loss.
    pub fn train_epoch(&self, state: &mut TrainState) -> Result<f64> {
        let lr = self.cfg.schedule().lr(state.epoch);
        let mut order: Vec<(NodeId, NodeId)> = self.split.train_pos.clone();
        order.shuffle(&mut state.shuffle_rng);
        let mut total = 0.0;
        let mut batches = 0;
        for batch in order.chunks(self.cfg.batch_size) {
            total += self.train_step(state, batch, lr)?;
            batches += 1;
        }
        Ok(total / batches as f64)
    }

    /// Evaluation-mode logits with heuristics from the training graph.
    pub fn predict(&self, model: &ModelBundle, pairs: &[(NodeId, NodeId)]) -> Result<Vec<f64>> {
        let heur = self.heuristics_for(pairs);
        Ok(model.forward::<Rng>(self.graph, pairs, heur.as_ref(), None)?.0)
    }

    /// Validation metric for `model`, or `None` without validation pairs.
    pub fn validate(&self, model: &ModelBundle) -> Result<Option<f64>> {
        let (pos, neg) = (&self.split.valid_pos, &self.split.valid_neg);
        if pos.is_empty() || neg.is_empty() {
            return Ok(None);
        }
        let p = self.predict(model, pos)?;
        let q = self.predict(model, neg)?;
        self.cfg.valid_metric.compute(&p, &q).map(Some)
    }

    /// Trains one epoch, validates, updates the best snapshot and the
    /// early-stopping counter.
    pub fn run_epoch(&self, state: &mut TrainState) -> Result<()> {
        let lr = self.cfg.schedule().lr(state.epoch);
        let loss = self.train_epoch(state)?;
        state.epoch += 1;
        let metric = self.validate(&state.model)?;
        let improved = match (metric, state.best_metric) {
            (None, _) => true,
            (Some(_), None) => true,
            (Some(m), Some(b)) => m > b,
        };
        if improved {
            state.best = state.model.clone();
            state.best.zero_grad();
            state.best_epoch = state.epoch;
            state.best_metric = metric;
            state.stale_epochs = 0;
        } else {
            state.stale_epochs += 1;
            if self.cfg.patience > 0 && state.stale_epochs >= self.cfg.patience {
                state.stopped_early = true;
            }
        }
        state.log.push(EpochLog {
            epoch: state.epoch,
            loss,
            valid_metric: metric,
            lr,
        });
        Ok(())
    }

    /// Runs epochs until `cfg.epochs` or early stop.
    pub fn run(&self, state: &mut TrainState) -> Result<()> {
        while state.epoch < self.cfg.epochs && !state.stopped_early {
            self.run_epoch(state)?;
        }
        Ok(())
    }
}

/// Full loop from a fresh initialization.
pub fn fit(g: &Graph, split: &DatasetSplit, cfg: &ModelConfig, features: Option<Tensor>) -> Result<TrainState> {
    let ctx = TrainContext::new(g, split, cfg)?;
    let mut state = ctx.init_state(features)?;
    ctx.run(&mut state)?;
    Ok(state)
}

/// Scores `pairs` with `model` in evaluation mode. Heuristics, if the model
/// uses them, are computed on `g`, which should be the training graph.
pub fn predict_scores(
    g: &Graph,
    model: &ModelBundle,
    pairs: &[(NodeId, NodeId)],
    heuristic_params: &HeuristicConfig,
) -> Result<Vec<f64>> {
    let heur = match &model.encoder {
        Some(enc) => {
            let kinds = enc.kinds();
            Some(Scorer::new(g, &kinds, *heuristic_params)?.score_pairs(pairs, &kinds, true))
        }
        None => None,
    };
    Ok(model.forward::<Rng>(g, pairs, heur.as_ref(), None)?.0)
}
