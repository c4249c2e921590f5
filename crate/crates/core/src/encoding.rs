//! Heuristic encoding: heuristic values become indices into small trainable
//! embedding tables.
//!
//! Integer heuristics (CN, PA, SPD) use an identity vocabulary `0..=cap`
//! plus one overflow index. Float heuristics use `B` equal-width bins over
//! the range seen at fit time plus one out-of-range index. The top bin is
//! closed on the right, so the fitted maximum lands in bin `B - 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristics::{HeuristicConfig, HeuristicKind};
use crate::nn::{init_params, InitScheme, Param, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinMode {
    Integer,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub kind: HeuristicKind,
    pub mode: BinMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub int_cap: Option<usize>,
    /// Interior bin edges, strictly increasing, `B - 1` of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<f64>>,
    /// Fitted `[min, max]`; values outside map to the out-of-range index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    pub vocab_size: usize,
    pub dim_h: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Float bins `B`.
    pub bins: usize,
    /// Largest integer with its own embedding.
    pub int_cap: usize,
    /// Width of each heuristic embedding.
    pub dim_h: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            bins: 64,
            int_cap: 64,
            dim_h: 32,
        }
    }
}

/// Fits one [`BinSpec`] per kind from training-pair values.
///
/// SPD always gets `cap = spd_cap + 1` so its unreachable sentinel has a
/// dedicated index instead of sharing the overflow slot.
pub fn fit(
    kinds: &[HeuristicKind],
    values: &[Vec<f64>],
    cfg: &EncoderConfig,
    heuristics: &HeuristicConfig,
) -> Result<Vec<BinSpec>> {
    if kinds.len() != values.len() {
        return Err(Error::Shape(format!(
            "{} kinds but {} value columns",
            kinds.len(),
            values.len()
        )));
    }
    if cfg.bins == 0 {
        return Err(Error::Config("bins must be >= 1".into()));
    }
    kinds
        .iter()
        .zip(values)
        .map(|(&kind, column)| {
            if column.is_empty() {
                return Err(Error::Data(format!("no training values for heuristic {kind}")));
            }
            if kind.is_integer() {
                let cap = if kind == HeuristicKind::ShortestPath {
                    heuristics.spd_cap + 1
                } else {
                    cfg.int_cap
                };
                return Ok(BinSpec {
                    kind,
                    mode: BinMode::Integer,
                    int_cap: Some(cap),
                    boundaries: None,
                    range: None,
                    vocab_size: cap + 2,
                    dim_h: cfg.dim_h,
                });
            }
            let finite = column.iter().copied().filter(|x| x.is_finite());
            let lo = finite.clone().fold(f64::INFINITY, f64::min);
            let hi = finite.fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                return Err(Error::Data(format!("no finite training values for heuristic {kind}")));
            }
            let bins = if hi > lo { cfg.bins } else { 1 };
            let mut boundaries: Vec<f64> = (1..bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
            boundaries.dedup();
            let bins = boundaries.len() + 1;
            Ok(BinSpec {
                kind,
                mode: BinMode::Float,
                int_cap: None,
                boundaries: Some(boundaries),
                range: Some([lo, hi]),
                vocab_size: bins + 1,
                dim_h: cfg.dim_h,
            })
        })
        .collect()
}

/// Maps a value to an embedding index `< spec.vocab_size`.
pub fn encode(spec: &BinSpec, value: f64) -> usize {
    let out_of_range = spec.vocab_size - 1;
    match spec.mode {
        BinMode::Integer => {
            let cap = spec.int_cap.unwrap_or(spec.vocab_size - 2);
            if value.is_nan() {
                return out_of_range;
            }
            if value < 0.0 {
                return 0;
            }
            let r = value.round();
            if r > cap as f64 {
                cap + 1
            } else {
                r as usize
            }
        }
        BinMode::Float => {
            let [lo, hi] = spec.range.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
            if !(value >= lo && value <= hi) {
                return out_of_range;
            }
            let boundaries = spec.boundaries.as_deref().unwrap_or(&[]);
            boundaries.partition_point(|&b| b <= value)
        }
    }
}

/// Per-heuristic embedding tables in a fixed concatenation order.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicEncoder {
    pub specs: Vec<BinSpec>,
    pub tables: Vec<Param>,
}

impl HeuristicEncoder {
    pub fn new<R: Rng + ?Sized>(specs: Vec<BinSpec>, rng: &mut R) -> Self {
        let tables = specs
            .iter()
            .map(|s| {
                Param::table(
                    format!("heuristic.{}", s.kind),
                    init_params(s.vocab_size, s.dim_h, InitScheme::Xavier, rng),
                )
            })
            .collect();
        Self { specs, tables }
    }

    pub fn kinds(&self) -> Vec<HeuristicKind> {
        self.specs.iter().map(|s| s.kind).collect()
    }

    /// Total width of the concatenated embedding.
    pub fn width(&self) -> usize {
        self.specs.iter().map(|s| s.dim_h).sum()
    }

    pub fn indices(&self, values: &[f64]) -> Vec<usize> {
        self.specs.iter().zip(values).map(|(s, &v)| encode(s, v)).collect()
    }

    /// Concatenation of the selected table rows, in spec order.
    pub fn embed_pair(&self, values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width());
        for (table, idx) in self.tables.iter().zip(self.indices(values)) {
            out.extend_from_slice(table.value.row(idx));
        }
        out
    }

    /// Embeds a batch given as one value row per pair.
    pub fn forward(&self, rows: &[&[f64]]) -> (Tensor, Vec<Vec<usize>>) {
        let width = self.width();
        let mut out = Tensor::zeros(rows.len(), width);
        let mut all = Vec::with_capacity(rows.len());
        for (i, values) in rows.iter().enumerate() {
            let idx = self.indices(values);
            let mut offset = 0;
            for (table, &k) in self.tables.iter().zip(&idx) {
                let w = table.value.cols;
                out.row_mut(i)[offset..offset + w].copy_from_slice(table.value.row(k));
                offset += w;
            }
            all.push(idx);
        }
        (out, all)
    }

    /// Scatter-adds `d_out` rows into the selected table rows' gradients.
    pub fn backward(&mut self, indices: &[Vec<usize>], d_out: &Tensor) {
        for (i, idx) in indices.iter().enumerate() {
            let mut offset = 0;
            for (table, &k) in self.tables.iter_mut().zip(idx) {
                let w = table.value.cols;
                let src = &d_out.row(i)[offset..offset + w];
                for (g, &d) in table.grad.row_mut(k).iter_mut().zip(src) {
                    *g += d;
                }
                offset += w;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fit_one(kind: HeuristicKind, values: Vec<f64>) -> BinSpec {
        fit(
            &[kind],
            &[values],
            &EncoderConfig::default(),
            &HeuristicConfig::default(),
        )
        .unwrap()
        .remove(0)
    }

    #[test]
    fn integer_identity_and_overflow() {
        let spec = fit_one(HeuristicKind::CommonNeighbors, vec![0.0, 3.0, 7.0]);
        assert_eq!(spec.vocab_size, 66);
        assert_eq!(encode(&spec, 3.0), 3);
        assert_eq!(encode(&spec, 64.0), 64);
        assert_eq!(encode(&spec, 200.0), 65);
    }

    #[test]
    fn spd_sentinel_has_its_own_index() {
        let hc = HeuristicConfig::default();
        let spec = fit_one(HeuristicKind::ShortestPath, vec![1.0, 2.0, 7.0]);
        let sentinel = (hc.spd_cap + 1) as f64;
        let far = encode(&spec, sentinel);
        assert_eq!(far, hc.spd_cap + 1);
        assert_ne!(far, encode(&spec, 1e9));
        assert_ne!(far, encode(&spec, hc.spd_cap as f64));
    }

    #[test]
    fn float_equal_width_bins() {
        let spec = fit_one(HeuristicKind::AdamicAdar, vec![0.0, 1.3, 5.2]);
        let b = spec.boundaries.as_ref().unwrap();
        assert_eq!(b.len(), 63);
        for (k, &x) in b.iter().enumerate() {
            assert_eq!(x, 5.2 * (k + 1) as f64 / 64.0);
        }
        assert_eq!(spec.vocab_size, 65);
        assert_eq!(encode(&spec, 5.2), 63);
        assert_eq!(encode(&spec, 0.0), 0);
        assert_eq!(encode(&spec, -0.1), 64);
        assert_eq!(encode(&spec, 5.3), 64);
        assert_eq!(encode(&spec, f64::NAN), 64);
    }

    #[test]
    fn constant_column_is_one_bin() {
        let spec = fit_one(HeuristicKind::Jaccard, vec![0.25; 10]);
        assert_eq!(spec.boundaries.as_deref(), Some(&[][..]));
        assert_eq!(spec.vocab_size, 2);
        assert_eq!(encode(&spec, 0.25), 0);
    }

    #[test]
    fn empty_column_names_kind() {
        let err = fit(
            &[HeuristicKind::ResourceAllocation],
            &[vec![]],
            &EncoderConfig::default(),
            &HeuristicConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("ra"), "{err}");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let spec = fit_one(HeuristicKind::AdamicAdar, vec![0.1, 0.7, 3.3]);
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"mode\":\"float\"") && text.contains("\"kind\":\"aa\""));
        let back: BinSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let ispec = fit_one(HeuristicKind::CommonNeighbors, vec![1.0]);
        let text = serde_json::to_string(&ispec).unwrap();
        assert!(!text.contains("boundaries"));
    }

    #[test]
    fn embed_pair_shape_and_scatter() {
        let specs = fit(
            &[HeuristicKind::CommonNeighbors, HeuristicKind::AdamicAdar],
            &[vec![0.0, 5.0], vec![0.0, 2.0]],
            &EncoderConfig {
                dim_h: 4,
                ..Default::default()
            },
            &HeuristicConfig::default(),
        )
        .unwrap();
        let mut enc = HeuristicEncoder::new(specs, &mut ChaCha8Rng::seed_from_u64(0));
        let e = enc.embed_pair(&[2.0, 1.0]);
        assert_eq!(e.len(), 8);
        assert_eq!(e, enc.embed_pair(&[2.0, 1.0]));
        let rows: Vec<&[f64]> = vec![&[2.0, 1.0]];
        let (x, idx) = enc.forward(&rows);
        assert_eq!(x.row(0), &e[..]);
        enc.backward(&idx, &Tensor::from_vec(1, 8, vec![1.0; 8]).unwrap());
        for (t, &k) in enc.tables.iter().zip(&idx[0]) {
            for r in 0..t.grad.rows {
                let nonzero = t.grad.row(r).iter().any(|&g| g != 0.0);
                assert_eq!(nonzero, r == k);
            }
        }
    }
}
