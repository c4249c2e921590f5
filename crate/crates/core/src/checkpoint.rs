//! On-disk checkpoints.
//!
//! ```text
//! <dir>/manifest.json        config, shapes, counters, bin specs, RNG state
//! <dir>/features.f64         fixed node features, if any
//! <dir>/best/<param>.f64     best-validation parameters
//! <dir>/current/<param>.f64  latest parameters
//! <dir>/adam/m.<param>.f64   optimizer moments
//! <dir>/adam/v.<param>.f64
//! ```
//!
//! Every `.f64` file is a raw row-major little-endian array.

use std::path::Path;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::encoding::{BinSpec, HeuristicEncoder};
use crate::error::{Error, Result};
use crate::io::{read_bytes, read_text, write_bytes};
use crate::model::ModelBundle;
use crate::nn::{Adam, Tensor};
use crate::rng::Rng;
use crate::trainer::{EpochLog, ModelConfig, TrainState};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RngState {
    pub sampling: Rng,
    pub dropout: Rng,
    pub shuffle: Rng,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub toolkit_version: String,
    pub config: ModelConfig,
    pub node_count: usize,
    pub seed: u64,
    pub epoch: usize,
    pub best_epoch: usize,
    pub best_metric: Option<f64>,
    pub stale_epochs: usize,
    pub stopped_early: bool,
    pub features: Option<[usize; 2]>,
    pub bin_specs: Vec<BinSpec>,
    pub params: Vec<ParamEntry>,
    pub adam_step: u64,
    pub rng: RngState,
    pub log: Vec<EpochLog>,
}

fn param_file(name: &str) -> String {
    format!("{name}.f64")
}

fn write_tensor(path: &Path, t: &Tensor) -> Result<()> {
    write_bytes(path, &t.to_le_bytes())
}

fn read_tensor(path: &Path, rows: usize, cols: usize) -> Result<Tensor> {
    let bytes = read_bytes(path)?;
    Tensor::from_le_bytes(rows, cols, &bytes).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

pub fn save(dir: impl AsRef<Path>, cfg: &ModelConfig, state: &TrainState) -> Result<()> {
    let dir = dir.as_ref();
    for sub in ["best", "current", "adam"] {
        let p = dir.join(sub);
        std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let model = &state.model;
    let params: Vec<ParamEntry> = model
        .params()
        .iter()
        .map(|p| ParamEntry {
            name: p.name.clone(),
            rows: p.value.rows,
            cols: p.value.cols,
            file: param_file(&p.name),
        })
        .collect();
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        node_count: model.node_count,
        seed: cfg.seed,
        epoch: state.epoch,
        best_epoch: state.best_epoch,
        best_metric: state.best_metric,
        stale_epochs: state.stale_epochs,
        stopped_early: state.stopped_early,
        features: model.features.as_ref().map(|x| [x.rows, x.cols]),
        bin_specs: model.encoder.as_ref().map(|e| e.specs.clone()).unwrap_or_default(),
        params,
        adam_step: state.adam.step,
        rng: RngState {
            sampling: state.sampling_rng.clone(),
            dropout: state.dropout_rng.clone(),
            shuffle: state.shuffle_rng.clone(),
        },
        log: state.log.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_bytes(&dir.join("manifest.json"), json.as_bytes())?;
    if let Some(x) = &model.features {
        write_tensor(&dir.join("features.f64"), x)?;
    }
    for (i, (cur, best)) in model.params().iter().zip(state.best.params()).enumerate() {
        let file = param_file(&cur.name);
        write_tensor(&dir.join("current").join(&file), &cur.value)?;
        write_tensor(&dir.join("best").join(&file), &best.value)?;
        write_tensor(&dir.join("adam").join(format!("m.{file}")), &state.adam.m[i])?;
        write_tensor(&dir.join("adam").join(format!("v.{file}")), &state.adam.v[i])?;
    }
    Ok(())
}

pub fn load_manifest(dir: impl AsRef<Path>) -> Result<Manifest> {
    let path = dir.as_ref().join("manifest.json");
    let text = read_text(&path)?;
    let m: Manifest = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    if m.format_version != FORMAT_VERSION {
        return Err(Error::Data(format!(
            "{}: unsupported checkpoint format {}",
            path.display(),
            m.format_version
        )));
    }
    Ok(m)
}

/// Rebuilds the model skeleton described by `m` and fills it from
/// `<dir>/<sub>/`.
fn load_model(dir: &Path, m: &Manifest, sub: &str) -> Result<ModelBundle> {
    let features = match m.features {
        Some([r, c]) => Some(read_tensor(&dir.join("features.f64"), r, c)?),
        None => None,
    };
    // values are overwritten below; the RNG only shapes the skeleton
    let mut scratch = Rng::seed_from_u64(0);
    let encoder = (!m.bin_specs.is_empty()).then(|| HeuristicEncoder::new(m.bin_specs.clone(), &mut scratch));
    let mut model = ModelBundle::build(
        m.config.variant,
        m.node_count,
        &m.config.dims(),
        features,
        encoder,
        &mut scratch,
    )?;
    let names = model.parameter_names();
    let listed: Vec<&str> = m.params.iter().map(|p| p.name.as_str()).collect();
    if names != listed {
        return Err(Error::Data(format!(
            "checkpoint lists parameters {listed:?}, config implies {names:?}"
        )));
    }
    for (p, entry) in model.params_mut().into_iter().zip(&m.params) {
        if (p.value.rows, p.value.cols) != (entry.rows, entry.cols) {
            return Err(Error::Data(format!(
                "parameter {} is {}x{} in the manifest but {}x{} in the model",
                entry.name, entry.rows, entry.cols, p.value.rows, p.value.cols
            )));
        }
        p.value = read_tensor(&dir.join(sub).join(&entry.file), entry.rows, entry.cols)?;
    }
    Ok(model)
}

/// Best-validation model only, for evaluation.
pub fn load_best(dir: impl AsRef<Path>) -> Result<(Manifest, ModelBundle)> {
    let dir = dir.as_ref();
    let m = load_manifest(dir)?;
    let model = load_model(dir, &m, "best")?;
    Ok((m, model))
}

/// Full training state, for resuming.
pub fn load_state(dir: impl AsRef<Path>) -> Result<(Manifest, TrainState)> {
    let dir = dir.as_ref();
    let m = load_manifest(dir)?;
    let model = load_model(dir, &m, "current")?;
    let best = load_model(dir, &m, "best")?;
    let mut adam = Adam::new(&model.params());
    adam.step = m.adam_step;
    for (i, entry) in m.params.iter().enumerate() {
        adam.m[i] = read_tensor(
            &dir.join("adam").join(format!("m.{}", entry.file)),
            entry.rows,
            entry.cols,
        )?;
        adam.v[i] = read_tensor(
            &dir.join("adam").join(format!("v.{}", entry.file)),
            entry.rows,
            entry.cols,
        )?;
    }
    let state = TrainState {
        model,
        best,
        adam,
        epoch: m.epoch,
        best_epoch: m.best_epoch,
        best_metric: m.best_metric,
        stale_epochs: m.stale_epochs,
        stopped_early: m.stopped_early,
        sampling_rng: m.rng.sampling.clone(),
        dropout_rng: m.rng.dropout.clone(),
        shuffle_rng: m.rng.shuffle.clone(),
        log: m.log.clone(),
    };
    Ok((m, state))
}
