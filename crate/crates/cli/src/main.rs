//! `linkpred` command-line front end.
//!
//! Every command writes `run.json` into its output directory before any
//! other artifact. Exit codes: 0 success, 1 usage error, 2 bad input data,
//! 3 runtime failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use linkpred::checkpoint;
use linkpred::graph::build_graph;
use linkpred::heuristics::{batch_score, format_value, HeuristicConfig, HeuristicKind};
use linkpred::io::{load_edge_list, load_features, load_split, make_split, write_split, SplitFractions};
use linkpred::metrics::MetricsReport;
use linkpred::nn::Tensor;
use linkpred::par;
use linkpred::rng::{stream, Stream};
use linkpred::trainer::{predict_scores, ModelConfig, TrainContext};
use linkpred::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "linkpred",
    version,
    about = "Link prediction with heuristics, heuristic encoding and GNNs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split an edge list into train/valid/test positives plus sampled negatives.
    Ingest {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Train, valid and test fractions; must sum to 1.
        #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_fractions)]
        fractions: SplitFractions,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score pairs with statistical heuristics and write a CSV.
    Heuristics {
        #[arg(long)]
        graph: PathBuf,
        /// Pairs to score, in edge-list format.
        #[arg(long)]
        pairs: PathBuf,
        /// Comma-separated heuristic tokens, e.g. `cn,aa,katz`.
        #[arg(long)]
        kinds: String,
        /// JSON heuristic parameters; omitted keys keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads, 0 for all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Train a model on a split directory and write a checkpoint.
    Train {
        /// JSON model configuration; omitted keys keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Node feature matrix; random features are used when a variant needs X and this is absent.
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Evaluate the best checkpointed model on the test pairs of a split.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
}

fn parse_fractions(s: &str) -> Result<SplitFractions, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [train, valid, test] = parts[..] else {
        return Err(format!("expected three comma-separated fractions, got {}", parts.len()));
    };
    SplitFractions::new(train, valid, test).map_err(|e| e.to_string())
}

/// Written to `<out>/run.json` before anything else.
#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    toolkit_version: &'a str,
    config: Option<&'a Path>,
    inputs: BTreeMap<&'a str, &'a Path>,
    seed: Option<u64>,
    params: serde_json::Value,
    out: &'a Path,
}

impl RunManifest<'_> {
    fn write(&self) -> linkpred::Result<()> {
        create_dir(self.out)?;
        let json = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        write_file(&self.out.join("run.json"), json)
    }
}

fn create_dir(dir: &Path) -> linkpred::Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> linkpred::Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> linkpred::Result<T> {
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn ingest(graph: &Path, out: &Path, fractions: SplitFractions, seed: u64) -> linkpred::Result<()> {
    RunManifest {
        command: "ingest",
        toolkit_version: env!("CARGO_PKG_VERSION"),
        config: None,
        inputs: BTreeMap::from([("graph", graph)]),
        seed: Some(seed),
        params: serde_json::json!({
            "fractions": [fractions.train, fractions.valid, fractions.test],
        }),
        out,
    }
    .write()?;
    let (edges, n) = load_edge_list(graph)?;
    let (g, report) = build_graph(&edges, n)?;
    if report.self_loops + report.duplicates > 0 {
        eprintln!(
            "dropped {} self-loops and {} duplicate edges",
            report.self_loops, report.duplicates
        );
    }
    let split = make_split(&g, fractions, &mut stream(seed, Stream::Split))?;
    write_split(out, &split)?;
    eprintln!(
        "{n} nodes: {} train, {} valid, {} test positives",
        split.train_pos.len(),
        split.valid_pos.len(),
        split.test_pos.len()
    );
    Ok(())
}

fn heuristics(
    graph: &Path,
    pairs: &Path,
    kinds: &str,
    config: Option<&Path>,
    out: &Path,
    workers: usize,
) -> linkpred::Result<()> {
    let kinds = HeuristicKind::parse_list(kinds)?;
    if kinds.is_empty() {
        return Err(Error::Config("--kinds lists no heuristics".into()));
    }
    let cfg: HeuristicConfig = match config {
        Some(p) => read_json(p)?,
        None => HeuristicConfig::default(),
    };
    cfg.validate()?;
    RunManifest {
        command: "heuristics",
        toolkit_version: env!("CARGO_PKG_VERSION"),
        config,
        inputs: BTreeMap::from([("graph", graph), ("pairs", pairs)]),
        seed: None,
        params: serde_json::json!({ "kinds": kinds, "heuristic_params": cfg, "workers": workers }),
        out,
    }
    .write()?;
    let (edges, n_graph) = load_edge_list(graph)?;
    let (query, n_pairs) = load_edge_list(pairs)?;
    // ids that only occur in the pairs file are isolated nodes
    let (g, _) = build_graph(&edges, n_graph.max(n_pairs))?;
    let scores = par::with_workers(workers, || batch_score(&g, &query, &kinds, &cfg))?;

    let mut csv = String::from("v,u");
    for k in &kinds {
        write!(csv, ",{k}").unwrap();
    }
    csv.push('\n');
    for (i, &(v, u)) in query.iter().enumerate() {
        write!(csv, "{v},{u}").unwrap();
        for (&k, &x) in kinds.iter().zip(scores.row(i)) {
            write!(csv, ",{}", format_value(k, x)).unwrap();
        }
        csv.push('\n');
    }
    write_file(&out.join("heuristics.csv"), csv)
}

fn train(
    config: Option<&Path>,
    split_dir: &Path,
    out: &Path,
    seed: Option<u64>,
    features: Option<&Path>,
    workers: usize,
) -> linkpred::Result<()> {
    let mut cfg: ModelConfig = match config {
        Some(p) => read_json(p)?,
        None => ModelConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let mut inputs = BTreeMap::from([("split", split_dir)]);
    if let Some(f) = features {
        inputs.insert("features", f);
    }
    RunManifest {
        command: "train",
        toolkit_version: env!("CARGO_PKG_VERSION"),
        config,
        inputs,
        seed: Some(cfg.seed),
        params: serde_json::json!({ "model": cfg, "workers": workers }),
        out,
    }
    .write()?;
    let split = load_split(split_dir)?;
    let n = split.node_count();
    let x = match features {
        Some(p) => {
            let f = load_features(p)?;
            if f.rows != n {
                return Err(Error::Data(format!(
                    "{}: {} feature rows for {n} nodes in the split",
                    p.display(),
                    f.rows
                )));
            }
            Some(Tensor::from_vec(f.rows, f.dim, f.values)?)
        }
        None => None,
    };
    let g = split.train_graph(n)?;
    let state = par::with_workers(workers, || -> linkpred::Result<_> {
        let ctx = TrainContext::new(&g, &split, &cfg)?;
        let mut state = ctx.init_state(x)?;
        while state.epoch < cfg.epochs && !state.stopped_early {
            ctx.run_epoch(&mut state)?;
            let last = state.log.last().expect("epoch logged");
            let metric = last.valid_metric.map_or("-".to_string(), |m| format!("{m:.4}"));
            eprintln!(
                "epoch {:>4}  loss {:.5}  valid {} {metric}",
                last.epoch, last.loss, cfg.valid_metric
            );
        }
        Ok(state)
    })?;
    checkpoint::save(out, &cfg, &state)?;
    write_file(&out.join("log.jsonl"), state.log_jsonl())?;
    eprintln!(
        "best epoch {} of {}{}",
        state.best_epoch,
        state.epoch,
        if state.stopped_early { " (early stop)" } else { "" }
    );
    Ok(())
}

fn eval(checkpoint_dir: &Path, split_dir: &Path, out: &Path, workers: usize) -> linkpred::Result<()> {
    RunManifest {
        command: "eval",
        toolkit_version: env!("CARGO_PKG_VERSION"),
        config: None,
        inputs: BTreeMap::from([("checkpoint", checkpoint_dir), ("split", split_dir)]),
        seed: None,
        params: serde_json::json!({ "workers": workers }),
        out,
    }
    .write()?;
    let (manifest, model) = checkpoint::load_best(checkpoint_dir)?;
    let split = load_split(split_dir)?;
    let n = split.node_count();
    if n != manifest.node_count {
        return Err(Error::Data(format!(
            "checkpoint was trained on {} nodes but the split has {n}",
            manifest.node_count
        )));
    }
    let g = split.train_graph(n)?;
    let hp = manifest.config.heuristic_params;
    let report = par::with_workers(workers, || -> linkpred::Result<_> {
        let pos = predict_scores(&g, &model, &split.test_pos, &hp)?;
        let neg = predict_scores(&g, &model, &split.test_neg, &hp)?;
        MetricsReport::compute(&pos, &neg)
    })?;
    write_file(&out.join("metrics.json"), report.to_json())?;
    write_file(&out.join("metrics.csv"), report.to_csv())?;
    print!("{}", report.to_json());
    Ok(())
}

fn run(cli: Cli) -> linkpred::Result<()> {
    match cli.command {
        Command::Ingest {
            graph,
            out,
            fractions,
            seed,
        } => ingest(&graph, &out, fractions, seed),
        Command::Heuristics {
            graph,
            pairs,
            kinds,
            config,
            out,
            workers,
        } => heuristics(&graph, &pairs, &kinds, config.as_deref(), &out, workers),
        Command::Train {
            config,
            split,
            out,
            seed,
            features,
            workers,
        } => train(config.as_deref(), &split, &out, seed, features.as_deref(), workers),
        Command::Eval {
            checkpoint,
            split,
            out,
            workers,
        } => eval(&checkpoint, &split, &out, workers),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        // --help and --version
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 3 })
        }
    }
}
