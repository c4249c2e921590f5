//! On-disk formats.
//!
//! Edge list: one edge per line, two base-10 ids separated by a single TAB;
//! lines starting with `#` are comments. A split directory holds
//! `train.tsv`, `valid_pos.tsv`, `valid_neg.tsv`, `test_pos.tsv` and
//! `test_neg.tsv` in that format. A feature matrix file starts with the
//! header `N f` followed by N lines of f space-separated reals.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{sample_negative_edges, EdgeSet, Graph, NegativeSampling, NodeId};

pub type EdgeList = Vec<(NodeId, NodeId)>;

pub const SPLIT_FILES: [&str; 5] = [
    "train.tsv",
    "valid_pos.tsv",
    "valid_neg.tsv",
    "test_pos.tsv",
    "test_neg.tsv",
];

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

/// Parses edge-list text; `path` is only used in error messages.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<(EdgeList, usize)> {
    let mut edges = Vec::new();
    let mut max_id: Option<NodeId> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let mut fields = line.split('\t');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(format!("expected two tab-separated ids, got {line:?}")));
        };
        let parse = |s: &str| s.parse::<NodeId>().map_err(|e| err(format!("bad node id {s:?}: {e}")));
        let (v, u) = (parse(a)?, parse(b)?);
        max_id = Some(max_id.map_or(v.max(u), |m| m.max(v).max(u)));
        edges.push((v, u));
    }
    Ok((edges, max_id.map_or(0, |m| m as usize + 1)))
}

/// Reads an edge list; the node count is one past the largest id seen.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(EdgeList, usize)> {
    let path = path.as_ref();
    parse_edge_list(&read_to_string(path)?, path)
}

pub fn format_edge_list(edges: &[(NodeId, NodeId)]) -> String {
    let mut out = String::with_capacity(edges.len() * 12);
    for &(v, u) in edges {
        writeln!(out, "{v}\t{u}").unwrap();
    }
    out
}

pub fn write_edge_list(path: impl AsRef<Path>, edges: &[(NodeId, NodeId)]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_edge_list(edges)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train_pos: EdgeList,
    pub valid_pos: EdgeList,
    pub valid_neg: EdgeList,
    pub test_pos: EdgeList,
    pub test_neg: EdgeList,
}

impl DatasetSplit {
    fn lists(&self) -> [&EdgeList; 5] {
        [
            &self.train_pos,
            &self.valid_pos,
            &self.valid_neg,
            &self.test_pos,
            &self.test_neg,
        ]
    }

    /// One past the largest node id in any list.
    pub fn node_count(&self) -> usize {
        self.lists()
            .iter()
            .flat_map(|l| l.iter())
            .map(|&(v, u)| v.max(u) as usize + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self, node_count: usize) -> Result<()> {
        for (name, list) in SPLIT_FILES.iter().zip(self.lists()) {
            if let Some(&(v, u)) = list
                .iter()
                .find(|&&(v, u)| v as usize >= node_count || u as usize >= node_count)
            {
                return Err(Error::Data(format!(
                    "{name}: pair ({v}, {u}) out of range for {node_count} nodes"
                )));
            }
        }
        for (split, pos, neg) in [
            ("valid", &self.valid_pos, &self.valid_neg),
            ("test", &self.test_pos, &self.test_neg),
        ] {
            let positives: EdgeSet = pos.iter().collect();
            if let Some(&(v, u)) = neg.iter().find(|&&(v, u)| positives.contains(v, u)) {
                return Err(Error::Data(format!(
                    "{split}: pair ({v}, {u}) is both positive and negative"
                )));
            }
        }
        Ok(())
    }

    /// All positive pairs across train, valid and test.
    pub fn all_positives(&self) -> EdgeSet {
        self.train_pos
            .iter()
            .chain(&self.valid_pos)
            .chain(&self.test_pos)
            .collect()
    }

    /// Message-passing graph built from the training positives only.
    pub fn train_graph(&self, node_count: usize) -> Result<Graph> {
        Ok(crate::graph::build_graph(&self.train_pos, node_count)?.0)
    }
}

pub fn load_split(dir: impl AsRef<Path>) -> Result<DatasetSplit> {
    let dir = dir.as_ref();
    let mut lists = Vec::with_capacity(5);
    for name in SPLIT_FILES {
        lists.push(load_edge_list(dir.join(name))?.0);
    }
    let mut it = lists.into_iter();
    let split = DatasetSplit {
        train_pos: it.next().unwrap(),
        valid_pos: it.next().unwrap(),
        valid_neg: it.next().unwrap(),
        test_pos: it.next().unwrap(),
        test_neg: it.next().unwrap(),
    };
    split.validate(split.node_count())?;
    Ok(split)
}

pub fn write_split(dir: impl AsRef<Path>, split: &DatasetSplit) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, list) in SPLIT_FILES.iter().zip(split.lists()) {
        write_edge_list(dir.join(name), list)?;
    }
    Ok(())
}

/// Train/valid/test fractions for [`make_split`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, valid: f64, test: f64) -> Result<Self> {
        let all = [train, valid, test];
        if all.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::Config(format!(
                "split fractions must lie in [0, 1], got {all:?}"
            )));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions must sum to 1, got {sum}")));
        }
        Ok(Self { train, valid, test })
    }
}

/// Shuffles the graph's edges into train/valid/test positives and samples
/// one non-edge of the full graph per held-out positive.
pub fn make_split<R: Rng + ?Sized>(graph: &Graph, fractions: SplitFractions, rng: &mut R) -> Result<DatasetSplit> {
    let mut edges: EdgeList = graph.edges().collect();
    edges.shuffle(rng);
    let total = edges.len();
    let n_valid = (fractions.valid * total as f64).round() as usize;
    let n_test = ((fractions.test * total as f64).round() as usize).min(total - n_valid);
    let test_pos = edges.split_off(total - n_test);
    let valid_pos = edges.split_off(edges.len() - n_valid);
    let mut negatives = sample_negative_edges(
        graph,
        n_valid + n_test,
        rng,
        &EdgeSet::new(),
        NegativeSampling::default(),
    )?;
    let test_neg = negatives.split_off(n_valid);
    Ok(DatasetSplit {
        train_pos: edges,
        valid_pos,
        valid_neg: negatives,
        test_pos,
        test_neg,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub dim: usize,
    /// Row-major, `rows * dim` values.
    pub values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

pub fn parse_features(text: &str, path: &Path) -> Result<FeatureMatrix> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing `N f` header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| err(1, format!("bad header field {t:?}: {e}"))))
        .collect::<Result<_>>()?;
    let [rows, dim] = dims[..] else {
        return Err(err(1, format!("header must be `N f`, got {header:?}")));
    };
    let mut values = Vec::with_capacity(rows * dim);
    let mut seen = 0;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|e| err(i + 1, format!("bad value {tok:?}: {e}")))?,
            );
        }
        if values.len() - before != dim {
            return Err(err(
                i + 1,
                format!("expected {dim} values, got {}", values.len() - before),
            ));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(err(1, format!("header declares {rows} rows, found {seen}")));
    }
    Ok(FeatureMatrix { rows, dim, values })
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    parse_features(&read_to_string(path)?, path)
}

pub fn write_features(path: impl AsRef<Path>, x: &FeatureMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("{} {}\n", x.rows, x.dim);
    for i in 0..x.rows {
        let row: Vec<String> = x.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    read_to_string(path)
}
