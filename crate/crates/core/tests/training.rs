use std::collections::BTreeSet;

use linkpred::checkpoint;
use linkpred::graph::{sample_negative_edges, NegativeSampling};
use linkpred::heuristics::HeuristicKind;
use linkpred::io::{make_split, DatasetSplit, SplitFractions};
use linkpred::model::{ModelBundle, ModelDims, Variant};
use linkpred::nn::{bce_with_logits, Adam, CombineMode};
use linkpred::rng::{stream, Rng, Stream};
use linkpred::synth::erdos_renyi;
use linkpred::trainer::{predict_scores, ModelConfig, TrainContext, ValidMetric};
use linkpred::{Graph, NodeId};
use rand::SeedableRng;

fn small_cfg(variant: Variant) -> ModelConfig {
    ModelConfig {
        variant,
        gnn_layers: 2,
        hidden_dim: 8,
        node_emb_dim: 8,
        random_feature_dim: 6,
        predictor_layers: 2,
        predictor_hidden: 8,
        heuristics: vec![HeuristicKind::CommonNeighbors, HeuristicKind::AdamicAdar],
        heuristic_dim: 4,
        bins: 8,
        lr: 0.01,
        dropout: 0.3,
        batch_size: 16,
        epochs: 4,
        patience: 0,
        valid_metric: ValidMetric::Auc,
        seed: 11,
        ..ModelConfig::default()
    }
}

fn er_split(seed: u64) -> (Graph, DatasetSplit) {
    let mut rng = Rng::seed_from_u64(seed);
    let full = erdos_renyi(60, 0.1, &mut rng);
    let split = make_split(&full, SplitFractions::new(0.8, 0.1, 0.1).unwrap(), &mut rng).unwrap();
    (split.train_graph(60).unwrap(), split)
}

#[test]
fn resuming_from_a_checkpoint_is_bitwise_identical() {
    let (g, split) = er_split(1);
    let cfg = small_cfg(Variant::GnnXneHe);
    let ctx = TrainContext::new(&g, &split, &cfg).unwrap();

    let mut straight = ctx.init_state(None).unwrap();
    ctx.run(&mut straight).unwrap();

    let halfway = ModelConfig {
        epochs: 2,
        ..cfg.clone()
    };
    let ctx_half = TrainContext::new(&g, &split, &halfway).unwrap();
    let mut first = ctx_half.init_state(None).unwrap();
    ctx_half.run(&mut first).unwrap();
    let dir = tempfile::tempdir().unwrap();
    checkpoint::save(dir.path(), &halfway, &first).unwrap();
    let (manifest, mut resumed) = checkpoint::load_state(dir.path()).unwrap();
    assert_eq!(manifest.epoch, 2);
    // gradient buffers are scratch space cleared before every step
    first.model.zero_grad();
    assert_eq!(resumed, first);
    ctx.run(&mut resumed).unwrap();

    assert_eq!(resumed.model, straight.model);
    assert_eq!(resumed.best, straight.best);
    assert_eq!(resumed.adam, straight.adam);
    assert_eq!(resumed.log, straight.log);
}

#[test]
fn best_checkpoint_scores_like_the_in_memory_model() {
    let (g, split) = er_split(2);
    let cfg = small_cfg(Variant::GnnNeHe);
    let ctx = TrainContext::new(&g, &split, &cfg).unwrap();
    let mut state = ctx.init_state(None).unwrap();
    ctx.run(&mut state).unwrap();
    let dir = tempfile::tempdir().unwrap();
    checkpoint::save(dir.path(), &cfg, &state).unwrap();
    let (_, model) = checkpoint::load_best(dir.path()).unwrap();
    let a = predict_scores(&g, &state.best, &split.test_pos, &cfg.heuristic_params).unwrap();
    let b = predict_scores(&g, &model, &split.test_pos, &cfg.heuristic_params).unwrap();
    assert_eq!(a, b);
}

#[test]
fn a_step_only_moves_embedding_rows_in_the_receptive_field() {
    let (g, split) = er_split(3);
    for layers in [1, 2] {
        let cfg = ModelConfig {
            gnn_layers: layers,
            dropout: 0.0,
            ..small_cfg(Variant::GnnNe)
        };
        let ctx = TrainContext::new(&g, &split, &cfg).unwrap();
        let mut state = ctx.init_state(None).unwrap();
        let batch = &split.train_pos[..3];

        // replay the negative draw the step is about to make
        let mut probe = state.sampling_rng.clone();
        let negs = sample_negative_edges(
            &g,
            batch.len(),
            &mut probe,
            &split.all_positives(),
            NegativeSampling::default(),
        )
        .unwrap();
        let mut field = BTreeSet::new();
        for &(v, u) in batch.iter().chain(&negs) {
            field.extend(g.ball(v, layers));
            field.extend(g.ball(u, layers));
        }

        let before = state.model.node_embedding.clone().unwrap().value;
        ctx.train_step(&mut state, batch, cfg.lr).unwrap();
        let after = &state.model.node_embedding.as_ref().unwrap().value;
        let moved: BTreeSet<usize> = (0..g.node_count()).filter(|&i| before.row(i) != after.row(i)).collect();
        let outside: Vec<_> = moved.iter().filter(|i| !field.contains(&(**i as NodeId))).collect();
        assert!(
            outside.is_empty(),
            "L = {layers}: rows {outside:?} moved outside the receptive field"
        );
        assert!(moved.contains(&(batch[0].0 as usize)));
    }
}

#[test]
fn a_fixed_batch_can_be_memorized() {
    let mut rng = Rng::seed_from_u64(4);
    let g = erdos_renyi(30, 0.15, &mut rng);
    let pos: Vec<(NodeId, NodeId)> = g.edges().take(16).collect();
    let negs = sample_negative_edges(&g, 16, &mut rng, &Default::default(), NegativeSampling::default()).unwrap();
    let mut pairs = pos.clone();
    pairs.extend(&negs);
    let labels: Vec<f64> = (0..pairs.len())
        .map(|i| if i < pos.len() { 1.0 } else { 0.0 })
        .collect();

    let dims = ModelDims {
        gnn_layers: 2,
        hidden_dim: 16,
        node_emb_dim: 16,
        predictor_layers: 2,
        predictor_hidden: 16,
        combine: CombineMode::Hadamard,
        dropout: 0.0,
    };
    let mut init = stream(5, Stream::Init);
    let mut model = ModelBundle::build(Variant::GnnNe, g.node_count(), &dims, None, None, &mut init).unwrap();
    let mut adam = Adam::new(&model.params());
    let mut losses = Vec::new();
    for _ in 0..200 {
        model.zero_grad();
        let (logits, tape) = model.forward::<Rng>(&g, &pairs, None, None).unwrap();
        let (loss, d) = bce_with_logits(&logits, &labels).unwrap();
        model.backward(&g, &tape, &d).unwrap();
        adam.update(&mut model.params_mut(), 0.01);
        losses.push(loss);
    }
    let last = *losses.last().unwrap();
    assert!(last < 0.1, "loss after 200 steps: {last}");
    let windows: Vec<f64> = losses.chunks(10).map(|w| w.iter().sum::<f64>() / 10.0).collect();
    assert!(
        windows.windows(2).all(|w| w[1] < w[0]),
        "10-step mean loss is not strictly decreasing: {windows:?}"
    );
}

#[test]
fn variants_allocate_exactly_their_components() {
    let (g, split) = er_split(6);
    for variant in Variant::ALL {
        let cfg = small_cfg(variant);
        let ctx = TrainContext::new(&g, &split, &cfg).unwrap();
        let state = ctx.init_state(None).unwrap();
        let m = &state.model;
        let names = m.parameter_names();
        let has = |prefix: &str| names.iter().any(|n| n.starts_with(prefix));
        assert_eq!(m.features.is_some(), variant.uses_features(), "{variant}");
        assert_eq!(has("node_embedding"), variant.uses_node_embeddings(), "{variant}");
        assert_eq!(has("gcn."), variant.uses_gnn(), "{variant}");
        assert_eq!(has("heuristic."), variant.uses_heuristics(), "{variant}");
        assert!(has("predictor.0.weight"), "{variant}");
        assert_eq!(variant.to_string().parse::<Variant>().unwrap(), variant);
    }
    assert!("GNN_HE".parse::<Variant>().is_err());
}

#[test]
fn predictions_do_not_depend_on_the_worker_count() {
    let (g, split) = er_split(7);
    let cfg = small_cfg(Variant::GnnXneHe);
    let ctx = TrainContext::new(&g, &split, &cfg).unwrap();
    let run = |workers| {
        linkpred::par::with_workers(workers, || {
            let mut s = ctx.init_state(None).unwrap();
            ctx.run(&mut s).unwrap();
            ctx.predict(&s.best, &split.test_pos).unwrap()
        })
    };
    assert_eq!(run(1), run(4));
}
