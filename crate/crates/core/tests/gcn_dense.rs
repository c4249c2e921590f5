use linkpred::graph::build_graph;
use linkpred::nn::{GcnLayer, Param, Tensor};
use linkpred::rng::Rng;
use linkpred::synth::erdos_renyi;
use proptest::prelude::*;
use rand::{Rng as _, SeedableRng};

const TOL: f64 = 1e-12;

/// `(D + I)⁻¹ (A + I)` as a dense matrix.
fn dense_mean_operator(g: &linkpred::Graph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        let scale = 1.0 / (g.degree(i as u32) + 1) as f64;
        row[i] = scale;
        for &j in g.neighbors(i as u32) {
            row[j as usize] = scale;
        }
    }
    m
}

fn dense(a: &[Vec<f64>], b: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(a.len(), b.cols);
    for (i, row) in a.iter().enumerate() {
        for (k, &x) in row.iter().enumerate() {
            for c in 0..b.cols {
                out.data[i * b.cols + c] += x * b.get(k, c);
            }
        }
    }
    out
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn random(rows: usize, cols: usize, rng: &mut Rng) -> Tensor {
    Tensor::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn max_diff(a: &Tensor, b: &Tensor) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn layer_matches_the_dense_operator(seed in any::<u64>(), n in 2usize..25, p in 0.0f64..0.6) {
        let mut rng = Rng::seed_from_u64(seed);
        let g = erdos_renyi(n, p, &mut rng);
        let (d_in, d_out) = (rng.gen_range(1..6), rng.gen_range(1..6));
        let h = random(n, d_in, &mut rng);
        let mut layer = GcnLayer::new(Param::new("w", random(d_in, d_out, &mut rng)));
        let m = dense_mean_operator(&g);

        let (agg, out) = layer.forward(&g, &h).unwrap();
        let expect_agg = dense(&m, &h);
        let expect_out = expect_agg.matmul(&layer.weight.value).unwrap();
        prop_assert!(max_diff(&agg, &expect_agg) <= TOL);
        prop_assert!(max_diff(&out, &expect_out) <= TOL);

        let upstream = random(n, d_out, &mut rng);
        let d_h = layer.backward(&g, &agg, &upstream).unwrap();
        // dH = Mᵀ · dOut · Wᵀ and dW = (M H)ᵀ · dOut
        let expect_dh = dense(&transpose(&m), &upstream.matmul_t(&layer.weight.value).unwrap());
        let expect_dw = expect_agg.t_matmul(&upstream).unwrap();
        prop_assert!(max_diff(&d_h, &expect_dh) <= TOL);
        prop_assert!(max_diff(&layer.weight.grad, &expect_dw) <= TOL);
    }
}

#[test]
fn isolated_nodes_keep_their_own_row() {
    let (g, _) = build_graph(&[(0, 1)], 3).unwrap();
    let h = Tensor::from_vec(3, 1, vec![2.0, 4.0, 7.0]).unwrap();
    let agg = linkpred::nn::mean_aggregate(&g, &h).unwrap();
    assert_eq!(agg.data, vec![3.0, 3.0, 7.0]);
}
