mod common;

use common::{moved, random_graph, random_orthogonal, rel_diff, transform};
use ndarray::{array, Array2};
use pharmasyn_chem::{PharmacophoreClass, PharmacophoreGraph, PharmacophorePoint};
use pharmasyn_model::egnn::{egnn_layer, embed_features};
use pharmasyn_model::{Model, ModelConfig, ModelError, PackedGraphs, FEATURE_DIM};
use pharmasyn_nn::Graph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full() -> Model<f64> {
    Model::<f32>::init(ModelConfig::new(128, 21), 3).unwrap().cast()
}

fn point(class: PharmacophoreClass, xyz: [f64; 3]) -> PharmacophorePoint {
    PharmacophorePoint { class, xyz }
}

#[test]
fn zero_embedding_weights_give_zero_rows() {
    let mut m: Model<f64> = Model::init(ModelConfig::tiny(3), 1).unwrap();
    m.params.assign("enc.embed.w", Array2::zeros((FEATURE_DIM, 8))).unwrap();
    let mut g = Graph::new(&m.params);
    let f = g.constant(Array2::eye(FEATURE_DIM));
    let h = embed_features(&mut g, f);
    assert!(g.value(h).iter().all(|&v| v == 0.0));
}

#[test]
fn one_hot_rows_select_weight_rows() {
    let m: Model<f64> = Model::init(ModelConfig::tiny(3), 1).unwrap();
    let mut g = Graph::new(&m.params);
    let f = g.constant(array![[0., 0., 1., 0., 0., 0.], [0., 0., 1., 0., 0., 0.], [1., 0., 0., 0., 0., 0.]]);
    let h = embed_features(&mut g, f);
    let w = m.params.get("enc.embed.w").unwrap();
    let h = g.value(h);
    assert_eq!(h.row(0), h.row(1));
    assert_eq!(h.row(0), w.row(2));
    assert_eq!(h.row(2), w.row(0));
}

#[test]
fn single_point_layer_has_empty_message() {
    let m = full();
    let mut g = Graph::new(&m.params);
    let h0 = g.constant(Array2::from_shape_fn((1, 128), |(_, j)| (j as f64 * 0.1).sin()));
    let x0 = g.constant(array![[1.0, -2.0, 0.5]]);
    let (h1, x1) = egnn_layer(&mut g, 0, h0, x0, &Vec::new().into(), &Vec::new().into()).unwrap();
    assert_eq!(g.value(x1), &array![[1.0, -2.0, 0.5]]);

    // φ_h(h, 0) by hand
    let p = |s: &str| m.params.get(&format!("enc.0.{s}")).unwrap().clone();
    let pre = g.value(h0).dot(&p("h.wa")) + p("h.b1");
    let act = pre.mapv(|v| v / (1.0 + (-v).exp()));
    let expect = act.dot(&p("h.w2")) + p("h.b2");
    assert!(rel_diff(g.value(h1), &expect) < 1e-14);
}

#[test]
fn layer_rejects_mismatched_rows() {
    let m = full();
    let mut g = Graph::new(&m.params);
    let h = g.constant(Array2::zeros((3, 128)));
    let x = g.constant(Array2::zeros((2, 3)));
    let err = egnn_layer(&mut g, 0, h, x, &Vec::new().into(), &Vec::new().into()).unwrap_err();
    assert!(matches!(err, ModelError::ShapeMismatch { .. }));
}

#[test]
fn encode_is_repeatable_and_shaped() {
    let m = full();
    let one = PharmacophoreGraph::new(vec![point(PharmacophoreClass::Ar, [0.0, 0.0, 0.0])]);
    let a = m.encode(&one).unwrap();
    assert_eq!(a.h.dim(), (1, 128));
    assert_eq!(a, m.encode(&one).unwrap());
    assert!(matches!(m.encode(&PharmacophoreGraph::new(vec![])), Err(ModelError::EmptyGraph)));
}

#[test]
fn colocated_points_are_allowed() {
    let m = full();
    let g = PharmacophoreGraph::new(vec![
        point(PharmacophoreClass::Hbd, [1.0, 1.0, 1.0]),
        point(PharmacophoreClass::Hba, [1.0, 1.0, 1.0]),
        point(PharmacophoreClass::Hc, [3.0, 1.0, 1.0]),
    ]);
    let out = m.encode(&g).unwrap();
    assert!(out.h.iter().chain(out.x_out.iter()).all(|v| v.is_finite()));
}

#[test]
fn packed_graphs_match_individual_encoding() {
    let m = full();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gs: Vec<_> = (0..3).map(|k| random_graph(&mut rng, 2 + 3 * k)).collect();
    let refs: Vec<_> = gs.iter().collect();
    let packed = m.encode_packed(&PackedGraphs::pack(&refs).unwrap()).unwrap();
    let mut row = 0;
    for g in &gs {
        let single = m.encode(g).unwrap();
        let n = g.n_points();
        let part = packed.h.slice(ndarray::s![row..row + n, ..]).to_owned();
        assert!(rel_diff(&part, &single.h) < 1e-12);
        row += n;
    }
}

/// Invariance of h and equivariance of coordinates over many random graphs.
fn equivariance_suite(trials: usize, seed: u64, f32_model: bool) -> (f64, f64) {
    let m32 = Model::<f32>::init(ModelConfig::new(128, 21), seed).unwrap();
    let m64: Model<f64> = m32.cast();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_h, mut worst_x) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let n = rng.random_range(2..=12);
        let g = random_graph(&mut rng, n);
        let r = random_orthogonal(&mut rng);
        let t = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let g2 = moved(&g, &r, t);
        let (a, b) = if f32_model {
            let (a, b) = (m32.encode(&g).unwrap(), m32.encode(&g2).unwrap());
            let c = |x: &Array2<f32>| x.mapv(f64::from);
            ((c(&a.h), c(&a.x_out)), (c(&b.h), c(&b.x_out)))
        } else {
            let (a, b) = (m64.encode(&g).unwrap(), m64.encode(&g2).unwrap());
            ((a.h, a.x_out), (b.h, b.x_out))
        };
        worst_h = worst_h.max(rel_diff(&b.0, &a.0));
        let mut expect = a.1.clone();
        for mut row in expect.rows_mut() {
            let p = transform([row[0], row[1], row[2]], &r, t);
            row.assign(&ndarray::arr1(&p));
        }
        worst_x = worst_x.max(rel_diff(&b.1, &expect));
    }
    (worst_h, worst_x)
}

#[test]
fn rotation_translation_invariance_f64() {
    let (h, x) = equivariance_suite(40, 11, false);
    assert!(h <= 1e-10 && x <= 1e-10, "h {h:e} x {x:e}");
}

#[test]
fn rotation_translation_invariance_f32() {
    let (h, x) = equivariance_suite(40, 12, true);
    assert!(h <= 1e-5 && x <= 1e-5, "h {h:e} x {x:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn permutation_equivariance(seed in 0u64..1000, n in 2usize..9) {
        let m: Model<f64> = Model::init(ModelConfig::tiny(3), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        let gp = PharmacophoreGraph::new(perm.iter().map(|&i| g.points[i].clone()).collect());
        let (a, b) = (m.encode(&g).unwrap(), m.encode(&gp).unwrap());
        for (k, &i) in perm.iter().enumerate() {
            for (x, y) in b.h.row(k).iter().zip(a.h.row(i)) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
            }
            for (x, y) in b.x_out.row(k).iter().zip(a.x_out.row(i)) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn five_point_layer_is_equivariant(seed in 0u64..1000) {
        let m: Model<f64> = Model::init(ModelConfig::tiny(3), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let g = random_graph(&mut rng, 5);
        let r = random_orthogonal(&mut rng);
        let t = [1.0, -2.0, 3.0];
        let (a, b) = (m.encode(&g).unwrap(), m.encode(&moved(&g, &r, t)).unwrap());
        prop_assert!(rel_diff(&b.h, &a.h) < 1e-10);
    }
}
