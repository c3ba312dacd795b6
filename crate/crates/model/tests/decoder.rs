mod common;

use std::rc::Rc;

use common::{moved, random_graph, random_orthogonal};
use ndarray::{array, Array1, Array2};
use pharmasyn_chem::BitFingerprint;
use pharmasyn_model::decoder::{attention, embed_sequence, PackedSequences};
use pharmasyn_model::{
    positional_encoding, predict_reaction, select_block, BlockChoice, Model, ModelConfig, ModelError, RetrievalIndex,
    Token, TokenSequence,
};
use pharmasyn_nn::Graph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full() -> Model<f32> {
    Model::init(ModelConfig::new(128, 21), 9).unwrap()
}

fn random_fp<R: Rng>(rng: &mut R) -> BitFingerprint {
    let on: Vec<usize> = (0..rng.random_range(5..60)).map(|_| rng.random_range(0..4096)).collect();
    BitFingerprint::from_bits(4096, 3, &on)
}

fn random_seq<R: Rng>(rng: &mut R, len: usize) -> TokenSequence {
    let mut s = TokenSequence::start();
    for _ in 1..len {
        s.push(&random_fp(rng));
    }
    s
}

fn embed(m: &Model<f32>, seq: &TokenSequence) -> Array2<f32> {
    let packed = PackedSequences::pack(&[seq], vec![0], 4096).unwrap();
    let mut g = Graph::new(&m.params);
    let e = embed_sequence(&mut g, &m.config, &packed);
    g.value(e).clone()
}

#[test]
fn start_only_sequence_embeds_to_start_plus_pe() {
    let m = full();
    let e = embed(&m, &TokenSequence::start());
    let expect = m.params.get("dec.start").unwrap() + &positional_encoding::<f32>(&[0], 128);
    assert_eq!(e, expect);
}

#[test]
fn positional_encoding_values() {
    let pe = positional_encoding::<f64>(&[0, 1], 4);
    assert_eq!(pe.row(0), array![0.0, 1.0, 0.0, 1.0]);
    assert!((pe[[1, 0]] - 1f64.sin()).abs() < 1e-15);
    assert!((pe[[1, 3]] - (0.01f64).cos()).abs() < 1e-15);
}

#[test]
fn swapping_product_tokens_changes_both_rows() {
    let m = full();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let seq = random_seq(&mut rng, 3);
    let mut swapped = seq.clone();
    swapped.tokens.swap(1, 2);
    let (a, b) = (embed(&m, &seq), embed(&m, &swapped));
    assert_eq!(a, embed(&m, &seq));
    assert_ne!(a.row(1), b.row(1));
    assert_ne!(a.row(2), b.row(2));
    assert_eq!(a.row(0), b.row(0));
}

#[test]
fn misplaced_start_is_rejected() {
    let mut seq = TokenSequence::start();
    seq.tokens.push(Token::Start);
    assert!(PackedSequences::pack(&[&seq], vec![0], 4096).is_err());
    let bad = TokenSequence {
        tokens: vec![Token::Start, Token::Fp(vec![5000].into())],
    };
    assert!(PackedSequences::pack(&[&bad], vec![0], 4096).is_err());
}

#[test]
fn causal_prefix_is_bit_identical() {
    let m = full();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for len in 1..=8 {
        let n = rng.random_range(1..10);
        let memory = m.encode(&random_graph(&mut rng, n)).unwrap().h;
        let seq = random_seq(&mut rng, len);
        let z = m.decode(&memory, &seq).unwrap();
        for cut in 1..len {
            let mut other = seq.clone();
            for t in other.tokens[cut..].iter_mut() {
                *t = Token::fingerprint(&random_fp(&mut rng));
            }
            let z2 = m.decode(&memory, &other).unwrap();
            for i in 0..cut {
                let bits = |r: ndarray::ArrayView1<f32>| r.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(z.row(i)), bits(z2.row(i)), "len {len} cut {cut} row {i}");
            }
        }
    }
}

#[test]
fn empty_memory_is_rejected() {
    let m = full();
    let err = m.decode(&Array2::zeros((0, 128)), &TokenSequence::start()).unwrap_err();
    assert_eq!(err, ModelError::EmptyGraph);
    let err = m.decode(&Array2::zeros((2, 64)), &TokenSequence::start()).unwrap_err();
    assert!(matches!(err, ModelError::ShapeMismatch { .. }));
}

#[test]
fn zero_query_key_weights_give_mean_of_values() {
    let mut m: Model<f64> = Model::init(ModelConfig::tiny(3), 4).unwrap();
    for w in ["wq", "wk", "bq", "bk"] {
        let name = format!("dec.0.cross.{w}");
        let shape = m.params.get(&name).unwrap().dim();
        m.params.assign(&name, Array2::zeros(shape)).unwrap();
    }
    let mut g = Graph::new(&m.params);
    let q = g.constant(Array2::from_shape_fn((3, 8), |(i, j)| (i * 8 + j) as f64));
    let memory = Array2::from_shape_fn((4, 8), |(i, j)| ((i + 1) * (j + 2)) as f64 * 0.1);
    let mem = g.constant(memory.clone());
    let mask = Rc::new(Array2::from_elem((3, 4), true));
    let out = attention(&mut g, "dec.0.cross", 2, q, mem, &mask);
    let p = |s: &str| m.params.get(&format!("dec.0.cross.{s}")).unwrap().clone();
    let mean = memory.mean_axis(ndarray::Axis(0)).unwrap().insert_axis(ndarray::Axis(0));
    let expect = (mean.dot(&p("wv")) + p("bv")).dot(&p("wo")) + p("bo");
    for r in g.value(out).rows() {
        for (a, b) in r.iter().zip(expect.row(0)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn project_block_is_affine_in_fingerprint() {
    let mut m = full();
    let b = Array1::from_shape_fn(128, |i| i as f32 * 0.01);
    m.params.assign("proj.b", b.clone().insert_axis(ndarray::Axis(0))).unwrap();
    assert_eq!(m.project_block(&BitFingerprint::zeros(4096, 3)), b);
    let e7 = m.project_block(&BitFingerprint::from_bits(4096, 3, &[7]));
    let w = m.params.get("proj.w").unwrap();
    assert_eq!(e7, &w.row(7) + &b);
    m.params.assign("proj.w", Array2::zeros((4096, 128))).unwrap();
    assert_eq!(m.project_block(&BitFingerprint::from_bits(4096, 3, &[1, 2, 3])), b);
}

fn index(rows: Array2<f64>, ids: &[u32]) -> RetrievalIndex<f64> {
    RetrievalIndex::new(rows, ids.iter().map(|&i| BlockChoice::Block(i)).collect())
}

#[test]
fn select_block_examples() {
    let idx = index(array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], &[10, 11, 12]);
    assert_eq!(select_block(array![0.0, 3.0].view(), &idx).unwrap(), BlockChoice::Block(11));
    assert_eq!(select_block(array![2.0, 2.0].view(), &idx).unwrap(), BlockChoice::Block(12));
    let orth = index(array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], &[1, 2, 3]);
    assert_eq!(select_block(array![0.0, 0.5, 0.0].view(), &orth).unwrap(), BlockChoice::Block(2));
    assert_eq!(select_block(array![0.0, 0.0].view(), &idx).unwrap_err(), ModelError::ZeroVector);
}

#[test]
fn select_block_breaks_ties_by_smallest_id() {
    // unit rows whose cosines with z = e0 are 0.2, 0.9, 0.9
    let s = |c: f64| (1.0 - c * c).sqrt();
    let rows = array![[0.2, s(0.2)], [0.9, s(0.9)], [0.9, -s(0.9)]];
    let idx = index(rows, &[5, 2, 7]);
    let z = array![1.0, 0.0];
    let cos = idx.cosines(z.view()).unwrap();
    assert_eq!(cos[1], cos[2]);
    assert_eq!(select_block(z.view(), &idx).unwrap(), BlockChoice::Block(2));
}

#[test]
fn end_row_competes_in_retrieval() {
    let rows = array![[1.0, 0.0], [0.0, 1.0]];
    let idx = RetrievalIndex::new(rows, vec![BlockChoice::Block(0), BlockChoice::End]);
    assert_eq!(select_block(array![0.1, 1.0].view(), &idx).unwrap(), BlockChoice::End);
}

#[test]
fn reaction_probabilities() {
    let mut m: Model<f64> = Model::init(ModelConfig::tiny(3), 5).unwrap();
    let z = array![0.3, -1.0, 2.0, 0.1, 0.0, 0.5, 0.5, -0.2];
    let zp = z.mapv(|v| v * 0.5 - 0.1);
    let p = predict_reaction(&m.params, z.view(), zp.view());
    assert!((p.sum() - 1.0).abs() < 1e-6);

    m.params.assign("rxn.w", Array2::zeros((16, 3))).unwrap();
    let p = predict_reaction(&m.params, z.view(), zp.view());
    assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-12));

    m.params.assign("rxn.b", array![[2.0, 0.0, 0.0]]).unwrap();
    let p = predict_reaction(&m.params, z.view(), zp.view());
    // e²/(e²+2) and 1/(e²+2)
    assert!((p[0] - 0.787).abs() < 1e-3 && (p[1] - 0.107).abs() < 1e-3 && (p[2] - 0.107).abs() < 1e-3);
    assert!((p[0] - 0.786_986_5).abs() < 1e-6);
}

#[test]
fn step_predictions_invariant_to_rotating_the_graph() {
    let m: Model<f64> = full().cast();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = random_graph(&mut rng, 6);
    let r = random_orthogonal(&mut rng);
    let seq = random_seq(&mut rng, 4);
    let z1 = m.decode(&m.encode(&g).unwrap().h, &seq).unwrap();
    let z2 = m.decode(&m.encode(&moved(&g, &r, [3.0, 0.0, -1.0])).unwrap().h, &seq).unwrap();
    let d = z1.iter().zip(&z2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-9, "{d:e}");
}

proptest! {
    #[test]
    fn selection_ignores_positive_scale(
        rows in proptest::collection::vec(-1.0f64..1.0, 12),
        z in proptest::collection::vec(-1.0f64..1.0, 3),
        s in 0.01f64..100.0,
    ) {
        let z = Array1::from(z);
        prop_assume!(z.dot(&z) > 1e-6);
        let idx = index(Array2::from_shape_vec((4, 3), rows).unwrap(), &[3, 1, 4, 2]);
        let a = select_block(z.view(), &idx).unwrap();
        let b = select_block((&z * s).view(), &idx).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reaction_probs_are_a_simplex(seed in 0u64..500, scale in 0.1f64..50.0) {
        let m: Model<f64> = Model::init(ModelConfig::tiny(5), seed).unwrap();
        let z = Array1::from_shape_fn(8, |i| ((i as f64 + seed as f64) * 0.7).sin() * scale);
        let p = predict_reaction(&m.params, z.view(), z.view());
        prop_assert!((p.sum() - 1.0).abs() < 1e-6);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
