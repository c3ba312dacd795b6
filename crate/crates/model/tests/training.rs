use std::rc::Rc;

use ndarray::{array, Array2};
use pharmasyn_model::{
    block_loss, gradient_check, rxn_loss, total_loss, train, train_with, verify_checkpoint, write_metrics_csv, Batch,
    BlockChoice, Checkpoint, EpochMetrics, Example, Model, ModelConfig, ModelError, TrainConfig, CHECKPOINT_VERSION,
};
use pharmasyn_nn::{Graph, ParamStore};
use pharmasyn_synthesis::{make_dataset, BuildingBlockCatalog, ReactionTemplateSet, Step, SyntheticTree, TrainingTriple};

fn desk() -> (BuildingBlockCatalog, ReactionTemplateSet) {
    (BuildingBlockCatalog::desk(), ReactionTemplateSet::desk())
}

fn triples(n: usize, seed: u64) -> Vec<TrainingTriple> {
    let (c, t) = desk();
    make_dataset(&c, &t, n, 4, seed).unwrap().triples
}

fn small_cfg(vocab: usize) -> ModelConfig {
    ModelConfig {
        hidden: 16,
        enc_layers: 2,
        d_model: 16,
        heads: 4,
        dec_layers: 2,
        ff: 32,
        ..ModelConfig::new(16, vocab)
    }
}

fn scalar(rows: Array2<f64>, other: Array2<f64>) -> Result<f64, ModelError> {
    let s: ParamStore<f64> = ParamStore::new();
    let mut g = Graph::new(&s);
    let a = g.constant(rows);
    let b = g.constant(other);
    let l = block_loss(&mut g, a, b)?;
    Ok(g.scalar(l))
}

#[test]
fn block_loss_examples() {
    let z = array![[1.0, 2.0, 0.0], [0.0, -1.0, 3.0]];
    assert!(scalar(z.clone(), z.clone()).unwrap().abs() < 1e-15);
    assert!((scalar(z.clone(), -&z).unwrap() - 2.0).abs() < 1e-15);
    let orth = array![[-2.0, 1.0, 5.0], [1.0, 0.0, 0.0]];
    assert!((scalar(z.clone(), orth).unwrap() - 1.0).abs() < 1e-15);
    let zero = array![[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]];
    assert_eq!(scalar(z, zero).unwrap_err(), ModelError::ZeroVector);
}

fn ce(logits: Array2<f64>, targets: Vec<Option<usize>>) -> f64 {
    let s: ParamStore<f64> = ParamStore::new();
    let mut g = Graph::new(&s);
    let l = g.constant(logits);
    let v = rxn_loss(&mut g, l, &Rc::from(targets));
    g.scalar(v)
}

#[test]
fn rxn_loss_examples() {
    assert!(ce(array![[40.0, 0.0, 0.0], [0.0, 0.0, 40.0]], vec![Some(0), Some(2)]) < 1e-15);
    assert!((ce(Array2::zeros((3, 20)), vec![Some(4), Some(0), Some(19)]) - 20f64.ln()).abs() < 1e-12);
    // probabilities {0.787, 0.107, 0.107}, target on a 0.107 class
    let wrong = ce(array![[2.0, 0.0, 0.0]], vec![Some(1)]);
    assert!((wrong - 2.235).abs() < 5e-3);
    assert!((wrong - (2f64.exp() + 2.0).ln()).abs() < 1e-12);
    // positions without a target are ignored
    assert_eq!(ce(array![[2.0, 0.0, 0.0], [9.0, -9.0, 0.0]], vec![Some(1), None]), wrong);
}

#[test]
fn total_is_sum_of_parts() {
    let s: ParamStore<f64> = ParamStore::new();
    let mut g = Graph::new(&s);
    let z = g.constant(array![[1.0, 2.0], [3.0, -1.0]]);
    let lb = block_loss(&mut g, z, z).unwrap();
    let logits = g.constant(array![[50.0, 0.0], [0.0, 50.0]]);
    let lr = rxn_loss(&mut g, logits, &Rc::from(vec![Some(0), Some(1)]));
    let t = g.add(lb, lr);
    assert!(g.scalar(t).abs() < 1e-15);
}

#[test]
fn examples_align_targets_one_step_ahead() {
    let (c, t) = desk();
    let tr = triples(20, 3).into_iter().find(|x| x.tree.depth() >= 2).unwrap();
    let ex = Example::from_triple(&tr, &t).unwrap();
    let m = tr.tree.depth();
    assert_eq!(ex.seq.len(), m + 1);
    assert_eq!(ex.target_blocks[m], BlockChoice::End);
    assert_eq!(ex.target_rxns[0], Some(0));
    assert_eq!(ex.target_rxns[m], None);
    for k in 0..m {
        assert_eq!(ex.target_blocks[k], BlockChoice::Block(tr.tree.steps[k].block.unwrap()));
    }
    assert_eq!(ex.target_rxns[1], Some(t.vocab_index(tr.tree.steps[1].reaction).unwrap()));
    let batch: Batch<f64> = Batch::new(&[&ex, &ex], &c, 4096).unwrap();
    assert_eq!(batch.n_positions(), 2 * (m + 1));
}

#[test]
fn unimolecular_routes_are_rejected() {
    let (_, t) = desk();
    let tree = SyntheticTree {
        steps: vec![
            Step::start(1),
            Step {
                block: None,
                reaction: Some(1),
                order: None,
            },
        ],
        products: vec!["C".into(), "C".into()],
        final_smiles: "C".into(),
    };
    let g = pharmasyn_chem::PharmacophoreGraph::new(vec![]);
    assert!(matches!(Example::new(&tree, g, &t), Err(ModelError::UnsupportedTree(_))));
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let (c, t) = desk();
    let trs = triples(3, 4);
    let ex: Vec<Example> = trs.iter().map(|x| Example::from_triple(x, &t).unwrap()).collect();
    let refs: Vec<&Example> = ex.iter().collect();
    let model: Model<f64> = Model::init(small_cfg(t.vocab_size()), 1).unwrap();
    let batch = Batch::new(&refs, &c, 4096).unwrap();
    let report = gradient_check(&model, &batch, 20, 1e-3, 7).unwrap();
    assert_eq!(report.tensors_checked, model.params.len());
    assert!(report.max_rel_err < 1e-4, "{report:?}");
}

#[test]
fn loss_falls_over_fifty_steps() {
    let (c, t) = desk();
    let data = triples(10, 5);
    let cfg = TrainConfig {
        epochs: 50,
        batch_size: 10,
        lr: 3e-3,
        ..Default::default()
    };
    let out = train_with(&data, &c, &t, &cfg, small_cfg(t.vocab_size()), |_| {}).unwrap();
    let total = |m: &EpochMetrics| m.l_b + m.l_rxn;
    assert_eq!(out.metrics.len(), 50);
    assert!(total(&out.metrics[49]) < 0.5 * total(&out.metrics[0]), "{:?}", out.metrics[49]);
}

#[test]
fn zero_epochs_returns_initialization() {
    let (c, t) = desk();
    let cfg = TrainConfig {
        epochs: 0,
        seed: 17,
        ..Default::default()
    };
    let out = train_with(&triples(2, 1), &c, &t, &cfg, small_cfg(t.vocab_size()), |_| {}).unwrap();
    assert!(out.metrics.is_empty());
    let init: Model<f32> = Model::init(small_cfg(t.vocab_size()), 17).unwrap();
    assert_eq!(out.checkpoint.model, init);
}

#[test]
fn training_is_deterministic() {
    let (c, t) = desk();
    let data = triples(6, 2);
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 4,
        ..Default::default()
    };
    let run = || {
        let o = train_with(&data, &c, &t, &cfg, small_cfg(t.vocab_size()), |_| {}).unwrap();
        let mut csv = Vec::new();
        write_metrics_csv(&o.metrics, &mut csv).unwrap();
        (o.checkpoint.to_bytes(), csv)
    };
    assert_eq!(run(), run());
}

#[test]
fn nonfinite_loss_is_divergence() {
    let (c, t) = desk();
    let cfg = TrainConfig {
        epochs: 20,
        batch_size: 2,
        lr: 1e38,
        ..Default::default()
    };
    let err = train_with(&triples(4, 1), &c, &t, &cfg, small_cfg(t.vocab_size()), |_| {}).unwrap_err();
    assert!(matches!(err, ModelError::Divergence { .. }), "{err:?}");
}

#[test]
fn empty_dataset_is_rejected() {
    let (c, t) = desk();
    let err = train(&[], &c, &t, &TrainConfig::default()).unwrap_err();
    assert_eq!(err, ModelError::EmptyDataset);
}

#[test]
fn metrics_csv_layout() {
    let mut out = Vec::new();
    let m = EpochMetrics {
        epoch: 1,
        l_b: 0.5,
        l_rxn: 1.25,
        block_acc: 0.75,
        rxn_acc: 1.0,
    };
    write_metrics_csv(&[m], &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "epoch,L_B,L_rxn,block_acc,rxn_acc\n1,0.5,1.25,0.75,1\n");
}

fn checkpoint() -> (Checkpoint, Batch<f32>) {
    let (c, t) = desk();
    let data = triples(3, 9);
    let cfg = TrainConfig {
        epochs: 1,
        batch_size: 3,
        ..Default::default()
    };
    let out = train_with(&data, &c, &t, &cfg, small_cfg(t.vocab_size()), |_| {}).unwrap();
    let ex: Vec<Example> = data.iter().map(|x| Example::from_triple(x, &t).unwrap()).collect();
    let refs: Vec<&Example> = ex.iter().collect();
    (out.checkpoint, Batch::new(&refs, &c, 4096).unwrap())
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let (ck, probe) = checkpoint();
    assert!(verify_checkpoint(&ck, &probe).unwrap());
    let dir = std::env::temp_dir().join(format!("pharmasyn-ckpt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.ckpt");
    ck.save(&path).unwrap();
    assert_eq!(Checkpoint::load(&path).unwrap(), ck);
    let (c, t) = desk();
    ck.check_inputs(&c, &t).unwrap();
    let other = BuildingBlockCatalog::parse("0\tCCO\n").unwrap();
    assert!(matches!(ck.check_inputs(&other, &t), Err(ModelError::CatalogMismatch { .. })));
}

#[test]
fn corrupted_checkpoint_fails_checksum() {
    let (ck, _) = checkpoint();
    let mut bytes = ck.to_bytes();
    let k = bytes.len() / 2;
    bytes[k] ^= 0x01;
    assert_eq!(Checkpoint::from_bytes(&bytes).unwrap_err(), ModelError::Checksum);
    let n = bytes.len();
    assert!(Checkpoint::from_bytes(&bytes[..n - 40]).is_err());
    assert_eq!(Checkpoint::from_bytes(b"NOTACKPT....").unwrap_err(), ModelError::BadMagic);
}

#[test]
fn other_version_is_unsupported() {
    let (mut ck, _) = checkpoint();
    ck.version = CHECKPOINT_VERSION + 1;
    let err = Checkpoint::from_bytes(&ck.to_bytes()).unwrap_err();
    assert_eq!(
        err,
        ModelError::UnsupportedVersion {
            found: CHECKPOINT_VERSION + 1,
            supported: CHECKPOINT_VERSION
        }
    );
}

#[test]
fn total_loss_returns_gradient_for_every_tensor() {
    let (c, t) = desk();
    let data = triples(2, 6);
    let ex: Vec<Example> = data.iter().map(|x| Example::from_triple(x, &t).unwrap()).collect();
    let refs: Vec<&Example> = ex.iter().collect();
    let model: Model<f64> = Model::init(small_cfg(t.vocab_size()), 2).unwrap();
    let (loss, grads) = total_loss(&model, &Batch::new(&refs, &c, 4096).unwrap(), false).unwrap();
    assert!(loss > 0.0 && loss.is_finite());
    let missing: Vec<&str> = (0..model.params.len())
        .filter(|&i| grads.get(i).is_none())
        .map(|i| model.params.name(i))
        .collect();
    // the last layer's coordinate update never reaches the loss
    assert_eq!(missing, ["enc.1.x.w1", "enc.1.x.b1", "enc.1.x.w2"]);
}
