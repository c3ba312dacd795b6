use ndarray::{array, Array2};
use pharmasyn_design::{
    nearest_in_index, random_baseline, DesignError, Designer, FnScorer, GaConfig, LineageEvent, NegLogP, Scorer,
};
use pharmasyn_model::{BlockChoice, Model, ModelConfig, RetrievalIndex};
use pharmasyn_synthesis::{read_jsonl, replay, BuildingBlockCatalog, ReactionTemplateSet};
use proptest::prelude::*;

fn index(rows: Array2<f32>, ids: &[u32]) -> RetrievalIndex<f32> {
    let mut ids: Vec<BlockChoice> = ids.iter().map(|&i| BlockChoice::Block(i)).collect();
    ids.push(BlockChoice::End);
    let mut rows = rows;
    let w = rows.ncols();
    rows.push_row(Array2::<f32>::ones((1, w)).row(0)).unwrap();
    RetrievalIndex::new(rows, ids)
}

#[test]
fn neighbours_exclude_self_and_end() {
    let idx = index(array![[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [1.0, 1.0]], &[4, 8, 15, 16]);
    let n = nearest_in_index(&idx, 4, 10).unwrap();
    let ids: Vec<u32> = n.iter().map(|p| p.0).collect();
    assert_eq!(ids, [8, 16, 15]);
    assert!(n.windows(2).all(|w| w[0].1 >= w[1].1));
    assert!(nearest_in_index(&idx, 4, 0).unwrap().is_empty());
    assert_eq!(nearest_in_index(&idx, 99, 3).unwrap_err(), DesignError::UnknownBlock(99));
}

#[test]
fn neighbour_ties_go_to_smaller_id() {
    let idx = index(array![[1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [0.0, 2.0]], &[1, 9, 3, 5]);
    let ids: Vec<u32> = nearest_in_index(&idx, 1, 3).unwrap().iter().map(|p| p.0).collect();
    // all three are orthogonal to block 1
    assert_eq!(ids, [3, 5, 9]);
}

#[test]
fn duplicate_embedding_scores_exactly_one() {
    let row = [0.137f32, -2.71, 0.0031, 5.5];
    let idx = index(
        Array2::from_shape_vec((3, 4), [row, [1.0, 0.2, 0.3, 0.4], row].concat()).unwrap(),
        &[10, 11, 12],
    );
    let n = nearest_in_index(&idx, 10, 1).unwrap();
    assert_eq!(n, [(12, 1.0)]);
}

#[test]
fn identical_block_fingerprints_give_identical_embeddings() {
    let (c, t) = (BuildingBlockCatalog::desk(), ReactionTemplateSet::desk());
    let m: Model<f32> = Model::init(ModelConfig::new(32, t.vocab_size()), 0).unwrap();
    let fp = &c.blocks()[3].fp;
    let rows = ndarray::stack![ndarray::Axis(0), m.project_block(fp), m.project_block(&c.blocks()[4].fp), m.project_block(fp)];
    let n = nearest_in_index(&index(rows, &[1, 2, 3]), 1, 2).unwrap();
    assert_eq!(n[0], (3, 1.0));
}

proptest! {
    #[test]
    fn neighbour_lists_are_sorted(rows in proptest::collection::vec(-1.0f32..1.0, 18), k in 0usize..8) {
        prop_assume!(rows[..3].iter().any(|v| v.abs() > 1e-3));
        let idx = index(Array2::from_shape_vec((6, 3), rows).unwrap(), &[6, 5, 4, 3, 2, 1]);
        let n = nearest_in_index(&idx, 6, k).unwrap();
        prop_assert_eq!(n.len(), k.min(5));
        prop_assert!(n.iter().all(|p| p.0 != 6));
        for w in n.windows(2) {
            prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        }
    }
}

struct Setup {
    c: BuildingBlockCatalog,
    t: ReactionTemplateSet,
    m: Model<f32>,
}

fn setup() -> Setup {
    let (c, t) = (BuildingBlockCatalog::desk(), ReactionTemplateSet::desk());
    let m = Model::init(ModelConfig::new(32, t.vocab_size()), 3).unwrap();
    Setup { c, t, m }
}

#[test]
fn constant_scorer_keeps_the_elites() {
    let s = setup();
    let d = Designer::from_model(&s.m, &s.c, &s.t);
    let seeds = random_baseline(&s.c, &s.t, 6, 1).unwrap();
    let flat = FnScorer {
        name: "flat".into(),
        f: |_: &pharmasyn_chem::Molecule| 1.0,
    };
    let cfg = GaConfig {
        population: 12,
        cycles: 3,
        topk_parents: 4,
        neighbor_k: 5,
    };
    let r = d.optimize(&seeds, &flat, &cfg, 0).unwrap();
    let ids: Vec<usize> = r.elites.iter().map(|e| e.id).collect();
    assert_eq!(ids, [0, 1, 2, 3]);
    assert_eq!(r.best_per_cycle, [1.0; 4]);
    assert!(!r.lineage.is_empty());
}

#[test]
fn elitism_and_lineage() {
    let s = setup();
    let d = Designer::from_model(&s.m, &s.c, &s.t);
    let seeds = random_baseline(&s.c, &s.t, 8, 2).unwrap();
    let r = d.optimize(&seeds, &NegLogP, &GaConfig::default(), 5).unwrap();
    assert_eq!(r.best_per_cycle.len(), 4);
    assert!(r.best_per_cycle.windows(2).all(|w| w[1] >= w[0]));
    for e in &r.elites {
        let mol = replay(&e.tree, &s.c, &s.t).unwrap();
        assert_eq!(NegLogP.score(&mol), e.score);
    }
    let mut buf = Vec::new();
    r.write_lineage(&mut buf).unwrap();
    let back: Vec<LineageEvent> = read_jsonl(&buf[..]).unwrap();
    assert_eq!(back, r.lineage);
    let first = String::from_utf8(buf).unwrap().lines().next().unwrap().to_string();
    for key in ["cycle", "parent_id", "child_id", "mutated_step", "old_block", "new_block", "reaction", "score"] {
        assert!(first.contains(&format!("\"{key}\"")), "{first}");
    }
    for ev in &r.lineage {
        assert_ne!(ev.old_block, ev.new_block);
        assert!((1..=3).contains(&ev.cycle));
    }
    assert_eq!(r, d.optimize(&seeds, &NegLogP, &GaConfig::default(), 5).unwrap());
}

#[test]
fn optimize_input_errors() {
    let s = setup();
    let d = Designer::from_model(&s.m, &s.c, &s.t);
    assert_eq!(d.optimize(&[], &NegLogP, &GaConfig::default(), 0).unwrap_err(), DesignError::ExtinctPopulation);
    let mut bad = random_baseline(&s.c, &s.t, 1, 3).unwrap();
    bad[0].final_smiles = "CCO".into();
    assert!(matches!(d.optimize(&bad, &NegLogP, &GaConfig::default(), 0), Err(DesignError::Synthesis(_))));
    let zero = GaConfig {
        cycles: 0,
        ..Default::default()
    };
    assert!(matches!(d.optimize(&bad, &NegLogP, &zero, 0), Err(DesignError::Config(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn best_elite_never_gets_worse(seed in 0u64..1000) {
        let s = setup();
        let d = Designer::from_model(&s.m, &s.c, &s.t);
        let seeds = random_baseline(&s.c, &s.t, 5, seed).unwrap();
        let cfg = GaConfig { population: 10, cycles: 3, topk_parents: 3, neighbor_k: 4 };
        let r = d.optimize(&seeds, &NegLogP, &cfg, seed).unwrap();
        prop_assert!(r.best_per_cycle.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(r.elites.len() <= 3);
    }
}
