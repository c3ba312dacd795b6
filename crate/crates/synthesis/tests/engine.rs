use pharmasyn_chem::canonicalize;
use pharmasyn_synthesis::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn desk() -> (BuildingBlockCatalog, ReactionTemplateSet) {
    (BuildingBlockCatalog::desk(), ReactionTemplateSet::desk())
}

#[test]
fn desk_bundle_shape() {
    let (cat, tpl) = desk();
    assert_eq!(cat.len(), 300);
    assert_eq!(tpl.len(), 20);
    assert!(tpl.templates().iter().all(|t| t.arity == 2));
    // every block can enter some template
    for b in cat.blocks() {
        assert!(
            tpl.templates().iter().any(|t| t.slot_matches(0, &b.mol) || t.slot_matches(1, &b.mol)),
            "{} reacts with nothing",
            b.mol
        );
    }
    // retrieval needs distinct block fingerprints
    let mut fps: Vec<_> = cat.blocks().iter().map(|b| b.fp.to_hex()).collect();
    fps.sort();
    fps.dedup();
    assert_eq!(fps.len(), cat.len());
}

#[test]
fn catalog_loading_contract() {
    let text: String = (0..100).map(|i| format!("{i}\tC{}\n", "C".repeat(i))).collect();
    assert_eq!(BuildingBlockCatalog::parse(&text).unwrap().len(), 100);
    assert!(matches!(
        BuildingBlockCatalog::parse("1\tCCO\n2\tOCC\n"),
        Err(SynthesisError::DuplicateEntry { line: 2, .. })
    ));
    assert!(matches!(BuildingBlockCatalog::parse(""), Err(SynthesisError::EmptyCatalog)));
    assert!(matches!(
        BuildingBlockCatalog::parse("1\tCCO\n2\tC(((\n"),
        Err(SynthesisError::Parse { line: 2, .. })
    ));
    let b = BuildingBlockCatalog::parse("7\tOCC\n").unwrap();
    assert_eq!(b.get(7).unwrap().mol.smiles(), "CCO");
    assert_eq!(b.get(7).unwrap().fp.radius(), 3);
    assert!(matches!(b.get(8), Err(SynthesisError::UnknownBlock(8))));
}

#[test]
fn template_parsing_errors() {
    assert!(ReactionTemplateSet::parse("1\t1\t[C:1](=O)O.[N:2]>>[C:1][N:2]\n").is_err());
    assert!(ReactionTemplateSet::parse("1\t2\tnot smarts\n").is_err());
    assert!(matches!(ReactionTemplateSet::parse("# only a comment\n"), Err(SynthesisError::EmptyTemplates)));
}

#[test]
fn amide_coupling_contract() {
    let (_, tpl) = desk();
    let amide = tpl.get(1).unwrap();
    let acid = canonicalize("CC(=O)O").unwrap();
    let amine = canonicalize("CN").unwrap();
    let methane = canonicalize("C").unwrap();
    assert!(applicable(amide, &[&acid, &amine]).unwrap());
    assert!(!applicable(amide, &[&methane, &methane]).unwrap());
    assert!(matches!(
        applicable(amide, &[&acid]),
        Err(SynthesisError::ArityMismatch { expected: 2, got: 1, .. })
    ));
    let p = apply(amide, &[&acid, &amine]).unwrap();
    // reference product of the same transform: N-methylacetamide
    assert_eq!(p, canonicalize("CNC(C)=O").unwrap());
    assert_eq!(p, apply(amide, &[&acid, &amine]).unwrap());
    assert!(matches!(apply(amide, &[&methane, &methane]), Err(SynthesisError::NoProduct { .. })));

    let uni = ReactionTemplate::new(99, 1, "[C:1](=O)[OH1]>>[C:1]").unwrap();
    assert!(matches!(
        applicable(&uni, &[&acid, &amine]),
        Err(SynthesisError::ArityMismatch { expected: 1, got: 2, .. })
    ));
}

#[test]
fn products_agree_with_reference_toolkit() {
    // outcomes recorded once with an established toolkit over catalog pairs
    let (_, tpl) = desk();
    let text = include_str!("data/reaction_goldens.tsv");
    let mut checked = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split('\t').collect();
        let t = tpl.get(f[0].parse().unwrap()).unwrap();
        let a = canonicalize(f[1]).unwrap();
        let b = canonicalize(f[2]).unwrap();
        let mut expected: Vec<String> = f
            .get(3)
            .map(|s| s.split(' ').filter(|x| !x.is_empty()).map(|s| canonicalize(s).unwrap().smiles().to_string()).collect())
            .unwrap_or_default();
        expected.sort();
        expected.dedup();
        let got = apply(t, &[&a, &b]);
        match expected.first() {
            Some(best) => assert_eq!(got.unwrap().smiles(), best, "template {} on {a} + {b}", t.id),
            None => assert!(got.is_err(), "template {} on {a} + {b}", t.id),
        }
        checked += 1;
    }
    assert!(checked >= 100);
}

#[test]
fn sampled_trees_always_replay() {
    let (cat, tpl) = desk();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut depths = [0usize; 5];
    for _ in 0..1000 {
        let tree = sample_tree_lenient(&cat, &tpl, 4, &mut rng).unwrap();
        assert!((1..=4).contains(&tree.depth()));
        depths[tree.depth()] += 1;
        let fin = replay(&tree, &cat, &tpl).unwrap();
        assert_eq!(fin.smiles(), tree.final_smiles);
    }
    // deep routes are sometimes truncated when the product runs out of handles
    assert!(depths[1..].iter().all(|&d| d > 100), "{depths:?}");
}

#[test]
fn sampling_is_deterministic_and_bounded() {
    let (cat, tpl) = desk();
    let a = sample_tree(&cat, &tpl, 4, &mut ChaCha8Rng::seed_from_u64(5));
    let b = sample_tree(&cat, &tpl, 4, &mut ChaCha8Rng::seed_from_u64(5));
    assert_eq!(a, b);
    let t = sample_tree(&cat, &tpl, 1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(t.depth(), 1);
    assert_eq!(t.steps[0].reaction, None);
    assert_eq!(t.final_smiles, cat.get(t.steps[0].block.unwrap()).unwrap().mol.smiles());
    assert!(sample_tree(&cat, &tpl, 0, &mut ChaCha8Rng::seed_from_u64(9)).is_err());
}

#[test]
fn exhausted_sampling_returns_valid_prefix() {
    let cat = BuildingBlockCatalog::parse("1\tC\n2\tCC\n").unwrap();
    let tpl = ReactionTemplateSet::desk();
    match sample_tree(&cat, &tpl, 1, &mut ChaCha8Rng::seed_from_u64(0)) {
        Ok(t) => assert_eq!(t.depth(), 1),
        Err(e) => panic!("{e}"),
    }
    let mut saw_exhausted = false;
    for s in 0..20 {
        if let Err(SynthesisError::SamplingExhausted { partial }) =
            sample_tree(&cat, &tpl, 4, &mut ChaCha8Rng::seed_from_u64(s))
        {
            assert_eq!(partial.depth(), 1);
            replay(&partial, &cat, &tpl).unwrap();
            saw_exhausted = true;
        }
    }
    assert!(saw_exhausted);
}

#[test]
fn corrupted_routes_are_rejected() {
    let (cat, tpl) = desk();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let tree = loop {
        let t = sample_tree_lenient(&cat, &tpl, 4, &mut rng).unwrap();
        if t.depth() >= 2 {
            break t;
        }
    };
    for rid in tpl.templates().iter().map(|t| t.id).filter(|&r| Some(r) != tree.steps[1].reaction) {
        let mut bad = tree.clone();
        bad.steps[1].reaction = Some(rid);
        let err = replay(&bad, &cat, &tpl).unwrap_err();
        assert!(
            matches!(
                err,
                SynthesisError::ReplayMismatch { .. }
                    | SynthesisError::NoProduct { .. }
                    | SynthesisError::Sanitize { .. }
            ),
            "{err:?}"
        );
    }
    let mut bad = tree.clone();
    bad.steps[1].reaction = Some(9999);
    assert!(matches!(replay(&bad, &cat, &tpl), Err(SynthesisError::UnknownReaction(9999))));
    let mut bad = tree.clone();
    bad.products[0] = "C".into();
    assert!(matches!(replay(&bad, &cat, &tpl), Err(SynthesisError::ReplayMismatch { step: 0, .. })));
}

#[test]
fn single_block_tree_replays_to_block() {
    let (cat, tpl) = desk();
    let b = &cat.blocks()[17];
    let tree = RouteBuilder::start(b.id, &b.mol).finish();
    assert_eq!(replay(&tree, &cat, &tpl).unwrap(), b.mol);
}

#[test]
fn tree_json_layout() {
    let (cat, tpl) = desk();
    let tree = sample_tree(&cat, &tpl, 4, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let v: serde_json::Value = serde_json::to_value(&tree).unwrap();
    assert!(v["steps"][0]["reaction"].is_null());
    assert!(v["steps"][0]["block"].is_u64());
    assert!(v["final"].is_string());
    assert_eq!(v["products"].as_array().unwrap().len(), tree.depth());
    let back: SyntheticTree = serde_json::from_value(v).unwrap();
    assert_eq!(back, tree);
}

#[test]
fn dataset_contract() {
    let (cat, tpl) = desk();
    let a = make_dataset(&cat, &tpl, 10, 4, 1).unwrap();
    assert_eq!(a.triples.len(), 10);
    assert!(a.triples.iter().all(|t| !t.points.is_empty()));
    let mut ja = Vec::new();
    write_jsonl(&a.triples, &mut ja).unwrap();
    let b = make_dataset(&cat, &tpl, 10, 4, 1).unwrap();
    let mut jb = Vec::new();
    write_jsonl(&b.triples, &mut jb).unwrap();
    assert_eq!(ja, jb);
    // graphs re-derive from the final SMILES and the stored seed
    for t in &a.triples {
        assert_eq!(graph_for(&t.tree, t.conformer_seed).unwrap().points, t.points);
        replay(&t.tree, &cat, &tpl).unwrap();
    }
    let back: Vec<TrainingTriple> = read_jsonl(&ja[..]).unwrap();
    assert_eq!(back, a.triples);
    let first: serde_json::Value = serde_json::from_slice(ja.split(|c| *c == b'\n').next().unwrap()).unwrap();
    assert!(first["points"][0]["class"].is_string());
    assert!(first["conformer_seed"].is_u64());
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

    #[test]
    fn any_sampled_route_round_trips(seed in 0u64..1_000_000, depth in 1usize..=4) {
        let (cat, tpl) = desk();
        let tree = sample_tree_lenient(&cat, &tpl, depth, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        proptest::prop_assert!(tree.depth() <= depth);
        proptest::prop_assert_eq!(tree.products.len(), tree.depth());
        proptest::prop_assert_eq!(tree.products.last().unwrap(), &tree.final_smiles);
        let mut buf = Vec::new();
        write_jsonl(std::slice::from_ref(&tree), &mut buf).unwrap();
        let back: Vec<SyntheticTree> = read_jsonl(&buf[..]).unwrap();
        proptest::prop_assert_eq!(&back[0], &tree);
        let fin = replay(&back[0], &cat, &tpl).unwrap();
        proptest::prop_assert_eq!(fin.smiles(), tree.final_smiles.as_str());
    }
}
