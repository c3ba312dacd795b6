use pharmasyn_chem::{canonicalize, morgan_fp, murcko_scaffold, tanimoto, Molecule, FP_BITS};
use pharmasyn_design::eval::{property_csv, table_from_values};
use pharmasyn_design::{percentile, random_baseline, render_property_table, similarity_report, property_table};
use pharmasyn_synthesis::{replay, BuildingBlockCatalog, ReactionTemplateSet};
use proptest::prelude::*;

fn mol(s: &str) -> Molecule {
    canonicalize(s).unwrap()
}

#[test]
fn random_baseline_replays_and_is_seeded() {
    let (c, t) = (BuildingBlockCatalog::desk(), ReactionTemplateSet::desk());
    let a = random_baseline(&c, &t, 5, 11).unwrap();
    assert_eq!(a.len(), 5);
    for tree in &a {
        assert_eq!(replay(tree, &c, &t).unwrap().smiles(), tree.final_smiles);
    }
    assert_eq!(a, random_baseline(&c, &t, 5, 11).unwrap());
    assert_ne!(a, random_baseline(&c, &t, 5, 12).unwrap());
}

#[test]
fn identical_molecule_scores_one() {
    let r = mol("O=C(Nc1ccccc1)c1ccncc1");
    let rep = similarity_report(&[r.clone()], &r).unwrap();
    assert_eq!(rep.pairs[0].tanimoto, 1.0);
    assert_eq!(rep.pairs[0].murcko_tanimoto, 1.0);
    assert_eq!((rep.tanimoto.min, rep.tanimoto.max, rep.tanimoto.mean), (1.0, 1.0, 1.0));
}

#[test]
fn acyclic_against_ring_scaffold_is_zero() {
    let rep = similarity_report(&[mol("CCCCO")], &mol("c1ccccc1CCO")).unwrap();
    assert_eq!(rep.pairs[0].murcko_tanimoto, 0.0);
    // two empty scaffolds count as identical
    let rep = similarity_report(&[mol("CCCCO")], &mol("CCN")).unwrap();
    assert_eq!(rep.pairs[0].murcko_tanimoto, 1.0);
}

#[test]
fn aggregates_match_pairwise_recomputation() {
    let reference = mol("CC(=O)Nc1ccc(O)cc1");
    let set: Vec<Molecule> = ["CC(=O)Nc1ccccc1", "Oc1ccc(N)cc1", "c1ccc2ccccc2c1"].iter().map(|s| mol(s)).collect();
    let rep = similarity_report(&set, &reference).unwrap();
    let fp = |m: &Molecule| morgan_fp(m, 2, FP_BITS);
    let t: Vec<f64> = set.iter().map(|m| tanimoto(&fp(m), &fp(&reference)).unwrap()).collect();
    let s: Vec<f64> = set
        .iter()
        .map(|m| tanimoto(&fp(&murcko_scaffold(m)), &fp(&murcko_scaffold(&reference))).unwrap())
        .collect();
    assert_eq!(rep.tanimoto.mean, (t[0] + t[1] + t[2]) / 3.0);
    assert_eq!(rep.tanimoto.min, t.iter().copied().fold(1.0, f64::min));
    assert_eq!(rep.tanimoto.max, t.iter().copied().fold(0.0, f64::max));
    assert_eq!(rep.murcko_tanimoto.mean, (s[0] + s[1] + s[2]) / 3.0);
    // phenyl scaffold vs phenyl scaffold
    assert_eq!(s[0], 1.0);
    assert!(rep.pairs.iter().all(|p| (0.0..=1.0).contains(&p.tanimoto)));
    assert!(rep.to_csv().starts_with("smiles,tanimoto,murcko_tanimoto\n"));
}

#[test]
fn empty_generated_set_is_rejected() {
    assert!(similarity_report(&[], &mol("CCO")).is_err());
    assert!(property_table(&[], None).is_err());
}

#[test]
fn linear_interpolation_percentiles() {
    let v: Vec<f64> = (0..=10).map(f64::from).collect();
    assert_eq!(percentile(&v, 5.0), Some(0.5));
    assert_eq!(percentile(&v, 95.0), Some(9.5));
    assert_eq!(percentile(&[3.0, 1.0, 2.0], 50.0), Some(2.0));
    assert_eq!(percentile(&[], 50.0), None);
    let row = table_from_values(None, &[300.0; 4], &[2.25; 4], &[0.5; 4]);
    assert_eq!((row.logp_p5, row.logp_p95), (2.25, 2.25));
}

#[test]
fn property_table_from_molecules() {
    let set = [mol("CCO"), mol("c1ccccc1"), mol("CC(=O)O")];
    let row = property_table(&set, Some("1ABC")).unwrap();
    assert_eq!(row.n, 3);
    assert!(row.logp_p5 <= row.logp_p95);
    assert!((row.mw_mean - (46.069 + 78.114 + 60.052) / 3.0).abs() < 1e-2);
}

#[test]
fn rendered_table_layout() {
    let a = table_from_values(Some("5HT2"), &[305.96, 339.02], &[0.0, 10.0], &[0.5, 0.7]);
    let b = table_from_values(None, &[300.0], &[1.0], &[0.25]);
    let text = render_property_table(&[a.clone(), b]);
    let expect = "\
PDB ID         MW  LogP 5% LogP 95%    QED
5HT2       322.49     0.50     9.50   0.60
-          300.00     1.00     1.00   0.25
";
    assert_eq!(text, expect);
    let plain = render_property_table(&[table_from_values(None, &[1.0], &[2.0], &[0.125])]);
    assert_eq!(plain, "      MW  LogP 5% LogP 95%    QED\n    1.00     2.00     2.00   0.12\n");
    let csv = property_csv(&[a]);
    assert_eq!(csv.lines().next().unwrap(), "label,n,mw_mean,logp_p5,logp_p95,qed_mean");
    assert!(csv.lines().nth(1).unwrap().starts_with("5HT2,2,"));
}

proptest! {
    #[test]
    fn percentiles_are_ordered_and_bounded(v in proptest::collection::vec(-50.0f64..50.0, 1..40)) {
        let lo = percentile(&v, 5.0).unwrap();
        let hi = percentile(&v, 95.0).unwrap();
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(min <= lo && lo <= hi && hi <= max);
    }
}
