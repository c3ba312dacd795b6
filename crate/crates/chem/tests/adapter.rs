use pharmasyn_chem::{
    canonicalize, extract_pharmacophores, gen_conformer, morgan_fp, murcko_scaffold, properties,
    tanimoto, BitFingerprint, ChemError, PharmacophoreClass, FP_BITS,
};
use proptest::prelude::*;

#[test]
fn canonical_forms() {
    // reference canonical output for "OCC"
    assert_eq!(canonicalize("OCC").unwrap().smiles(), "CCO");
    assert_eq!(canonicalize("CCO").unwrap().smiles(), "CCO");
    assert!(matches!(canonicalize("C((("), Err(ChemError::Parse { .. })));
}

#[test]
fn benzene_fingerprint_golden() {
    let fp = morgan_fp(&canonicalize("c1ccccc1").unwrap(), 2, FP_BITS);
    // popcount agrees with an established implementation; bit positions are frozen
    assert_eq!(fp.count_ones(), 3);
    assert_eq!(fp.on_bits(), vec![150, 2776, 3236]);
    let methane = morgan_fp(&canonicalize("C").unwrap(), 2, FP_BITS);
    assert_ne!(fp, methane);
    assert_eq!(morgan_fp(&canonicalize("c1ccccc1").unwrap(), 2, FP_BITS), fp);
}

#[test]
fn tanimoto_contract() {
    let a = BitFingerprint::from_bits(FP_BITS, 2, &[1, 2, 3]);
    let b = BitFingerprint::from_bits(FP_BITS, 2, &[2, 3, 4]);
    let c = BitFingerprint::from_bits(FP_BITS, 2, &[7, 8]);
    assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
    assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
    assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
    let short = BitFingerprint::zeros(1024, 2);
    assert!(matches!(tanimoto(&a, &short), Err(ChemError::Fingerprint(_))));
}

#[test]
fn murcko_goldens() {
    let s = |x: &str| murcko_scaffold(&canonicalize(x).unwrap()).smiles().to_string();
    assert_eq!(s("Cc1ccccc1"), "c1ccccc1");
    assert_eq!(s("c1ccccc1"), "c1ccccc1");
    assert_eq!(s("CCCCCC"), "");
}

#[test]
fn conformer_contract() {
    let ethanol = canonicalize("CCO").unwrap();
    let a = gen_conformer(&ethanol, 7).unwrap();
    let b = gen_conformer(&ethanol, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.coords.len(), 3);
    assert!(a.coords.iter().flatten().all(|v| v.is_finite()));

    let benzene = canonicalize("c1ccccc1").unwrap();
    let c = gen_conformer(&benzene, 3).unwrap();
    let mut dmax: f64 = 0.0;
    for p in &c.coords {
        for q in &c.coords {
            dmax = dmax.max(pharmasyn_chem::conformer::dist(p, q));
        }
    }
    // para-carbon distance from a force-field optimized reference geometry
    assert!((dmax - 2.8).abs() <= 0.2, "{dmax}");
    let sdf = c.to_sdf();
    assert!(sdf.contains("V2000") && sdf.ends_with("$$$$\n"));
}

#[test]
fn pharmacophore_contract() {
    let benzene = gen_conformer(&canonicalize("c1ccccc1").unwrap(), 1).unwrap();
    let g = extract_pharmacophores(&benzene).unwrap();
    assert_eq!(g.n_points(), 1);
    assert_eq!(g.points[0].class, PharmacophoreClass::Ar);
    let mean: Vec<f64> = (0..3)
        .map(|k| benzene.coords.iter().map(|p| p[k]).sum::<f64>() / 6.0)
        .collect();
    for k in 0..3 {
        assert!((g.points[0].xyz[k] - mean[k]).abs() < 1e-12);
    }

    // donor and acceptor on the hydroxyl oxygen, as a reference feature factory reports
    let methanol = gen_conformer(&canonicalize("CO").unwrap(), 1).unwrap();
    let g = extract_pharmacophores(&methanol).unwrap();
    let o = methanol.coords[1];
    for class in [PharmacophoreClass::Hbd, PharmacophoreClass::Hba] {
        assert!(g.points.iter().any(|p| p.class == class && p.xyz == o));
    }

    let methane = gen_conformer(&canonicalize("C").unwrap(), 1).unwrap();
    assert!(matches!(
        extract_pharmacophores(&methane),
        Err(ChemError::EmptyPharmacophore { .. })
    ));
}

#[test]
fn property_contract() {
    let water = properties(&canonicalize("O").unwrap());
    assert!((water.mw - 18.02).abs() < 0.01);
    let benzene = properties(&canonicalize("c1ccccc1").unwrap());
    // reference logP 1.6866
    assert!(benzene.logp > 0.0 && (benzene.logp - 1.6866).abs() < 1e-3);
}

const POOL: &[&str] = &[
    "CCO",
    "c1ccccc1",
    "CC(=O)Nc1ccc(O)cc1",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "O=C(O)c1ccccc1Br",
    "CN1CCN(CC1)c1ccc(cc1)C#N",
    "OB(O)c1cccnc1",
    "Cc1nc(N)sc1C(=O)OCC",
    "C1CCC(CC1)NC(=O)c1ccco1",
    "c1ccc2[nH]ccc2c1",
    "CC[N+](C)(C)C",
    "O=S(=O)(N)c1ccc(Cl)cc1",
];

fn shuffled_smiles() -> impl Strategy<Value = String> {
    // random atom orders give many spellings of the same molecule
    (0..POOL.len(), any::<u64>()).prop_map(|(i, seed)| {
        let m = pharmasyn_chem::parse_smiles(POOL[i]).unwrap();
        let mut order: Vec<usize> = (0..m.atom_count()).collect();
        let mut s = seed;
        for k in (1..order.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(k, (s >> 33) as usize % (k + 1));
        }
        let mut p = pharmasyn_chem::Mol::new();
        let mut pos = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            p.add_atom(m.atom(old).clone());
            pos[old] = new;
        }
        for b in m.bonds() {
            p.add_bond(pos[b.a], pos[b.b], b.order);
        }
        pharmasyn_chem::write_smiles(&p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalization_is_idempotent_and_order_free(smi in shuffled_smiles()) {
        let once = canonicalize(&smi).unwrap();
        let twice = canonicalize(once.smiles()).unwrap();
        prop_assert_eq!(&once, &twice);
        let reference = POOL.iter().map(|s| canonicalize(s).unwrap()).find(|m| *m == once);
        prop_assert!(reference.is_some());
    }

    #[test]
    fn tanimoto_symmetric_and_bounded(i in 0..POOL.len(), j in 0..POOL.len(), r in 2u32..=3) {
        let a = morgan_fp(&canonicalize(POOL[i]).unwrap(), r, FP_BITS);
        let b = morgan_fp(&canonicalize(POOL[j]).unwrap(), r, FP_BITS);
        let ab = tanimoto(&a, &b).unwrap();
        prop_assert_eq!(ab, tanimoto(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(a.nbits(), FP_BITS);
    }

    #[test]
    fn conformers_are_seed_deterministic(i in 0..POOL.len(), seed in 0u64..1000) {
        let m = canonicalize(POOL[i]).unwrap();
        let a = gen_conformer(&m, seed).unwrap();
        prop_assert_eq!(&a, &gen_conformer(&m, seed).unwrap());
        prop_assert_eq!(a.coords.len(), m.heavy_atom_count());
        let g = extract_pharmacophores(&a).unwrap();
        for row in g.features() {
            prop_assert_eq!(row.iter().filter(|v| **v == 1.0).count(), 1);
        }
    }

    #[test]
    fn qed_in_unit_interval(i in 0..POOL.len()) {
        let p = properties(&canonicalize(POOL[i]).unwrap());
        prop_assert!((0.0..=1.0).contains(&p.qed));
        prop_assert!(p.mw > 0.0);
    }
}
