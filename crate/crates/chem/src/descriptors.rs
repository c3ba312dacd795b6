//! Physicochemical descriptors: molecular weight, Crippen logP, TPSA and QED.

use std::sync::OnceLock;

use crate::element;
use crate::mol::{BondOrder, Mol};
use crate::smarts::{parse_smarts, Smarts};

struct CrippenRow {
    smarts: Smarts,
    logp: f64,
}

fn crippen_table() -> &'static [CrippenRow] {
    static TABLE: OnceLock<Vec<CrippenRow>> = OnceLock::new();
    TABLE.get_or_init(|| {
        include_str!("../data/crippen.tsv")
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| {
                let f: Vec<&str> = l.split('\t').collect();
                CrippenRow {
                    smarts: parse_smarts(f[1]).unwrap_or_else(|e| panic!("bundled SMARTS {}: {e}", f[1])),
                    logp: f[2].parse().expect("bundled logP value"),
                }
            })
            .collect()
    })
}

fn compile(patterns: &[&str]) -> Vec<Smarts> {
    patterns
        .iter()
        .map(|p| parse_smarts(p).unwrap_or_else(|e| panic!("bundled SMARTS {p}: {e}")))
        .collect()
}

fn alerts() -> &'static [Smarts] {
    static ALERTS: OnceLock<Vec<Smarts>> = OnceLock::new();
    ALERTS.get_or_init(|| {
        let lines: Vec<&str> = include_str!("../data/qed_alerts.txt")
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .collect();
        compile(&lines)
    })
}

fn acceptors() -> &'static [Smarts] {
    static ACC: OnceLock<Vec<Smarts>> = OnceLock::new();
    ACC.get_or_init(|| {
        compile(&[
            "[oH0;X2]",
            "[OH1;X2;v2]",
            "[OH0;X2;v2]",
            "[OH0;X1;v2]",
            "[O-;X1]",
            "[SH0;X2;v2]",
            "[SH0;X1;v2]",
            "[S-;X1]",
            "[nH0;X2]",
            "[NH0;X1;v3]",
            "[$([N;+0;X3;v3]);!$(N[C,S]=O)]",
        ])
    })
}

fn donor() -> &'static Smarts {
    static D: OnceLock<Smarts> = OnceLock::new();
    D.get_or_init(|| {
        parse_smarts("[N&!H0&v3,N&!H0&+1&v4,O&H1&+0,S&H1&+0,n&H1&+0]").expect("donor SMARTS")
    })
}

fn rotatable() -> &'static Smarts {
    static R: OnceLock<Smarts> = OnceLock::new();
    R.get_or_init(|| {
        parse_smarts(concat!(
            "[!$(*#*)&!D1&!$(C(F)(F)F)&!$(C(Cl)(Cl)Cl)&!$(C(Br)(Br)Br)&!$(C([CH3])([CH3])[CH3])",
            "&!$([CD3](=[N,O,S])-!@[#7,O,S!D1])&!$([#7,O,S!D1]-!@[CD3]=[N,O,S])",
            "&!$([CD3](=[N+])-!@[#7!D1])&!$([#7!D1]-!@[CD3]=[N+])]-,:;!@",
            "[!$(*#*)&!D1&!$(C(F)(F)F)&!$(C(Cl)(Cl)Cl)&!$(C(Br)(Br)Br)&!$(C([CH3])([CH3])[CH3])]"
        ))
        .expect("rotatable bond SMARTS")
    })
}

/// Average molecular weight including implicit hydrogens.
pub fn mol_weight(mol: &Mol) -> f64 {
    mol.atoms()
        .iter()
        .map(|a| element::mass(a.element) + a.hydrogens as f64 * element::mass(1))
        .sum()
}

fn hydrogen_contribution(mol: &Mol, i: usize) -> f64 {
    const H1: f64 = 0.123;
    const H2: f64 = -0.2677;
    const H3: f64 = 0.2142;
    const H4: f64 = 0.298;
    const HS: f64 = 0.1125;
    match mol.atom(i).element {
        6 => H1,
        7 => H3,
        8 => {
            let nbrs = mol.neighbors(i);
            let is = |pred: &dyn Fn(usize) -> bool| nbrs.iter().any(|&(w, _)| pred(w));
            let carbon_x4_or_aromatic = |w: usize| {
                let a = mol.atom(w);
                a.element == 6 && (a.aromatic || mol.connectivity(w) == 4)
            };
            let other = |w: usize| !matches!(mol.atom(w).element, 6 | 7 | 8 | 16);
            let enol_or_acid = |w: usize| {
                mol.atom(w).element == 6
                    && !mol.atom(w).aromatic
                    && mol.neighbors(w).iter().any(|&(x, b)| {
                        x != i
                            && mol.bond(b).order == BondOrder::Double
                            && matches!(mol.atom(x).element, 6 | 7 | 8 | 16)
                    })
            };
            // water's second hydrogen counts as the "other" neighbour
            if mol.atom(i).hydrogens >= 2 || is(&carbon_x4_or_aromatic) || is(&other) {
                H2
            } else if is(&|w| mol.atom(w).element == 7) {
                H3
            } else if is(&enol_or_acid) || is(&|w| matches!(mol.atom(w).element, 8 | 16)) {
                H4
            } else {
                HS
            }
        }
        _ => H2,
    }
}

/// Wildman–Crippen logP.
pub fn crippen_logp(mol: &Mol) -> f64 {
    let table = crippen_table();
    let mut total = 0.0;
    for i in 0..mol.atom_count() {
        if let Some(row) = table.iter().find(|r| r.smarts.matches_at(mol, i)) {
            total += row.logp;
        }
        total += mol.atom(i).hydrogens as f64 * hydrogen_contribution(mol, i);
    }
    total
}

/// Topological polar surface area over N and O atoms (Ertl contributions).
pub fn tpsa(mol: &Mol) -> f64 {
    let rings = mol.rings();
    let mut total = 0.0;
    for i in 0..mol.atom_count() {
        let atom = mol.atom(i);
        if !matches!(atom.element, 7 | 8) {
            continue;
        }
        let (mut single, mut double, mut triple, mut arom) = (0, 0, 0, 0);
        for &(_, b) in mol.neighbors(i) {
            match mol.bond(b).order {
                BondOrder::Single => single += 1,
                BondOrder::Double => double += 1,
                BondOrder::Triple => triple += 1,
                BondOrder::Aromatic => arom += 1,
            }
        }
        let h = atom.hydrogens;
        let q = atom.charge;
        let in3 = rings.atom_in_ring_of_size(i, 3);
        let key = (single, double, triple, arom, h, q);
        let v = if atom.element == 7 {
            match key {
                (3, 0, 0, 0, 0, 0) => if in3 { 3.01 } else { 3.24 },
                (1, 1, 0, 0, 0, 0) => 12.36,
                (0, 0, 1, 0, 0, 0) => 23.79,
                (1, 2, 0, 0, 0, 0) => 11.68,
                (0, 1, 1, 0, 0, 0) => 13.6,
                (2, 0, 0, 0, 1, 0) => if in3 { 21.94 } else { 12.03 },
                (0, 1, 0, 0, 1, 0) => 23.85,
                (1, 0, 0, 0, 2, 0) => 26.02,
                (0, 0, 0, 0, 3, 0) => 23.79,
                (4, 0, 0, 0, 0, 1) => 0.0,
                (2, 1, 0, 0, 0, 1) => 3.01,
                (1, 0, 1, 0, 0, 1) => 4.36,
                (3, 0, 0, 0, 1, 1) => 4.44,
                (1, 1, 0, 0, 1, 1) => 13.97,
                (2, 0, 0, 0, 2, 1) => 16.61,
                (0, 1, 0, 0, 2, 1) => 25.59,
                (1, 0, 0, 0, 3, 1) => 27.64,
                (0, 0, 0, 2, 0, 0) => 12.89,
                (0, 0, 0, 3, 0, 0) => 4.41,
                (1, 0, 0, 2, 0, 0) => 4.93,
                (0, 1, 0, 2, 0, 0) => 8.39,
                (0, 0, 0, 2, 1, 0) => 15.79,
                (0, 0, 0, 3, 0, 1) => 4.1,
                (1, 0, 0, 2, 0, 1) => 3.88,
                (0, 0, 0, 2, 1, 1) => 14.14,
                _ => {
                    let n = (single + double + triple + arom) as f64 + h as f64;
                    (30.5 - n * 8.2 + h as f64 * 1.5).max(0.0)
                }
            }
        } else {
            match key {
                (2, 0, 0, 0, 0, 0) => if in3 { 12.53 } else { 9.23 },
                (0, 1, 0, 0, 0, 0) => 17.07,
                (1, 0, 0, 0, 1, 0) => 20.23,
                (1, 0, 0, 0, 0, -1) => 23.06,
                (0, 0, 0, 2, 0, 0) => 13.14,
                (0, 0, 0, 0, 2, 0) => 31.5,
                _ => {
                    let n = (single + double + triple + arom) as f64 + h as f64;
                    (28.5 - n * 8.6 + h as f64 * 1.5).max(0.0)
                }
            }
        };
        total += v;
    }
    total
}

pub fn hbd_count(mol: &Mol) -> usize {
    donor().unique_matches(mol).len()
}

/// Acceptor count using the QED acceptor definitions.
pub fn hba_count(mol: &Mol) -> usize {
    acceptors().iter().map(|p| p.unique_matches(mol).len()).sum()
}

/// Rotatable bonds under the strict definition (amide C–N and CX3 groups excluded).
pub fn rotatable_bonds(mol: &Mol) -> usize {
    rotatable().unique_matches(mol).len()
}

/// Rings left after removing aliphatic ring atoms bonded to non-aromatic atoms.
pub fn aromatic_ring_count(mol: &Mol) -> usize {
    static ALIPHATIC: OnceLock<Smarts> = OnceLock::new();
    let pat = ALIPHATIC.get_or_init(|| parse_smarts("[$([A;R][!a])]").expect("ring SMARTS"));
    let mut keep = vec![true; mol.atom_count()];
    for m in pat.matches(mol) {
        keep[m[0]] = false;
    }
    let (sub, _) = mol.subgraph(&keep);
    sub.rings().num_rings()
}

pub fn alert_count(mol: &Mol) -> usize {
    alerts().iter().filter(|a| a.has_match(mol)).count()
}

struct Ads {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    f: f64,
    dmax: f64,
}

impl Ads {
    fn eval(&self, x: f64) -> f64 {
        let rise = 1.0 + (-(x - self.c + self.d / 2.0) / self.e).exp();
        let fall = 1.0 - 1.0 / (1.0 + (-(x - self.c - self.d / 2.0) / self.f).exp());
        (self.a + self.b / rise * fall) / self.dmax
    }
}

const ADS: [Ads; 8] = [
    Ads { a: 2.817065973, b: 392.5754953, c: 290.7489764, d: 2.419764353, e: 49.22325677, f: 65.37051707, dmax: 104.9805561 },
    Ads { a: 3.172690585, b: 137.8624751, c: 2.534937431, d: 4.581497897, e: 0.822739154, f: 0.576295591, dmax: 131.3186604 },
    Ads { a: 2.948620388, b: 160.4605972, c: 3.615294657, d: 4.435986202, e: 0.290141953, f: 1.300669958, dmax: 148.7763046 },
    Ads { a: 1.618662227, b: 1010.051101, c: 0.985094388, d: 0.000000001, e: 0.713820843, f: 0.920922555, dmax: 258.1632616 },
    Ads { a: 1.876861559, b: 125.2232657, c: 62.90773554, d: 87.83366614, e: 12.01999824, f: 28.51324732, dmax: 104.5686167 },
    Ads { a: 0.010000000, b: 272.4121427, c: 2.558379970, d: 1.565547684, e: 1.271567166, f: 2.758063707, dmax: 105.4420403 },
    Ads { a: 3.217788970, b: 957.7374108, c: 2.274627939, d: 0.000000001, e: 1.317690384, f: 0.375760881, dmax: 312.3372610 },
    Ads { a: 0.010000000, b: 1199.094025, c: -0.09002883, d: 0.000000001, e: 0.185904477, f: 0.875193782, dmax: 417.7253140 },
];

const QED_WEIGHTS: [f64; 8] = [0.66, 0.46, 0.05, 0.61, 0.06, 0.65, 0.48, 0.95];

/// Raw inputs to QED, in order: MW, ALOGP, HBA, HBD, PSA, ROTB, AROM, ALERTS.
pub fn qed_properties(mol: &Mol) -> [f64; 8] {
    [
        mol_weight(mol),
        crippen_logp(mol),
        hba_count(mol) as f64,
        hbd_count(mol) as f64,
        tpsa(mol),
        rotatable_bonds(mol) as f64,
        aromatic_ring_count(mol) as f64,
        alert_count(mol) as f64,
    ]
}

/// Weighted quantitative estimate of drug-likeness in [0, 1].
pub fn qed(mol: &Mol) -> f64 {
    let props = qed_properties(mol);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..8 {
        let d = ADS[k].eval(props[k]).max(1e-12);
        num += QED_WEIGHTS[k] * d.ln();
        den += QED_WEIGHTS[k];
    }
    (num / den).exp().clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    // (smiles, MW, logP, TPSA, HBA, HBD, ROTB, AROM, ALERTS, QED) from an
    // established descriptor implementation
    const REFERENCE: &[(&str, f64, f64, f64, usize, usize, usize, usize, usize, f64)] = &[
        ("O", 18.0150, -0.8247, 31.5000, 0, 0, 0, 0, 0, 0.327748),
        ("c1ccccc1", 78.1140, 1.6866, 0.0000, 0, 0, 0, 1, 0, 0.442628),
        ("CCO", 46.0690, -0.0014, 20.2300, 1, 1, 0, 0, 0, 0.406808),
        ("CC(=O)Nc1ccc(O)cc1", 151.1650, 1.3506, 49.3300, 2, 2, 1, 1, 1, 0.595026),
        ("CC(C)Cc1ccc(cc1)C(C)C(=O)O", 206.2850, 3.0732, 37.3000, 2, 1, 4, 1, 0, 0.821600),
        ("CN1CCN(CC1)c1ccccc1", 176.2630, 1.4384, 6.4800, 2, 0, 1, 1, 0, 0.638563),
        ("O=S(=O)(N)c1ccc(cc1)-c1nnc(o1)C", 239.2560, 0.6924, 99.0800, 5, 1, 2, 2, 0, 0.830778),
        ("CC(=O)Oc1ccccc1C(=O)O", 180.1590, 1.3101, 63.6000, 4, 1, 2, 1, 2, 0.550122),
        ("Clc1ccc(cc1)C(=O)NCCN1CCOCC1", 268.7440, 1.4020, 41.5700, 3, 1, 4, 1, 0, 0.897631),
        ("C[N+](C)(C)C", 74.1470, 0.3224, 0.0000, 0, 0, 0, 0, 1, 0.362984),
        ("CC(=O)[O-]", 59.0440, -1.2438, 40.1300, 2, 0, 0, 0, 0, 0.349774),
        ("N#Cc1ccc(cc1)C(F)(F)F", 171.1210, 2.5771, 23.7900, 1, 0, 0, 1, 0, 0.588043),
        ("c1ccc2[nH]ccc2c1", 117.1510, 2.1679, 15.7900, 0, 1, 0, 2, 0, 0.543916),
        ("OB(O)c1ccc(Br)cc1", 200.8280, 0.1289, 40.4600, 2, 2, 1, 1, 1, 0.633376),
    ];

    #[test]
    fn matches_reference_values() {
        for &(smi, mw, logp, psa, hba, hbd, rotb, arom, alerts, q) in REFERENCE {
            let m = parse_smiles(smi).unwrap();
            assert!((mol_weight(&m) - mw).abs() < 0.01, "{smi} mw {}", mol_weight(&m));
            assert!((crippen_logp(&m) - logp).abs() < 1e-3, "{smi} logp {}", crippen_logp(&m));
            assert!((tpsa(&m) - psa).abs() < 1e-2, "{smi} tpsa {}", tpsa(&m));
            assert_eq!(hba_count(&m), hba, "{smi} hba");
            assert_eq!(hbd_count(&m), hbd, "{smi} hbd");
            assert_eq!(rotatable_bonds(&m), rotb, "{smi} rotb");
            assert_eq!(aromatic_ring_count(&m), arom, "{smi} arom");
            assert_eq!(alert_count(&m), alerts, "{smi} alerts");
            assert!((qed(&m) - q).abs() < 1e-4, "{smi} qed {}", qed(&m));
        }
    }

    #[test]
    fn bundled_patterns_compile() {
        assert_eq!(alerts().len(), 116);
        assert!(crippen_table().len() > 90);
    }
}
