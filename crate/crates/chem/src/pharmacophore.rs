//! Pharmacophore feature typing over a molecule with 3D coordinates.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mol::{BondOrder, Mol};
use crate::smarts::{parse_smarts, Smarts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PharmacophoreClass {
    #[serde(rename = "HBD")]
    Hbd,
    #[serde(rename = "HBA")]
    Hba,
    #[serde(rename = "AR")]
    Ar,
    #[serde(rename = "HC")]
    Hc,
    #[serde(rename = "PIF")]
    Pif,
    #[serde(rename = "NIF")]
    Nif,
}

impl PharmacophoreClass {
    pub const ALL: [PharmacophoreClass; 6] = [
        PharmacophoreClass::Hbd,
        PharmacophoreClass::Hba,
        PharmacophoreClass::Ar,
        PharmacophoreClass::Hc,
        PharmacophoreClass::Pif,
        PharmacophoreClass::Nif,
    ];
    pub const COUNT: usize = 6;

    /// Position in the one-hot feature vector.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            PharmacophoreClass::Hbd => "HBD",
            PharmacophoreClass::Hba => "HBA",
            PharmacophoreClass::Ar => "AR",
            PharmacophoreClass::Hc => "HC",
            PharmacophoreClass::Pif => "PIF",
            PharmacophoreClass::Nif => "NIF",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PharmacophorePoint {
    pub class: PharmacophoreClass,
    pub xyz: [f64; 3],
}

/// Fully connected point set; edges are implicit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PharmacophoreGraph {
    pub points: Vec<PharmacophorePoint>,
}

impl PharmacophoreGraph {
    pub fn new(points: Vec<PharmacophorePoint>) -> Self {
        PharmacophoreGraph { points }
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One-hot rows of width 6.
    pub fn features(&self) -> Vec<[f64; PharmacophoreClass::COUNT]> {
        self.points
            .iter()
            .map(|p| {
                let mut row = [0.0; PharmacophoreClass::COUNT];
                row[p.class.index()] = 1.0;
                row
            })
            .collect()
    }

    pub fn coords(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|p| p.xyz).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("no pharmacophore features found")]
pub struct EmptyPharmacophore;

/// Where a feature sits: on one atom or at the centroid of a ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureSite {
    Atom(usize),
    Ring(Vec<usize>),
}

struct Patterns {
    donor: Vec<Smarts>,
    acceptor: Vec<Smarts>,
    positive: Vec<Smarts>,
    negative: Vec<Smarts>,
}

fn compile(list: &[&str]) -> Vec<Smarts> {
    list.iter()
        .map(|p| parse_smarts(p).unwrap_or_else(|e| panic!("bundled SMARTS {p}: {e}")))
        .collect()
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        donor: compile(&["[N&!H0&v3,N&!H0&+1&v4,O&H1&+0,S&H1&+0,n&H1&+0]"]),
        acceptor: compile(&[
            "[O;H1;+0;!$(O-[C,S,P]=O)]",
            "[O;H0;+0;X2]",
            "[O;X1;+0]",
            "[O;-1]",
            "[n;+0;X2]",
            "[N;+0;X1]",
            "[N;+0;X2;!a;$(N=*)]",
            "[N;+0;X3;v3;!$(N-[C,S,P]=[O,S,N]);!$(N-a);!$(N-[N,O]);!$(N-C=C)]",
        ]),
        positive: compile(&[
            "[N;+1;!$(N=O);!$(N-[O-]);!$(N~[O,N;-1])]",
            "[N;+0;X3;v3;!$(N-[C,S,P]=[O,S,N]);!$(N-a);!$(N-[N,O]);!$(N-C=C)]",
            "[C;X3;!a;$(C(=[N;+0;!a])[N;+0;X3]);!$(C(=N)[O,S])]",
        ]),
        negative: compile(&[
            "[C;$(C(=O)[O;H1,-1])]",
            "[S;$(S(=O)(=O)[O;H1,-1])]",
            "[P;$(P(=O)[O;H1,-1])]",
        ]),
    })
}

fn any_at(list: &[Smarts], mol: &Mol, i: usize) -> bool {
    list.iter().any(|p| p.matches_at(mol, i))
}

// sp3 chain carbon whose heavy neighbours are all carbon or halogen
fn hydrophobic_carbon(mol: &Mol, rings: &crate::rings::RingInfo, i: usize) -> bool {
    let a = mol.atom(i);
    if a.element != 6 || a.aromatic || a.charge != 0 || rings.atom_in_ring(i) {
        return false;
    }
    let nbrs = mol.neighbors(i);
    nbrs.len() >= 2
        && nbrs.iter().all(|&(w, b)| {
            mol.bond(b).order == BondOrder::Single
                && matches!(mol.atom(w).element, 6 | 9 | 17 | 35 | 53)
        })
}

/// Feature occurrences in a fixed order: per-atom features by atom index
/// (class order within an atom), then aromatic rings in SSSR order.
pub fn feature_sites(mol: &Mol) -> Vec<(PharmacophoreClass, FeatureSite)> {
    let p = patterns();
    let rings = mol.rings();
    let mut out = Vec::new();
    for i in 0..mol.atom_count() {
        let el = mol.atom(i).element;
        let mut push = |c| out.push((c, FeatureSite::Atom(i)));
        if any_at(&p.donor, mol, i) {
            push(PharmacophoreClass::Hbd);
        }
        if any_at(&p.acceptor, mol, i) {
            push(PharmacophoreClass::Hba);
        }
        if matches!(el, 17 | 35 | 53) || hydrophobic_carbon(mol, &rings, i) {
            push(PharmacophoreClass::Hc);
        }
        if any_at(&p.positive, mol, i) {
            push(PharmacophoreClass::Pif);
        }
        if any_at(&p.negative, mol, i) {
            push(PharmacophoreClass::Nif);
        }
    }
    for ring in rings.rings() {
        if ring.iter().all(|&a| mol.atom(a).aromatic) {
            out.push((PharmacophoreClass::Ar, FeatureSite::Ring(ring.clone())));
        }
    }
    out
}

/// Places every feature occurrence at its atom, or at the ring centroid for AR.
pub fn extract(mol: &Mol, coords: &[[f64; 3]]) -> Result<PharmacophoreGraph, EmptyPharmacophore> {
    assert_eq!(coords.len(), mol.atom_count(), "one coordinate per atom");
    let points: Vec<PharmacophorePoint> = feature_sites(mol)
        .into_iter()
        .map(|(class, site)| {
            let xyz = match site {
                FeatureSite::Atom(i) => coords[i],
                FeatureSite::Ring(atoms) => centroid(atoms.iter().map(|&a| coords[a])),
            };
            PharmacophorePoint { class, xyz }
        })
        .collect();
    if points.is_empty() {
        return Err(EmptyPharmacophore);
    }
    Ok(PharmacophoreGraph { points })
}

fn centroid(points: impl Iterator<Item = [f64; 3]>) -> [f64; 3] {
    let mut sum = [0.0; 3];
    let mut n = 0.0;
    for p in points {
        for k in 0..3 {
            sum[k] += p[k];
        }
        n += 1.0;
    }
    sum.map(|s| s / n)
}
