//! Molecule-level facade used by the rest of the workspace.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::conformer;
use crate::descriptors;
use crate::fingerprint::{self, BitFingerprint, FingerprintError};
use crate::mol::Mol;
use crate::pharmacophore::{self, PharmacophoreGraph};
use crate::scaffold;
use crate::smiles::{parse_smiles, write_smiles};

/// Fingerprint length used throughout.
pub const FP_BITS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChemError {
    #[error("cannot parse SMILES '{smiles}': {message}")]
    Parse { smiles: String, message: String },
    #[error("3D embedding failed for {smiles}: {reason}")]
    EmbedFailure { smiles: String, reason: String },
    #[error("no pharmacophore features in {smiles}")]
    EmptyPharmacophore { smiles: String },
    #[error(transparent)]
    Fingerprint(#[from] FingerprintError),
}

/// Canonical SMILES paired with the parsed graph.
#[derive(Clone)]
pub struct Molecule {
    smiles: String,
    handle: Arc<Mol>,
}

impl Molecule {
    pub fn smiles(&self) -> &str {
        &self.smiles
    }

    pub fn mol(&self) -> &Mol {
        &self.handle
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.handle.atom_count()
    }

    /// Wraps an already sanitized graph. The handle is re-read from the
    /// canonical SMILES so atom order depends only on the SMILES text.
    pub fn from_mol(mol: Mol) -> Molecule {
        let smiles = write_smiles(&mol);
        let handle = parse_smiles(&smiles).unwrap_or(mol);
        Molecule {
            smiles,
            handle: Arc::new(handle),
        }
    }
}

impl fmt::Debug for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Molecule({})", self.smiles)
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.smiles)
    }
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        self.smiles == other.smiles
    }
}

impl Eq for Molecule {}

impl Hash for Molecule {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.smiles.hash(state);
    }
}

impl Serialize for Molecule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.smiles)
    }
}

impl<'de> Deserialize<'de> for Molecule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        canonicalize(&s).map_err(serde::de::Error::custom)
    }
}

pub fn canonicalize(smiles: &str) -> Result<Molecule, ChemError> {
    let mol = parse_smiles(smiles.trim()).map_err(|e| ChemError::Parse {
        smiles: smiles.to_string(),
        message: e.to_string(),
    })?;
    Ok(Molecule::from_mol(mol))
}

pub fn morgan_fp(mol: &Molecule, radius: u32, nbits: usize) -> BitFingerprint {
    fingerprint::morgan(mol.mol(), radius, nbits)
}

pub fn tanimoto(a: &BitFingerprint, b: &BitFingerprint) -> Result<f64, ChemError> {
    Ok(fingerprint::tanimoto(a, b)?)
}

/// Ring systems plus linkers; acyclic input gives the empty molecule.
pub fn murcko_scaffold(mol: &Molecule) -> Molecule {
    Molecule::from_mol(scaffold::murcko(mol.mol()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conformer {
    /// One triple per heavy atom, in the parent's atom order.
    pub coords: Vec<[f64; 3]>,
    pub parent: Molecule,
    pub seed: u64,
}

impl Conformer {
    /// Single-record SDF text.
    pub fn to_sdf(&self) -> String {
        let mut s = conformer::to_molblock(self.parent.mol(), &self.coords, self.parent.smiles());
        s.push_str("$$$$\n");
        s
    }
}

pub fn gen_conformer(mol: &Molecule, seed: u64) -> Result<Conformer, ChemError> {
    let coords = conformer::embed(mol.mol(), seed).map_err(|e| ChemError::EmbedFailure {
        smiles: mol.smiles.clone(),
        reason: e.reason,
    })?;
    Ok(Conformer {
        coords,
        parent: mol.clone(),
        seed,
    })
}

pub fn extract_pharmacophores(conf: &Conformer) -> Result<PharmacophoreGraph, ChemError> {
    pharmacophore::extract(conf.parent.mol(), &conf.coords).map_err(|_| {
        ChemError::EmptyPharmacophore {
            smiles: conf.parent.smiles.clone(),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyRecord {
    pub mw: f64,
    pub logp: f64,
    pub qed: f64,
}

pub fn properties(mol: &Molecule) -> PropertyRecord {
    PropertyRecord {
        mw: descriptors::mol_weight(mol.mol()),
        logp: descriptors::crippen_logp(mol.mol()),
        qed: descriptors::qed(mol.mol()),
    }
}
