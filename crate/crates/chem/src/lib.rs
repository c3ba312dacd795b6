//! Small cheminformatics toolkit: SMILES, substructure matching, reactions,
//! fingerprints, conformers, pharmacophores and drug-likeness descriptors.

pub mod adapter;
pub mod aromaticity;
pub mod canon;
pub mod conformer;
pub mod descriptors;
pub mod element;
pub mod fingerprint;
pub mod mol;
pub mod pharmacophore;
pub mod reaction;
pub mod rings;
pub mod scaffold;
pub mod smarts;
pub mod smiles;

pub use adapter::{
    canonicalize, extract_pharmacophores, gen_conformer, morgan_fp, murcko_scaffold, properties,
    tanimoto, ChemError, Conformer, Molecule, PropertyRecord, FP_BITS,
};
pub use fingerprint::BitFingerprint;
pub use mol::{Atom, Bond, BondOrder, Mol};
pub use pharmacophore::{PharmacophoreClass, PharmacophoreGraph, PharmacophorePoint};
pub use smiles::{parse_smiles, write_smiles, SmilesError};
