//! Building-block catalog: `id<TAB>SMILES` lines, canonicalized and fingerprinted.

use std::collections::HashMap;
use std::path::Path;

use pharmasyn_chem::{canonicalize, morgan_fp, BitFingerprint, Molecule, FP_BITS};
use sha2::{Digest, Sha256};

use crate::error::SynthesisError;

/// Fingerprint radius used for block tokens and retrieval.
pub const BLOCK_FP_RADIUS: u32 = 3;

#[derive(Debug, Clone)]
pub struct BuildingBlock {
    pub id: u32,
    pub mol: Molecule,
    pub fp: BitFingerprint,
}

#[derive(Debug, Clone)]
pub struct BuildingBlockCatalog {
    blocks: Vec<BuildingBlock>,
    index: HashMap<u32, usize>,
}

impl BuildingBlockCatalog {
    /// Builds from `(id, smiles)` pairs; `line` numbers in errors are 1-based positions.
    pub fn from_entries<'a>(
        entries: impl IntoIterator<Item = (usize, u32, &'a str)>,
    ) -> Result<Self, SynthesisError> {
        let mut blocks = Vec::new();
        let mut index = HashMap::new();
        let mut by_smiles: HashMap<String, u32> = HashMap::new();
        for (line, id, smiles) in entries {
            let mol = canonicalize(smiles).map_err(|e| SynthesisError::Parse {
                line,
                message: e.to_string(),
            })?;
            if mol.heavy_atom_count() == 0 {
                return Err(SynthesisError::Parse {
                    line,
                    message: "empty molecule".into(),
                });
            }
            if let Some(&first) = by_smiles.get(mol.smiles()) {
                return Err(SynthesisError::DuplicateEntry {
                    line,
                    smiles: mol.smiles().to_string(),
                    first,
                });
            }
            if index.insert(id, blocks.len()).is_some() {
                return Err(SynthesisError::DuplicateId { line, id });
            }
            by_smiles.insert(mol.smiles().to_string(), id);
            let fp = morgan_fp(&mol, BLOCK_FP_RADIUS, FP_BITS);
            blocks.push(BuildingBlock { id, mol, fp });
        }
        if blocks.is_empty() {
            return Err(SynthesisError::EmptyCatalog);
        }
        Ok(BuildingBlockCatalog { blocks, index })
    }

    /// Parses TSV text. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, SynthesisError> {
        let mut entries = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let mut fields = l.split('\t');
            let (Some(id), Some(smiles), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(SynthesisError::Parse {
                    line,
                    message: "expected 'id<TAB>SMILES'".into(),
                });
            };
            let id: u32 = id.trim().parse().map_err(|_| SynthesisError::Parse {
                line,
                message: format!("bad id '{id}'"),
            })?;
            entries.push((line, id, smiles.trim()));
        }
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self, SynthesisError> {
        let text = std::fs::read_to_string(path).map_err(|e| SynthesisError::io(path, e))?;
        Self::parse(&text)
    }

    /// The bundled ~300-block desk catalog.
    pub fn desk() -> Self {
        Self::parse(DESK_CATALOG).expect("bundled catalog is valid")
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[BuildingBlock] {
        &self.blocks
    }

    pub fn get(&self, id: u32) -> Result<&BuildingBlock, SynthesisError> {
        self.index
            .get(&id)
            .map(|&i| &self.blocks[i])
            .ok_or(SynthesisError::UnknownBlock(id))
    }

    /// Position of `id` in catalog order.
    pub fn position(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// SHA-256 over the canonical `id<TAB>SMILES` lines, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for b in &self.blocks {
            h.update(format!("{}\t{}\n", b.id, b.mol.smiles()).as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for b in &self.blocks {
            s.push_str(&format!("{}\t{}\n", b.id, b.mol.smiles()));
        }
        s
    }
}

pub const DESK_CATALOG: &str = include_str!("../data/desk_catalog.tsv");
