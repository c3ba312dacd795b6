//! Reaction templates: `id<TAB>arity<TAB>reaction-SMARTS` lines.

use std::collections::HashMap;
use std::path::Path;

use pharmasyn_chem::reaction::{parse_reaction, Reaction, ReactionError};
use pharmasyn_chem::Molecule;
use sha2::{Digest, Sha256};

use crate::error::SynthesisError;

#[derive(Debug, Clone)]
pub struct ReactionTemplate {
    pub id: u32,
    pub smarts: String,
    pub arity: usize,
    rxn: Reaction,
}

impl ReactionTemplate {
    pub fn new(id: u32, arity: usize, smarts: &str) -> Result<Self, String> {
        let rxn = parse_reaction(smarts).map_err(|e| e.to_string())?;
        if !(1..=2).contains(&arity) {
            return Err(format!("arity must be 1 or 2, got {arity}"));
        }
        if rxn.arity() != arity {
            return Err(format!("declared arity {arity} but SMARTS has {} reactants", rxn.arity()));
        }
        Ok(ReactionTemplate {
            id,
            smarts: smarts.to_string(),
            arity,
            rxn,
        })
    }

    /// Whether reactant `slot` of the template matches `mol`.
    pub fn slot_matches(&self, slot: usize, mol: &Molecule) -> bool {
        self.rxn.reactant_matches(slot, mol.mol())
    }

    fn check_arity(&self, got: usize) -> Result<(), SynthesisError> {
        if got != self.arity {
            return Err(SynthesisError::ArityMismatch {
                template: self.id,
                expected: self.arity,
                got,
            });
        }
        Ok(())
    }
}

/// True iff every reactant matches its pattern in order.
pub fn applicable(t: &ReactionTemplate, reactants: &[&Molecule]) -> Result<bool, SynthesisError> {
    t.check_arity(reactants.len())?;
    Ok(reactants.iter().enumerate().all(|(i, m)| t.slot_matches(i, m)))
}

/// Runs the transform and keeps the candidate with the smallest canonical SMILES.
pub fn apply(t: &ReactionTemplate, reactants: &[&Molecule]) -> Result<Molecule, SynthesisError> {
    t.check_arity(reactants.len())?;
    let mols: Vec<_> = reactants.iter().map(|m| m.mol()).collect();
    match t.rxn.run(&mols) {
        Ok(products) => match products.into_iter().next() {
            Some((_, mol)) => Ok(Molecule::from_mol(mol)),
            None => Err(SynthesisError::NoProduct { template: t.id }),
        },
        Err(ReactionError::Sanitize) => Err(SynthesisError::Sanitize { template: t.id }),
        Err(ReactionError::ArityMismatch { expected, got }) => Err(SynthesisError::ArityMismatch {
            template: t.id,
            expected,
            got,
        }),
        Err(ReactionError::Parse(m)) => Err(SynthesisError::InvalidTree(m)),
    }
}

/// Ordered template set. Reaction vocabulary index 0 is NONE; template k
/// (file order) has index k + 1.
#[derive(Debug, Clone)]
pub struct ReactionTemplateSet {
    templates: Vec<ReactionTemplate>,
    index: HashMap<u32, usize>,
}

pub const NONE_INDEX: usize = 0;

impl ReactionTemplateSet {
    pub fn new(templates: Vec<ReactionTemplate>) -> Result<Self, SynthesisError> {
        if templates.is_empty() {
            return Err(SynthesisError::EmptyTemplates);
        }
        let mut index = HashMap::new();
        for (k, t) in templates.iter().enumerate() {
            if index.insert(t.id, k).is_some() {
                return Err(SynthesisError::DuplicateId { line: k + 1, id: t.id });
            }
        }
        Ok(ReactionTemplateSet { templates, index })
    }

    pub fn parse(text: &str) -> Result<Self, SynthesisError> {
        let mut out = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 3 {
                return Err(SynthesisError::Parse {
                    line,
                    message: "expected 'id<TAB>arity<TAB>SMARTS'".into(),
                });
            }
            let bad = |message: String| SynthesisError::Parse { line, message };
            let id: u32 = f[0].trim().parse().map_err(|_| bad(format!("bad id '{}'", f[0])))?;
            let arity: usize = f[1].trim().parse().map_err(|_| bad(format!("bad arity '{}'", f[1])))?;
            out.push(ReactionTemplate::new(id, arity, f[2].trim()).map_err(bad)?);
        }
        Self::new(out)
    }

    pub fn load(path: &Path) -> Result<Self, SynthesisError> {
        let text = std::fs::read_to_string(path).map_err(|e| SynthesisError::io(path, e))?;
        Self::parse(&text)
    }

    /// The bundled 20-template desk set.
    pub fn desk() -> Self {
        Self::parse(DESK_TEMPLATES).expect("bundled templates are valid")
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn templates(&self) -> &[ReactionTemplate] {
        &self.templates
    }

    pub fn get(&self, id: u32) -> Result<&ReactionTemplate, SynthesisError> {
        self.index
            .get(&id)
            .map(|&k| &self.templates[k])
            .ok_or(SynthesisError::UnknownReaction(id))
    }

    /// Vocabulary size including NONE.
    pub fn vocab_size(&self) -> usize {
        self.templates.len() + 1
    }

    pub fn vocab_index(&self, reaction: Option<u32>) -> Result<usize, SynthesisError> {
        match reaction {
            None => Ok(NONE_INDEX),
            Some(id) => self
                .index
                .get(&id)
                .map(|k| k + 1)
                .ok_or(SynthesisError::UnknownReaction(id)),
        }
    }

    /// Inverse of [`vocab_index`](Self::vocab_index).
    pub fn reaction_at(&self, index: usize) -> Option<Option<u32>> {
        match index {
            NONE_INDEX => Some(None),
            k => self.templates.get(k - 1).map(|t| Some(t.id)),
        }
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.templates {
            h.update(format!("{}\t{}\t{}\n", t.id, t.arity, t.smarts).as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub const DESK_TEMPLATES: &str = include_str!("../data/templates.tsv");
