//! Reaction SMARTS parsing and application.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::aromaticity;
use crate::element;
use crate::mol::{Atom, BondOrder, Mol};
use crate::smarts::{parse_smarts, BondPrim, Expr, Smarts, SmartsError};
use crate::smiles::{parse_smiles, write_smiles};

/// Upper bound on reactant match combinations explored per application.
const MAX_COMBINATIONS: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReactionError {
    #[error("invalid reaction SMARTS: {0}")]
    Parse(String),
    #[error("reaction expects {expected} reactants, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("reaction produced no sanitizable product")]
    Sanitize,
}

impl From<SmartsError> for ReactionError {
    fn from(e: SmartsError) -> Self {
        ReactionError::Parse(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Reaction {
    pub reactants: Vec<Smarts>,
    pub product: Smarts,
    /// map number -> (reactant index, query atom index)
    mapped: HashMap<u16, (usize, usize)>,
}

/// Parses `reactants>>product` (an agent section between the arrows is ignored).
pub fn parse_reaction(text: &str) -> Result<Reaction, ReactionError> {
    let parts: Vec<&str> = text.trim().split('>').collect();
    if parts.len() != 3 {
        return Err(ReactionError::Parse("expected 'reactants>>product'".into()));
    }
    let reactant_side = parts[0].trim();
    let product_side = parts[2].trim();
    if reactant_side.is_empty() || product_side.is_empty() {
        return Err(ReactionError::Parse("empty reaction side".into()));
    }
    let all = parse_smarts(reactant_side)?;
    let reactants: Vec<Smarts> = (0..all.component_count())
        .map(|c| all.component_pattern(c).0)
        .collect();
    let product = parse_smarts(product_side)?;

    let mut mapped = HashMap::new();
    for (ri, r) in reactants.iter().enumerate() {
        for (ai, a) in r.atoms.iter().enumerate() {
            if a.map > 0 && mapped.insert(a.map, (ri, ai)).is_some() {
                return Err(ReactionError::Parse(format!("duplicate map number {}", a.map)));
            }
        }
    }
    let mut seen = Vec::new();
    for a in &product.atoms {
        if a.map > 0 {
            if seen.contains(&a.map) {
                return Err(ReactionError::Parse(format!("duplicate product map {}", a.map)));
            }
            seen.push(a.map);
        } else if a.expr.element().is_none() {
            return Err(ReactionError::Parse("unmapped product atom without element".into()));
        } else if a.expr.aromatic() == Some(true) {
            return Err(ReactionError::Parse("new aromatic product atoms are not supported".into()));
        }
    }
    Ok(Reaction {
        reactants,
        product,
        mapped,
    })
}

impl Reaction {
    pub fn arity(&self) -> usize {
        self.reactants.len()
    }

    pub fn reactant_matches(&self, index: usize, mol: &Mol) -> bool {
        self.reactants[index].has_match(mol)
    }

    /// Whether every reactant matches its pattern, in order.
    pub fn applicable(&self, reactants: &[&Mol]) -> Result<bool, ReactionError> {
        self.check_arity(reactants.len())?;
        Ok(reactants
            .iter()
            .enumerate()
            .all(|(i, m)| self.reactant_matches(i, m)))
    }

    fn check_arity(&self, got: usize) -> Result<(), ReactionError> {
        if got != self.arity() {
            return Err(ReactionError::ArityMismatch {
                expected: self.arity(),
                got,
            });
        }
        Ok(())
    }

    /// Runs the transform and returns distinct sanitized products keyed and
    /// sorted by canonical SMILES. An empty result means no reactant match.
    pub fn run(&self, reactants: &[&Mol]) -> Result<Vec<(String, Mol)>, ReactionError> {
        self.check_arity(reactants.len())?;
        let mut per_reactant = Vec::new();
        for (i, m) in reactants.iter().enumerate() {
            let matches = self.reactants[i].matches(m);
            if matches.is_empty() {
                return Ok(Vec::new());
            }
            per_reactant.push(matches);
        }
        let kekule: Vec<Mol> = reactants
            .iter()
            .map(|m| {
                let mut k = (*m).clone();
                aromaticity::kekulize(&mut k).map(|_| k)
            })
            .collect::<Result<_, _>>()
            .map_err(|_| ReactionError::Sanitize)?;

        let mut products: BTreeMap<String, Mol> = BTreeMap::new();
        let mut idx = vec![0usize; per_reactant.len()];
        let mut combos = 0;
        loop {
            combos += 1;
            let chosen: Vec<&[usize]> = idx
                .iter()
                .enumerate()
                .map(|(r, &k)| per_reactant[r][k].as_slice())
                .collect();
            if let Some(p) = self.build_product(&kekule, &chosen) {
                let smi = write_smiles(&p);
                products.entry(smi).or_insert(p);
            }
            if combos >= MAX_COMBINATIONS || !advance(&mut idx, &per_reactant) {
                break;
            }
        }
        if products.is_empty() {
            return Err(ReactionError::Sanitize);
        }
        Ok(products.into_iter().collect())
    }

    fn build_product(&self, reactants: &[Mol], matches: &[&[usize]]) -> Option<Mol> {
        // global atom ids: (reactant, atom)
        let mut mol = Mol::new();
        let mut index: Vec<Vec<Option<usize>>> = Vec::new();
        let mut deleted: Vec<Vec<bool>> = Vec::new();
        for (r, m) in reactants.iter().enumerate() {
            let mut del = vec![false; m.atom_count()];
            for (qa, &ta) in matches[r].iter().enumerate() {
                if self.reactants[r].atoms[qa].map == 0 {
                    del[ta] = true;
                }
            }
            let mut idx = vec![None; m.atom_count()];
            for (i, atom) in m.atoms().iter().enumerate() {
                if !del[i] {
                    idx[i] = Some(mol.add_atom(atom.clone()));
                }
            }
            index.push(idx);
            deleted.push(del);
        }
        let old_valence: Vec<u8> = {
            let mut v = vec![0u8; mol.atom_count()];
            for (r, m) in reactants.iter().enumerate() {
                for i in 0..m.atom_count() {
                    if let Some(g) = index[r][i] {
                        v[g] = m.bond_valence(i);
                    }
                }
            }
            v
        };

        // product template atom -> product atom
        let mut tmpl_to_atom = vec![0usize; self.product.atoms.len()];
        let mut touched = vec![false; mol.atom_count()];
        let mut charge_changed = Vec::new();
        for (pi, pa) in self.product.atoms.iter().enumerate() {
            if pa.map > 0 {
                let &(r, qa) = self.mapped.get(&pa.map)?;
                let ta = matches[r][qa];
                let g = index[r][ta]?;
                tmpl_to_atom[pi] = g;
                let atom = mol.atom_mut(g);
                if let Some(e) = pa.expr.element() {
                    atom.element = e;
                }
                if let Some(c) = pa.expr.charge() {
                    if c != atom.charge {
                        atom.charge = c;
                        charge_changed.push(g);
                    }
                }
                touched[g] = true;
            } else {
                let mut atom = Atom::new(pa.expr.element().unwrap());
                atom.charge = pa.expr.charge().unwrap_or(0);
                let g = mol.add_atom(atom);
                touched.push(true);
                tmpl_to_atom[pi] = g;
            }
        }

        // bonds from reactants, skipping deleted atoms and template-removed bonds
        let mut bond_set: BTreeMap<(usize, usize), BondOrder> = BTreeMap::new();
        for (r, m) in reactants.iter().enumerate() {
            let q = &self.reactants[r];
            let mut query_of = vec![usize::MAX; m.atom_count()];
            for (qa, &ta) in matches[r].iter().enumerate() {
                query_of[ta] = qa;
            }
            for bond in m.bonds() {
                let (Some(a), Some(b)) = (index[r][bond.a], index[r][bond.b]) else {
                    continue;
                };
                let (qa, qb) = (query_of[bond.a], query_of[bond.b]);
                if qa != usize::MAX && qb != usize::MAX && q.bond_between(qa, qb).is_some() {
                    // a template bond: survives only if the product template keeps it
                    let (ma, mb) = (q.atoms[qa].map, q.atoms[qb].map);
                    let pa = self.product.atoms.iter().position(|x| x.map == ma && ma > 0);
                    let pb = self.product.atoms.iter().position(|x| x.map == mb && mb > 0);
                    let kept = match (pa, pb) {
                        (Some(pa), Some(pb)) => self.product.bond_between(pa, pb).is_some(),
                        _ => false,
                    };
                    if !kept {
                        continue;
                    }
                }
                bond_set.insert(key(a, b), bond.order);
            }
        }
        for pb in &self.product.bonds {
            let (a, b) = (tmpl_to_atom[pb.a], tmpl_to_atom[pb.b]);
            let existing = bond_set.get(&key(a, b)).copied();
            let order = match (&pb.expr, existing) {
                (Expr::Prim(BondPrim::Single), _) => BondOrder::Single,
                (Expr::Prim(BondPrim::Double), _) => BondOrder::Double,
                (Expr::Prim(BondPrim::Triple), _) => BondOrder::Triple,
                (_, Some(o)) => o,
                _ => BondOrder::Single,
            };
            bond_set.insert(key(a, b), order);
        }
        for (&(a, b), &order) in &bond_set {
            mol.add_bond(a, b, order);
        }

        // hydrogens from valence bookkeeping
        for g in 0..mol.atom_count() {
            if !touched[g] {
                continue;
            }
            let new_val = mol.bond_valence(g) as i32;
            let atom = mol.atom(g).clone();
            let h = if g >= old_valence.len() || charge_changed.contains(&g) {
                let allowed = element::allowed_valences(atom.element, atom.charge);
                let v = allowed.iter().find(|&&v| v as i32 >= new_val)?;
                *v as i32 - new_val
            } else {
                atom.hydrogens as i32 + old_valence[g] as i32 - new_val
            };
            if h < 0 {
                return None;
            }
            mol.atom_mut(g).hydrogens = h as u8;
        }

        // keep only components that contain product template atoms
        let comps = mol.components();
        let mut keep = vec![false; mol.atom_count()];
        for comp in comps {
            if comp.iter().any(|&a| tmpl_to_atom.contains(&a)) {
                for a in comp {
                    keep[a] = true;
                }
            }
        }
        let (mut out, _) = mol.subgraph(&keep);
        for i in 0..out.atom_count() {
            out.atom_mut(i).aromatic = false;
        }
        aromaticity::perceive(&mut out);
        if out.valence_violation().is_some() {
            return None;
        }
        // round-trip through SMILES as a sanitization check
        let smi = write_smiles(&out);
        parse_smiles(&smi).ok()
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn advance(idx: &mut [usize], options: &[Vec<Vec<usize>>]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < options[k].len() {
            return true;
        }
        idx[k] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    const AMIDE: &str = "[C:1](=[O:2])[OX2H1].[NX3;H2,H1;!$(NC=O):3]>>[C:1](=[O:2])[N:3]";

    fn products(rxn: &str, smis: &[&str]) -> Vec<String> {
        let r = parse_reaction(rxn).unwrap();
        let mols: Vec<Mol> = smis.iter().map(|s| parse_smiles(s).unwrap()).collect();
        let refs: Vec<&Mol> = mols.iter().collect();
        r.run(&refs).unwrap().into_iter().map(|(s, _)| s).collect()
    }

    #[test]
    fn amide_coupling() {
        let p = products(AMIDE, &["CC(=O)O", "CN"]);
        assert_eq!(p, vec![write_smiles(&parse_smiles("CNC(C)=O").unwrap())]);
    }

    #[test]
    fn aromatic_reactants() {
        let suzuki = "[c:1][Br,I].[c:2]B(O)O>>[c:1]-[c:2]";
        let p = products(suzuki, &["Brc1ccccc1", "OB(O)c1ccncc1"]);
        assert_eq!(p, vec![write_smiles(&parse_smiles("c1ccc(cc1)-c1ccncc1").unwrap())]);
    }

    #[test]
    fn arity_and_no_match() {
        let r = parse_reaction(AMIDE).unwrap();
        let m = parse_smiles("C").unwrap();
        assert_eq!(r.applicable(&[&m, &m]).unwrap(), false);
        assert!(matches!(
            r.applicable(&[&m]),
            Err(ReactionError::ArityMismatch { expected: 2, got: 1 })
        ));
        assert!(r.run(&[&m, &m]).unwrap().is_empty());
    }

    #[test]
    fn ring_forming() {
        // amine + 1,4-dibromide style cyclization, unimolecular
        let r = "[NH2:1][CH2:2][CH2:3][CH2:4][CH2:5][Br]>>[NH1:1]1[CH2:2][CH2:3][CH2:4][CH2:5]1";
        let p = products(r, &["NCCCCBr"]);
        assert_eq!(p, vec!["C1CCNC1".to_string()]);
    }

    #[test]
    fn bad_templates() {
        assert!(parse_reaction("CC").is_err());
        assert!(parse_reaction("[C:1]>>[C:1][C:1]").is_err());
    }
}
