//! Kekulization and Hückel-style aromaticity perception.
//!
//! Molecules are normalized by kekulizing any aromatic input and then
//! re-perceiving aromaticity, so equivalent Kekulé and aromatic spellings
//! end up with identical flags.

use crate::mol::{BondOrder, Mol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KekulizeError {
    pub atom: usize,
}

/// Replaces aromatic bonds by an alternating single/double assignment and
/// clears aromatic flags.
pub fn kekulize(mol: &mut Mol) -> Result<(), KekulizeError> {
    let n = mol.atom_count();
    let needs: Vec<bool> = (0..n).map(|i| mol.aromatic_pi_needed(i)).collect();
    let arom_bonds: Vec<usize> = (0..mol.bond_count())
        .filter(|&b| mol.bond(b).order == BondOrder::Aromatic)
        .collect();
    if arom_bonds.is_empty() {
        for i in 0..n {
            mol.atom_mut(i).aromatic = false;
        }
        return Ok(());
    }
    // candidate edges for the matching
    let mut options: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &b in &arom_bonds {
        let bond = mol.bond(b);
        if needs[bond.a] && needs[bond.b] {
            options[bond.a].push((bond.b, b));
            options[bond.b].push((bond.a, b));
        }
    }
    let mut matched = vec![None::<usize>; n];
    let pending: Vec<usize> = (0..n).filter(|&i| needs[i]).collect();
    if !solve_matching(&pending, &options, &mut matched) {
        let atom = pending
            .iter()
            .copied()
            .find(|&i| matched[i].is_none())
            .unwrap_or(pending[0]);
        return Err(KekulizeError { atom });
    }
    for &b in &arom_bonds {
        mol.set_bond_order(b, BondOrder::Single);
    }
    for i in 0..n {
        if let Some(b) = matched[i] {
            mol.set_bond_order(b, BondOrder::Double);
        }
        mol.atom_mut(i).aromatic = false;
    }
    Ok(())
}

fn solve_matching(
    pending: &[usize],
    options: &[Vec<(usize, usize)>],
    matched: &mut [Option<usize>],
) -> bool {
    // most-constrained unmatched atom first
    let mut best: Option<(usize, usize)> = None;
    for &a in pending {
        if matched[a].is_some() {
            continue;
        }
        let free = options[a].iter().filter(|(nb, _)| matched[*nb].is_none()).count();
        if free == 0 {
            return false;
        }
        if best.is_none_or(|(_, f)| free < f) {
            best = Some((a, free));
        }
    }
    let Some((atom, _)) = best else {
        return true;
    };
    for &(nb, b) in &options[atom] {
        if matched[nb].is_some() {
            continue;
        }
        matched[atom] = Some(b);
        matched[nb] = Some(b);
        if solve_matching(pending, options, matched) {
            return true;
        }
        matched[atom] = None;
        matched[nb] = None;
    }
    false
}

/// Pi electrons an atom contributes to a ring, or `None` if it breaks aromaticity.
fn pi_electrons(mol: &Mol, i: usize) -> Option<u8> {
    let atom = mol.atom(i);
    let rings = mol.rings();
    let mut doubles = Vec::new();
    for &(nb, b) in mol.neighbors(i) {
        match mol.bond(b).order {
            BondOrder::Triple => return None,
            BondOrder::Double => doubles.push(nb),
            _ => {}
        }
    }
    match doubles.as_slice() {
        [partner] => {
            if rings.atom_in_ring(*partner) {
                Some(1)
            } else if matches!(mol.atom(*partner).element, 7 | 8 | 16) {
                Some(0)
            } else {
                None
            }
        }
        [] => {
            let conn = mol.connectivity(i);
            match (atom.element, atom.charge) {
                (7, 0) | (15, 0) if conn == 3 => Some(2),
                (8, 0) | (16, 0) | (34, 0) if conn == 2 => Some(2),
                (6, -1) => Some(2),
                (6, 1) => Some(0),
                (5, 0) if conn == 3 => Some(0),
                _ => None,
            }
        }
        _ => None,
    }
}

fn huckel(total: u32) -> bool {
    total >= 2 && (total - 2) % 4 == 0
}

/// Marks aromatic rings on a Kekulé (non-aromatic) molecule.
pub fn perceive(mol: &mut Mol) {
    let n = mol.atom_count();
    let electrons: Vec<Option<u8>> = (0..n).map(|i| pi_electrons(mol, i)).collect();
    let rings = mol.rings().clone();
    let ring_sets = rings.rings();
    let mut aromatic_ring = vec![false; ring_sets.len()];
    for (k, ring) in ring_sets.iter().enumerate() {
        if let Some(total) = ring_electrons(ring, &electrons) {
            aromatic_ring[k] = huckel(total);
        }
    }
    // fused pairs that are only aromatic as a whole (e.g. azulene)
    for a in 0..ring_sets.len() {
        for b in (a + 1)..ring_sets.len() {
            if aromatic_ring[a] && aromatic_ring[b] {
                continue;
            }
            let shared = rings.ring_bonds()[a]
                .iter()
                .filter(|x| rings.ring_bonds()[b].contains(x))
                .count();
            if shared != 1 {
                continue;
            }
            let mut union: Vec<usize> = ring_sets[a].clone();
            for &x in &ring_sets[b] {
                if !union.contains(&x) {
                    union.push(x);
                }
            }
            if let Some(total) = ring_electrons(&union, &electrons) {
                if huckel(total) {
                    aromatic_ring[a] = true;
                    aromatic_ring[b] = true;
                }
            }
        }
    }
    for (k, is_arom) in aromatic_ring.iter().enumerate() {
        if !is_arom {
            continue;
        }
        for &a in &ring_sets[k] {
            mol.atom_mut(a).aromatic = true;
        }
        for &b in &rings.ring_bonds()[k] {
            mol.set_bond_order(b, BondOrder::Aromatic);
        }
    }
}

fn ring_electrons(ring: &[usize], electrons: &[Option<u8>]) -> Option<u32> {
    ring.iter()
        .map(|&a| electrons[a].map(u32::from))
        .sum::<Option<u32>>()
}

/// Kekulize then re-perceive.
pub fn normalize(mol: &mut Mol) -> Result<(), KekulizeError> {
    kekulize(mol)?;
    perceive(mol);
    Ok(())
}
