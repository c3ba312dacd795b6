//! Bemis–Murcko scaffolds.

use crate::mol::{BondOrder, Mol};

/// Ring systems plus linkers, keeping atoms double-bonded to them.
/// Acyclic molecules give an empty molecule.
pub fn murcko(mol: &Mol) -> Mol {
    let n = mol.atom_count();
    let rings = mol.rings();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|i| mol.degree(i)).collect();
    // prune terminal non-ring atoms until only rings and linkers remain
    let mut stack: Vec<usize> = (0..n)
        .filter(|&i| !rings.atom_in_ring(i) && degree[i] <= 1)
        .collect();
    while let Some(i) = stack.pop() {
        if !alive[i] {
            continue;
        }
        alive[i] = false;
        for &(w, _) in mol.neighbors(i) {
            if alive[w] {
                degree[w] -= 1;
                if !rings.atom_in_ring(w) && degree[w] <= 1 {
                    stack.push(w);
                }
            }
        }
    }
    let core = alive.clone();
    for i in 0..n {
        if core[i] {
            continue;
        }
        let exo_double = mol.neighbors(i).iter().any(|&(w, b)| {
            core[w] && mol.bond(b).order == BondOrder::Double && mol.degree(i) == 1
        });
        if exo_double {
            alive[i] = true;
        }
    }
    let (mut out, map) = mol.subgraph(&alive);
    // removed neighbours become hydrogens
    for i in 0..n {
        let Some(j) = map[i] else { continue };
        let lost: u8 = mol
            .neighbors(i)
            .iter()
            .filter(|(w, _)| map[*w].is_none())
            .map(|&(_, b)| mol.bond(b).order.valence_units())
            .sum();
        out.atom_mut(j).hydrogens += lost;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::{parse_smiles, write_smiles};

    fn scaffold(s: &str) -> String {
        write_smiles(&murcko(&parse_smiles(s).unwrap()))
    }

    fn canon(s: &str) -> String {
        write_smiles(&parse_smiles(s).unwrap())
    }

    #[test]
    fn reference_scaffolds() {
        // expected outputs from an established Murcko implementation
        assert_eq!(scaffold("CC(=O)c1ccccc1"), canon("c1ccccc1"));
        assert_eq!(scaffold("O=C1CCCCC1C"), canon("O=C1CCCCC1"));
        assert_eq!(scaffold("c1ccccc1CC(=O)Nc1ccccc1"), canon("O=C(Cc1ccccc1)Nc1ccccc1"));
        assert_eq!(scaffold("Cn1cccc1"), canon("c1cc[nH]c1"));
        assert_eq!(scaffold("CCCCCC"), "");
        assert_eq!(scaffold("Cc1ccccc1"), canon("c1ccccc1"));
        assert_eq!(scaffold("O=C(O)c1ccccc1"), canon("c1ccccc1"));
        assert_eq!(scaffold("C1CC1C=C"), canon("C1CC1"));
    }
}
