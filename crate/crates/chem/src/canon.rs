//! Canonical atom ranking by iterative invariant refinement with tie breaking.

use crate::mol::Mol;

/// Returns a canonical rank (0-based, unique) for every atom.
pub fn canonical_ranks(mol: &Mol) -> Vec<usize> {
    let n = mol.atom_count();
    let rings = mol.rings();
    let initial: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            vec![
                mol.degree(i) as i64,
                a.element as i64,
                a.isotope as i64,
                a.charge as i64,
                a.hydrogens as i64,
                a.aromatic as i64,
                rings.atom_ring_count(i) as i64,
                rings.atom_in_ring(i) as i64,
                a.map as i64,
            ]
        })
        .collect();
    let mut ranks = rank_keys(&initial);
    ranks = refine(mol, ranks);
    loop {
        let classes = count_classes(&ranks);
        if classes == n {
            return ranks;
        }
        // break the tie in the lowest tied class using the lowest-index atom
        let mut sizes = vec![0usize; n];
        for &r in &ranks {
            sizes[r] += 1;
        }
        let tied_rank = (0..n).find(|&r| sizes[r] > 1).unwrap();
        let chosen = (0..n).find(|&i| ranks[i] == tied_rank).unwrap();
        let keys: Vec<Vec<i64>> = (0..n)
            .map(|i| vec![ranks[i] as i64, i64::from(i != chosen)])
            .collect();
        ranks = refine(mol, rank_keys(&keys));
    }
}

fn count_classes(ranks: &[usize]) -> usize {
    let mut r = ranks.to_vec();
    r.sort_unstable();
    r.dedup();
    r.len()
}

fn rank_keys<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut uniq: Vec<K> = keys.to_vec();
    uniq.sort();
    uniq.dedup();
    keys.iter()
        .map(|k| uniq.binary_search(k).unwrap())
        .collect()
}

fn refine(mol: &Mol, mut ranks: Vec<usize>) -> Vec<usize> {
    let n = mol.atom_count();
    let mut classes = count_classes(&ranks);
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..n)
            .map(|i| {
                let mut nb: Vec<(usize, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(w, b)| (ranks[w], mol.bond(b).order.code()))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = rank_keys(&keys);
        let c = count_classes(&next);
        ranks = next;
        if c == classes {
            return ranks;
        }
        classes = c;
    }
}
