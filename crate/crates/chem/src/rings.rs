//! Ring perception: smallest set of smallest rings plus per-atom ring data.

use std::collections::VecDeque;

use crate::mol::Mol;

#[derive(Debug, Clone, Default)]
pub struct RingInfo {
    /// SSSR rings as atom cycles (consecutive atoms are bonded).
    rings: Vec<Vec<usize>>,
    /// Bond indices per ring, aligned with `rings`.
    ring_bonds: Vec<Vec<usize>>,
    atom_ring_count: Vec<u8>,
    bond_ring_count: Vec<u8>,
    /// Atoms/bonds lying on any cycle (cycle space membership), independent of SSSR.
    atom_in_cycle: Vec<bool>,
    bond_in_cycle: Vec<bool>,
}

impl RingInfo {
    pub fn perceive(mol: &Mol) -> RingInfo {
        let n = mol.atom_count();
        let m = mol.bond_count();
        let bond_in_cycle = cyclic_bonds(mol);
        let mut atom_in_cycle = vec![false; n];
        for (i, bond) in mol.bonds().iter().enumerate() {
            if bond_in_cycle[i] {
                atom_in_cycle[bond.a] = true;
                atom_in_cycle[bond.b] = true;
            }
        }
        let ncomp = mol.components().len();
        let cyclomatic = (m + ncomp).saturating_sub(n);

        let mut candidates: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        if cyclomatic > 0 {
            for (bi, bond) in mol.bonds().iter().enumerate() {
                if !bond_in_cycle[bi] {
                    continue;
                }
                if let Some(path) = shortest_path_avoiding(mol, bond.a, bond.b, bi, &bond_in_cycle) {
                    let mut bonds = path_bonds(mol, &path);
                    bonds.push(bi);
                    candidates.push((path, bonds));
                }
            }
            // Extra candidates from pairs of paths through each atom help
            // for cage-like systems where per-bond cycles are not independent.
            for start in 0..n {
                if !atom_in_cycle[start] {
                    continue;
                }
                candidates.extend(atom_cycles(mol, start, &bond_in_cycle));
            }
        }
        candidates.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.1.cmp(&b.1)));

        let mut basis: Vec<Vec<u64>> = Vec::new();
        let words = m.div_ceil(64).max(1);
        let mut rings = Vec::new();
        let mut ring_bonds = Vec::new();
        let mut seen_sets: Vec<Vec<usize>> = Vec::new();
        for (atoms, bonds) in candidates {
            if rings.len() >= cyclomatic {
                break;
            }
            let mut sorted = bonds.clone();
            sorted.sort_unstable();
            if seen_sets.contains(&sorted) {
                continue;
            }
            seen_sets.push(sorted.clone());
            let mut v = vec![0u64; words];
            for &b in &sorted {
                v[b / 64] |= 1 << (b % 64);
            }
            if insert_independent(&mut basis, v) {
                rings.push(atoms);
                ring_bonds.push(bonds);
            }
        }

        let mut atom_ring_count = vec![0u8; n];
        let mut bond_ring_count = vec![0u8; m];
        for (ring, bonds) in rings.iter().zip(&ring_bonds) {
            for &a in ring {
                atom_ring_count[a] += 1;
            }
            for &b in bonds {
                bond_ring_count[b] += 1;
            }
        }
        RingInfo {
            rings,
            ring_bonds,
            atom_ring_count,
            bond_ring_count,
            atom_in_cycle,
            bond_in_cycle,
        }
    }

    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn ring_bonds(&self) -> &[Vec<usize>] {
        &self.ring_bonds
    }

    pub fn num_rings(&self) -> usize {
        self.rings.len()
    }

    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.atom_in_cycle[atom]
    }

    pub fn bond_in_ring(&self, bond: usize) -> bool {
        self.bond_in_cycle[bond]
    }

    /// Number of SSSR rings containing the atom.
    pub fn atom_ring_count(&self, atom: usize) -> usize {
        self.atom_ring_count[atom] as usize
    }

    pub fn bond_ring_count(&self, bond: usize) -> usize {
        self.bond_ring_count[bond] as usize
    }

    pub fn atom_in_ring_of_size(&self, atom: usize, size: usize) -> bool {
        self.rings.iter().any(|r| r.len() == size && r.contains(&atom))
    }

    pub fn smallest_ring_size(&self, atom: usize) -> Option<usize> {
        self.rings
            .iter()
            .filter(|r| r.contains(&atom))
            .map(|r| r.len())
            .min()
    }
}

/// A bond is cyclic iff it is not a bridge.
fn cyclic_bonds(mol: &Mol) -> Vec<bool> {
    let n = mol.atom_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; mol.bond_count()];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // iterative Tarjan: (node, parent bond, next neighbor index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, pbond, ref mut next)) = stack.last_mut() {
            let nbrs = mol.neighbors(v);
            if *next < nbrs.len() {
                let (w, b) = nbrs[*next];
                *next += 1;
                if b == pbond {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, b, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] > disc[u] {
                        is_bridge[pbond] = true;
                    }
                }
            }
        }
    }
    is_bridge.iter().map(|b| !b).collect()
}

/// BFS shortest path from `from` to `to` over cyclic bonds, not using `skip`.
fn shortest_path_avoiding(
    mol: &Mol,
    from: usize,
    to: usize,
    skip: usize,
    cyclic: &[bool],
) -> Option<Vec<usize>> {
    let n = mol.atom_count();
    let mut prev = vec![usize::MAX; n];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            break;
        }
        let mut nbrs: Vec<_> = mol.neighbors(cur).to_vec();
        nbrs.sort_unstable();
        for (nb, b) in nbrs {
            if b == skip || !cyclic[b] || prev[nb] != usize::MAX {
                continue;
            }
            prev[nb] = cur;
            queue.push_back(nb);
        }
    }
    if prev[to] == usize::MAX {
        return None;
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

fn path_bonds(mol: &Mol, path: &[usize]) -> Vec<usize> {
    path.windows(2)
        .map(|w| mol.bond_between(w[0], w[1]).expect("path follows bonds"))
        .collect()
}

/// Odd/even cycles through `start` built from a BFS tree (Horton-style candidates).
fn atom_cycles(mol: &Mol, start: usize, cyclic: &[bool]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = mol.atom_count();
    let mut prev = vec![usize::MAX; n];
    let mut dist = vec![usize::MAX; n];
    prev[start] = start;
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut order = Vec::new();
    while let Some(cur) = queue.pop_front() {
        order.push(cur);
        for &(nb, b) in mol.neighbors(cur) {
            if !cyclic[b] || dist[nb] != usize::MAX {
                continue;
            }
            dist[nb] = dist[cur] + 1;
            prev[nb] = cur;
            queue.push_back(nb);
        }
    }
    let path_to = |mut v: usize| {
        let mut p = vec![v];
        while v != start {
            v = prev[v];
            p.push(v);
        }
        p
    };
    let mut out = Vec::new();
    for (bi, bond) in mol.bonds().iter().enumerate() {
        if !cyclic[bi] || dist[bond.a] == usize::MAX || dist[bond.b] == usize::MAX {
            continue;
        }
        if prev[bond.a] == bond.b || prev[bond.b] == bond.a {
            continue;
        }
        let pa = path_to(bond.a);
        let pb = path_to(bond.b);
        // paths must only share the start atom
        let shared = pa.iter().filter(|x| pb.contains(x)).count();
        if shared != 1 {
            continue;
        }
        let mut ring: Vec<usize> = pa.iter().rev().copied().collect(); // start .. a
        ring.extend(pb.iter().copied().take(pb.len() - 1)); // b .. (before start)
        let mut bonds = path_bonds(mol, &ring);
        bonds.push(mol.bond_between(*ring.last().unwrap(), ring[0]).unwrap());
        out.push((ring, bonds));
    }
    out
}

/// Gaussian elimination over GF(2); returns true if `v` was independent.
fn insert_independent(basis: &mut Vec<Vec<u64>>, mut v: Vec<u64>) -> bool {
    for row in basis.iter() {
        let pivot = leading_bit(row);
        if let Some(p) = pivot {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x ^= y;
                }
            }
        }
    }
    if leading_bit(&v).is_none() {
        return false;
    }
    basis.push(v);
    // keep rows with distinct pivots: reduce existing rows by new one
    let last = basis.len() - 1;
    let p = leading_bit(&basis[last]).unwrap();
    for i in 0..last {
        if basis[i][p / 64] >> (p % 64) & 1 == 1 {
            let (head, tail) = basis.split_at_mut(last);
            for (x, y) in head[i].iter_mut().zip(&tail[0]) {
                *x ^= y;
            }
        }
    }
    true
}

fn leading_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use crate::smiles::parse_smiles;

    fn ring_sizes(smi: &str) -> Vec<usize> {
        let m = parse_smiles(smi).unwrap();
        let mut s: Vec<usize> = m.rings().rings().iter().map(|r| r.len()).collect();
        s.sort_unstable();
        s
    }

    #[test]
    fn simple_systems() {
        assert_eq!(ring_sizes("CCCC"), Vec::<usize>::new());
        assert_eq!(ring_sizes("c1ccccc1"), vec![6]);
        assert_eq!(ring_sizes("c1ccc2ccccc2c1"), vec![6, 6]);
        assert_eq!(ring_sizes("C1CC2CCC1C2"), vec![5, 5]);
        assert_eq!(ring_sizes("c1ccccc1-c1ccccc1"), vec![6, 6]);
        assert_eq!(ring_sizes("C12C3C4C1C5C2C3C45"), vec![4, 4, 4, 4, 4]);
    }

    #[test]
    fn ring_membership() {
        let m = parse_smiles("c1ccccc1CC").unwrap();
        let r = m.rings();
        assert!(r.atom_in_ring(0));
        assert!(!r.atom_in_ring(6));
        assert_eq!(r.smallest_ring_size(2), Some(6));
        assert_eq!(r.atom_ring_count(7), 0);
    }
}
