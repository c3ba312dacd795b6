//! Molecular graph with implicit hydrogens.

use std::sync::OnceLock;

use crate::element;
use crate::rings::RingInfo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Integer contribution to the sigma+pi valence; aromatic bonds count
    /// their sigma part only (the pi part is tracked per atom).
    pub fn valence_units(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    /// Bond order as a float (1.5 for aromatic).
    pub fn as_f64(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: u8,
    pub charge: i8,
    /// Total hydrogen count (all hydrogens are implicit).
    pub hydrogens: u8,
    pub aromatic: bool,
    pub isotope: u16,
    /// Atom-map number (reaction templates); zero for ordinary molecules.
    pub map: u16,
}

impl Atom {
    pub fn new(element: u8) -> Self {
        Atom {
            element,
            charge: 0,
            hydrogens: 0,
            aromatic: false,
            isotope: 0,
            map: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Heavy-atom molecular graph. Ring perception is cached and reset by any
/// structural edit.
#[derive(Debug, Default)]
pub struct Mol {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adj: Vec<Vec<(usize, usize)>>,
    rings: OnceLock<RingInfo>,
}

impl Clone for Mol {
    fn clone(&self) -> Self {
        Mol {
            atoms: self.atoms.clone(),
            bonds: self.bonds.clone(),
            adj: self.adj.clone(),
            rings: OnceLock::new(),
        }
    }
}

impl Mol {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.adj.push(Vec::new());
        self.rings = OnceLock::new();
        self.atoms.len() - 1
    }

    /// Adds a bond and returns its index. Panics on self-loops.
    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> usize {
        assert_ne!(a, b, "self bond");
        let idx = self.bonds.len();
        self.bonds.push(Bond { a, b, order });
        self.adj[a].push((b, idx));
        self.adj[b].push((a, idx));
        self.rings = OnceLock::new();
        idx
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_mut(&mut self, i: usize) -> &mut Atom {
        &mut self.atoms[i]
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn set_bond_order(&mut self, i: usize, order: BondOrder) {
        self.bonds[i].order = order;
    }

    /// `(neighbor, bond index)` pairs.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a].iter().find(|(n, _)| *n == b).map(|(_, bi)| *bi)
    }

    pub fn rings(&self) -> &RingInfo {
        self.rings.get_or_init(|| RingInfo::perceive(self))
    }

    /// Sum of bond valence units around an atom (aromatic bonds count 1).
    pub fn bond_valence(&self, i: usize) -> u8 {
        self.adj[i]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.valence_units())
            .sum()
    }

    pub fn has_multiple_bond(&self, i: usize) -> bool {
        self.adj[i]
            .iter()
            .any(|&(_, b)| matches!(self.bonds[b].order, BondOrder::Double | BondOrder::Triple))
    }

    /// Whether an aromatic atom needs a pi bond from the aromatic system
    /// (as opposed to donating a lone pair or carrying an exocyclic double bond).
    pub fn aromatic_pi_needed(&self, i: usize) -> bool {
        let atom = &self.atoms[i];
        if !atom.aromatic || self.has_multiple_bond(i) {
            return false;
        }
        let connections = self.degree(i) + atom.hydrogens as usize;
        match (atom.element, atom.charge) {
            (6, 0) => true,
            (7, 0) | (15, 0) | (33, 0) => connections < 3,
            (7, 1) => true,
            (8, 1) | (16, 1) | (34, 1) => true,
            (5, 0) => false,
            _ => false,
        }
    }

    /// Valence in integer units including pi contributions of aromatic atoms
    /// and attached hydrogens.
    pub fn total_valence(&self, i: usize) -> u8 {
        self.bond_valence(i)
            + u8::from(self.aromatic_pi_needed(i))
            + self.atoms[i].hydrogens
    }

    /// Total connections including hydrogens.
    pub fn connectivity(&self, i: usize) -> usize {
        self.degree(i) + self.atoms[i].hydrogens as usize
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != 1).count()
    }

    /// Checks that every atom's valence is allowed for its element and charge.
    pub fn valence_violation(&self) -> Option<usize> {
        (0..self.atoms.len()).find(|&i| {
            let atom = &self.atoms[i];
            let allowed = element::allowed_valences(atom.element, atom.charge);
            if allowed.is_empty() {
                return false;
            }
            let max = *allowed.iter().max().unwrap();
            self.total_valence(i) > max
        })
    }

    /// Builds the subgraph induced by `keep` (in original index order).
    /// Returns the new molecule and a map old index -> new index.
    pub fn subgraph(&self, keep: &[bool]) -> (Mol, Vec<Option<usize>>) {
        let mut out = Mol::new();
        let mut map = vec![None; self.atoms.len()];
        for (i, atom) in self.atoms.iter().enumerate() {
            if keep[i] {
                map[i] = Some(out.add_atom(atom.clone()));
            }
        }
        for bond in &self.bonds {
            if let (Some(a), Some(b)) = (map[bond.a], map[bond.b]) {
                out.add_bond(a, b, bond.order);
            }
        }
        (out, map)
    }

    /// Connected components as lists of atom indices, ordered by smallest index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut k = 0;
            while k < comp.len() {
                let cur = comp[k];
                k += 1;
                for &(nb, _) in &self.adj[cur] {
                    if !seen[nb] {
                        seen[nb] = true;
                        comp.push(nb);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Topological (bond-count) distance matrix via BFS; `usize::MAX` when disconnected.
    pub fn topological_distances(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut out = vec![vec![usize::MAX; n]; n];
        for s in 0..n {
            let row = &mut out[s];
            row[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(cur) = queue.pop_front() {
                let d = row[cur];
                for &(nb, _) in &self.adj[cur] {
                    if row[nb] == usize::MAX {
                        row[nb] = d + 1;
                        queue.push_back(nb);
                    }
                }
            }
        }
        out
    }
}
