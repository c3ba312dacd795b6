//! SMILES reading and canonical writing.

use std::collections::HashMap;
use std::fmt;

use crate::aromaticity;
use crate::canon::canonical_ranks;
use crate::element;
use crate::mol::{Atom, BondOrder, Mol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmilesError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for SmilesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at position {}", self.message, self.position)
    }
}

impl std::error::Error for SmilesError {}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, SmilesError> {
    Err(SmilesError {
        position,
        message: message.into(),
    })
}

const AROMATIC_SYMBOLS: &[(&str, u8)] = &[
    ("se", 34),
    ("as", 33),
    ("te", 52),
    ("b", 5),
    ("c", 6),
    ("n", 7),
    ("o", 8),
    ("p", 15),
    ("s", 16),
];

/// Parses SMILES into a normalized molecule (implicit hydrogens assigned,
/// aromaticity perceived, valences checked).
pub fn parse_smiles(input: &str) -> Result<Mol, SmilesError> {
    let mut mol = parse_raw(input)?;
    finish(&mut mol, input.len())?;
    Ok(mol)
}

struct RawAtom {
    organic: bool,
}

fn parse_raw(input: &str) -> Result<Mol, SmilesError> {
    let bytes = input.as_bytes();
    let mut mol = Mol::new();
    let mut raw: Vec<RawAtom> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending_bond: Option<BondOrder> = None;
    let mut branches: Vec<Option<usize>> = Vec::new();
    let mut rings: HashMap<u32, (usize, Option<BondOrder>, usize)> = HashMap::new();
    let mut i = 0;

    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '(' => {
                if prev.is_none() {
                    return err(i, "branch without preceding atom");
                }
                branches.push(prev);
                i += 1;
            }
            ')' => {
                if pending_bond.is_some() {
                    return err(i, "bond before ')'");
                }
                prev = branches.pop().ok_or(SmilesError {
                    position: i,
                    message: "unbalanced ')'".into(),
                })?;
                i += 1;
            }
            '.' => {
                if pending_bond.is_some() {
                    return err(i, "bond before '.'");
                }
                prev = None;
                i += 1;
            }
            '-' | '/' | '\\' => {
                pending_bond = Some(BondOrder::Single);
                i += 1;
            }
            '=' => {
                pending_bond = Some(BondOrder::Double);
                i += 1;
            }
            '#' => {
                pending_bond = Some(BondOrder::Triple);
                i += 1;
            }
            '$' => return err(i, "quadruple bonds are not supported"),
            ':' => {
                pending_bond = Some(BondOrder::Aromatic);
                i += 1;
            }
            '0'..='9' | '%' => {
                let start = i;
                let num = if c == '%' {
                    let digits = input.get(i + 1..i + 3).ok_or(SmilesError {
                        position: i,
                        message: "incomplete ring number".into(),
                    })?;
                    i += 3;
                    digits.parse::<u32>().map_err(|_| SmilesError {
                        position: start,
                        message: "bad ring number".into(),
                    })?
                } else {
                    i += 1;
                    c.to_digit(10).unwrap()
                };
                let Some(cur) = prev else {
                    return err(start, "ring bond without atom");
                };
                if let Some((other, open_bond, _)) = rings.remove(&num) {
                    let order = match (open_bond, pending_bond) {
                        (Some(a), Some(b)) if a != b => return err(start, "conflicting ring bond orders"),
                        (Some(a), _) => a,
                        (None, Some(b)) => b,
                        (None, None) => default_bond(&mol, other, cur),
                    };
                    if other == cur || mol.bond_between(other, cur).is_some() {
                        return err(start, "invalid ring closure");
                    }
                    mol.add_bond(other, cur, order);
                } else {
                    rings.insert(num, (cur, pending_bond, start));
                }
                pending_bond = None;
            }
            '[' => {
                let close = input[i..].find(']').map(|k| k + i).ok_or(SmilesError {
                    position: i,
                    message: "unclosed bracket atom".into(),
                })?;
                let atom = parse_bracket(&input[i + 1..close], i + 1)?;
                let idx = mol.add_atom(atom);
                raw.push(RawAtom { organic: false });
                connect(&mut mol, &mut prev, &mut pending_bond, idx);
                i = close + 1;
            }
            '*' => {
                let idx = mol.add_atom(Atom::new(0));
                raw.push(RawAtom { organic: false });
                connect(&mut mol, &mut prev, &mut pending_bond, idx);
                i += 1;
            }
            _ => {
                let (number, aromatic, len) = organic_symbol(&input[i..]).ok_or(SmilesError {
                    position: i,
                    message: format!("unexpected character '{c}'"),
                })?;
                let idx = mol.add_atom(Atom {
                    aromatic,
                    ..Atom::new(number)
                });
                raw.push(RawAtom { organic: true });
                connect(&mut mol, &mut prev, &mut pending_bond, idx);
                i += len;
            }
        }
    }
    if pending_bond.is_some() {
        return err(input.len(), "dangling bond");
    }
    if !branches.is_empty() {
        return err(input.len(), "unbalanced '('");
    }
    if let Some((_, _, pos)) = rings.values().min_by_key(|v| v.2) {
        return err(*pos, "unclosed ring");
    }

    for (i, r) in raw.iter().enumerate() {
        if r.organic {
            let h = implicit_hydrogens(&mol, i);
            mol.atom_mut(i).hydrogens = h;
        }
    }
    Ok(mol)
}

fn default_bond(mol: &Mol, a: usize, b: usize) -> BondOrder {
    if mol.atom(a).aromatic && mol.atom(b).aromatic {
        BondOrder::Aromatic
    } else {
        BondOrder::Single
    }
}

fn connect(mol: &mut Mol, prev: &mut Option<usize>, pending: &mut Option<BondOrder>, idx: usize) {
    if let Some(p) = *prev {
        let order = pending.take().unwrap_or_else(|| default_bond(mol, p, idx));
        mol.add_bond(p, idx, order);
    }
    *pending = None;
    *prev = Some(idx);
}

fn organic_symbol(s: &str) -> Option<(u8, bool, usize)> {
    if s.starts_with("Cl") {
        return Some((17, false, 2));
    }
    if s.starts_with("Br") {
        return Some((35, false, 2));
    }
    let c = s.chars().next()?;
    let r = match c {
        'B' => (5, false),
        'C' => (6, false),
        'N' => (7, false),
        'O' => (8, false),
        'P' => (15, false),
        'S' => (16, false),
        'F' => (9, false),
        'I' => (53, false),
        'b' => (5, true),
        'c' => (6, true),
        'n' => (7, true),
        'o' => (8, true),
        'p' => (15, true),
        's' => (16, true),
        _ => return None,
    };
    Some((r.0, r.1, 1))
}

fn parse_bracket(body: &str, offset: usize) -> Result<Atom, SmilesError> {
    let b = body.as_bytes();
    let mut i = 0;
    let mut isotope = 0u16;
    while i < b.len() && b[i].is_ascii_digit() {
        isotope = isotope * 10 + (b[i] - b'0') as u16;
        i += 1;
    }
    let rest = &body[i..];
    let (number, aromatic, len) = if rest.starts_with('*') {
        (0, false, 1)
    } else if let Some((sym, num)) = AROMATIC_SYMBOLS.iter().find(|(s, _)| rest.starts_with(s)) {
        (*num, true, sym.len())
    } else {
        let two = rest.get(..2).and_then(|s| {
            let mut ch = s.chars();
            let (a, b) = (ch.next()?, ch.next()?);
            (a.is_ascii_uppercase() && b.is_ascii_lowercase()).then_some(s)
        });
        match two.and_then(element::by_symbol) {
            Some(e) => (e.number, false, 2),
            None => {
                let one = rest.get(..1).unwrap_or("");
                match element::by_symbol(one) {
                    Some(e) if one.chars().all(|c| c.is_ascii_uppercase()) => (e.number, false, 1),
                    _ => return err(offset + i, "unknown element in bracket atom"),
                }
            }
        }
    };
    i += len;
    let mut atom = Atom {
        isotope,
        aromatic,
        ..Atom::new(number)
    };
    // chirality (ignored)
    while i < b.len() && b[i] == b'@' {
        i += 1;
    }
    if body[i..].starts_with("TH") || body[i..].starts_with("AL") || body[i..].starts_with("SP") {
        i += 2;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < b.len() && b[i] == b'H' {
        i += 1;
        let mut h = 1u8;
        if i < b.len() && b[i].is_ascii_digit() {
            h = b[i] - b'0';
            i += 1;
        }
        atom.hydrogens = h;
    }
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        let sign: i8 = if b[i] == b'+' { 1 } else { -1 };
        let sym = b[i];
        i += 1;
        let mut mag = 1i8;
        if i < b.len() && b[i].is_ascii_digit() {
            mag = (b[i] - b'0') as i8;
            i += 1;
        } else {
            while i < b.len() && b[i] == sym {
                mag += 1;
                i += 1;
            }
        }
        atom.charge = sign * mag;
    }
    if i < b.len() && b[i] == b':' {
        i += 1;
        let start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        atom.map = body[start..i].parse().map_err(|_| SmilesError {
            position: offset + start,
            message: "bad atom class".into(),
        })?;
    }
    if i != b.len() {
        return err(offset + i, "unexpected characters in bracket atom");
    }
    Ok(atom)
}

/// Implicit hydrogen count an organic-subset atom would receive given its
/// current bonds and aromatic flag.
pub fn implicit_hydrogens(mol: &Mol, i: usize) -> u8 {
    let atom = mol.atom(i);
    let bv = mol.bond_valence(i);
    let pi = if atom.aromatic && !mol.has_multiple_bond(i) {
        match atom.element {
            6 => 1,
            7 | 15 => u8::from(mol.degree(i) < 3),
            _ => 0,
        }
    } else {
        0
    };
    let used = bv + pi;
    let valences = element::allowed_valences(atom.element, 0);
    let candidates: &[u8] = if atom.aromatic && !valences.is_empty() {
        &valences[..1]
    } else {
        valences
    };
    candidates
        .iter()
        .find(|&&v| v >= used)
        .map(|&v| v - used)
        .unwrap_or(0)
}

fn finish(mol: &mut Mol, end: usize) -> Result<(), SmilesError> {
    fold_explicit_hydrogens(mol);
    let ring_info = mol.rings().clone();
    for b in 0..mol.bond_count() {
        if mol.bond(b).order == BondOrder::Aromatic && !ring_info.bond_in_ring(b) {
            mol.set_bond_order(b, BondOrder::Single);
        }
    }
    for i in 0..mol.atom_count() {
        if mol.atom(i).aromatic && !ring_info.atom_in_ring(i) {
            return err(end, format!("non-ring atom {i} marked aromatic"));
        }
    }
    aromaticity::normalize(mol).map_err(|e| SmilesError {
        position: end,
        message: format!("cannot kekulize aromatic system at atom {}", e.atom),
    })?;
    if let Some(bad) = mol.valence_violation() {
        return err(end, format!("explicit valence too high on atom {bad}"));
    }
    Ok(())
}

fn fold_explicit_hydrogens(mol: &mut Mol) {
    let n = mol.atom_count();
    let mut keep = vec![true; n];
    let mut extra = vec![0u8; n];
    for i in 0..n {
        let a = mol.atom(i);
        if a.element == 1 && a.isotope == 0 && a.charge == 0 && mol.degree(i) == 1 {
            let (nb, b) = mol.neighbors(i)[0];
            if mol.atom(nb).element != 1 && mol.bond(b).order == BondOrder::Single {
                keep[i] = false;
                extra[nb] += 1;
            }
        }
    }
    if keep.iter().all(|k| *k) {
        return;
    }
    let (mut out, map) = mol.subgraph(&keep);
    for i in 0..n {
        if let Some(j) = map[i] {
            out.atom_mut(j).hydrogens += extra[i];
        }
    }
    *mol = out;
}

/// Writes canonical SMILES.
pub fn write_smiles(mol: &Mol) -> String {
    if mol.is_empty() {
        return String::new();
    }
    let ranks = canonical_ranks(mol);
    write_with_ranks(mol, &ranks)
}

fn write_with_ranks(mol: &Mol, ranks: &[usize]) -> String {
    let n = mol.atom_count();
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    // ring closures: per atom list of (bond, partner)
    let mut closures: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut dfs_order = vec![usize::MAX; n];
    let mut counter = 0;
    let mut roots = Vec::new();
    let mut tree_bond = vec![false; mol.bond_count()];
    let mut closure_bond = vec![false; mol.bond_count()];

    let mut atoms_by_rank: Vec<usize> = (0..n).collect();
    atoms_by_rank.sort_by_key(|&a| ranks[a]);
    for &root in &atoms_by_rank {
        if visited[root] {
            continue;
        }
        roots.push(root);
        // iterative DFS with explicit neighbor cursors
        let mut stack: Vec<(usize, Vec<(usize, usize)>, usize)> = Vec::new();
        visited[root] = true;
        dfs_order[root] = counter;
        counter += 1;
        stack.push((root, sorted_neighbors(mol, root, ranks), 0));
        while let Some((v, nbrs, cursor)) = stack.last_mut() {
            let v = *v;
            if *cursor >= nbrs.len() {
                stack.pop();
                continue;
            }
            let (w, b) = nbrs[*cursor];
            *cursor += 1;
            if tree_bond[b] || closure_bond[b] {
                continue;
            }
            if visited[w] {
                closure_bond[b] = true;
                closures[w].push((b, v));
                closures[v].push((b, w));
            } else {
                tree_bond[b] = true;
                children[v].push((w, b));
                visited[w] = true;
                dfs_order[w] = counter;
                counter += 1;
                let nb = sorted_neighbors(mol, w, ranks);
                stack.push((w, nb, 0));
            }
        }
    }

    let mut out = String::new();
    let mut digits: HashMap<usize, u32> = HashMap::new();
    let mut in_use: Vec<bool> = vec![false; 100];
    for (k, &root) in roots.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        emit(mol, root, &children, &closures, &dfs_order, &mut digits, &mut in_use, &mut out);
    }
    out
}

fn sorted_neighbors(mol: &Mol, v: usize, ranks: &[usize]) -> Vec<(usize, usize)> {
    let mut nb = mol.neighbors(v).to_vec();
    nb.sort_by_key(|&(w, _)| ranks[w]);
    nb
}

#[allow(clippy::too_many_arguments)]
fn emit(
    mol: &Mol,
    root: usize,
    children: &[Vec<(usize, usize)>],
    closures: &[Vec<(usize, usize)>],
    dfs_order: &[usize],
    digits: &mut HashMap<usize, u32>,
    in_use: &mut [bool],
    out: &mut String,
) {
    // explicit stack of work items to avoid deep recursion on long chains
    enum Item {
        Atom(usize, Option<usize>),
        Text(&'static str),
    }
    let mut work = vec![Item::Atom(root, None)];
    while let Some(item) = work.pop() {
        let (v, via) = match item {
            Item::Text(t) => {
                out.push_str(t);
                continue;
            }
            Item::Atom(v, via) => (v, via),
        };
        if let Some(b) = via {
            out.push_str(bond_symbol(mol, b));
        }
        out.push_str(&atom_symbol(mol, v));
        let mut ring_here = closures[v].clone();
        // closings (partner visited earlier) first, then openings
        ring_here.sort_by_key(|&(_, p)| (dfs_order[p] > dfs_order[v], dfs_order[p]));
        for (b, p) in ring_here {
            if dfs_order[p] < dfs_order[v] {
                let d = digits.remove(&b).expect("ring opened");
                in_use[d as usize] = false;
                push_ring_digit(out, d);
            } else {
                let d = (1..100).find(|&d| !in_use[d as usize]).expect("ring digits exhausted");
                in_use[d as usize] = true;
                digits.insert(b, d);
                out.push_str(bond_symbol(mol, b));
                push_ring_digit(out, d);
            }
        }
        let kids = &children[v];
        // push in reverse so the first child is emitted first
        for (k, &(w, b)) in kids.iter().enumerate().rev() {
            if k + 1 < kids.len() {
                work.push(Item::Text(")"));
                work.push(Item::Atom(w, Some(b)));
                work.push(Item::Text("("));
            } else {
                work.push(Item::Atom(w, Some(b)));
            }
        }
    }
}

fn push_ring_digit(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from_digit(d, 10).unwrap());
    } else {
        out.push('%');
        out.push_str(&format!("{d:02}"));
    }
}

fn bond_symbol(mol: &Mol, b: usize) -> &'static str {
    let bond = mol.bond(b);
    match bond.order {
        BondOrder::Single => {
            if mol.atom(bond.a).aromatic && mol.atom(bond.b).aromatic {
                "-"
            } else {
                ""
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => {
            if mol.atom(bond.a).aromatic && mol.atom(bond.b).aromatic {
                ""
            } else {
                ":"
            }
        }
    }
}

fn atom_symbol(mol: &Mol, i: usize) -> String {
    let atom = mol.atom(i);
    let sym = element::symbol(atom.element);
    let arom_sym = if atom.aromatic {
        AROMATIC_SYMBOLS.iter().find(|(_, n)| *n == atom.element).map(|(s, _)| *s)
    } else {
        None
    };
    let simple = element::is_organic_subset(atom.element)
        && atom.charge == 0
        && atom.isotope == 0
        && atom.map == 0
        && (!atom.aromatic || (arom_sym.is_some() && atom.element != 34 && atom.element != 33))
        && implicit_hydrogens(mol, i) == atom.hydrogens;
    let shown = arom_sym.unwrap_or(sym);
    if simple {
        return shown.to_string();
    }
    let mut s = String::from("[");
    if atom.isotope > 0 {
        s.push_str(&atom.isotope.to_string());
    }
    s.push_str(shown);
    match atom.hydrogens {
        0 => {}
        1 => s.push('H'),
        h => {
            s.push('H');
            s.push_str(&h.to_string());
        }
    }
    match atom.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    if atom.map > 0 {
        s.push(':');
        s.push_str(&atom.map.to_string());
    }
    s.push(']');
    s
}
