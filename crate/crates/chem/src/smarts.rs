//! SMARTS parsing and substructure matching.

use std::fmt;

use crate::element;
use crate::mol::{BondOrder, Mol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmartsError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for SmartsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at position {}", self.message, self.position)
    }
}

impl std::error::Error for SmartsError {}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomPrim {
    Any,
    Aromatic,
    Aliphatic,
    /// Element with optional aromaticity constraint (`C` aliphatic, `c` aromatic, `#6` either).
    Element { number: u8, aromatic: Option<bool> },
    Degree(u8),
    TotalH(u8),
    Connectivity(u8),
    Valence(u8),
    /// `R` alone: in any ring; `Rn`: in exactly n SSSR rings.
    RingCount(Option<u8>),
    /// `r` alone: in any ring; `rn`: in a ring of size n.
    RingSize(Option<u8>),
    RingConnectivity(Option<u8>),
    Charge(i8),
    Isotope(u16),
    Recursive(Box<Smarts>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Box<Expr<P>>, Box<Expr<P>>),
    Or(Box<Expr<P>>, Box<Expr<P>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondPrim {
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
    Ring,
    /// Unspecified bond: single or aromatic.
    Implicit,
}

pub type AtomExpr = Expr<AtomPrim>;
pub type BondExpr = Expr<BondPrim>;

#[derive(Debug, Clone, PartialEq)]
pub struct QueryAtom {
    pub expr: AtomExpr,
    pub map: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryBond {
    pub a: usize,
    pub b: usize,
    pub expr: BondExpr,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Smarts {
    pub atoms: Vec<QueryAtom>,
    pub bonds: Vec<QueryBond>,
    adj: Vec<Vec<(usize, usize)>>,
    /// Component index of each query atom (split at '.').
    pub component: Vec<usize>,
}

impl<P> Expr<P> {
    fn eval(&self, f: &impl Fn(&P) -> bool) -> bool {
        match self {
            Expr::Prim(p) => f(p),
            Expr::Not(e) => !e.eval(f),
            Expr::And(a, b) => a.eval(f) && b.eval(f),
            Expr::Or(a, b) => a.eval(f) || b.eval(f),
        }
    }

    /// Primitives reachable without passing through a negation or disjunction.
    pub fn conjuncts(&self) -> Vec<&P> {
        match self {
            Expr::Prim(p) => vec![p],
            Expr::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            _ => Vec::new(),
        }
    }
}

impl AtomExpr {
    /// Element number if the expression pins one down through a conjunction.
    pub fn element(&self) -> Option<u8> {
        self.conjuncts().into_iter().find_map(|p| match p {
            AtomPrim::Element { number, .. } => Some(*number),
            _ => None,
        })
    }

    /// Explicit aromaticity request, if any.
    pub fn aromatic(&self) -> Option<bool> {
        self.conjuncts().into_iter().find_map(|p| match p {
            AtomPrim::Element { aromatic, .. } => *aromatic,
            AtomPrim::Aromatic => Some(true),
            AtomPrim::Aliphatic => Some(false),
            _ => None,
        })
    }

    pub fn charge(&self) -> Option<i8> {
        self.conjuncts().into_iter().find_map(|p| match p {
            AtomPrim::Charge(c) => Some(*c),
            _ => None,
        })
    }

    pub fn total_h(&self) -> Option<u8> {
        self.conjuncts().into_iter().find_map(|p| match p {
            AtomPrim::TotalH(h) => Some(*h),
            _ => None,
        })
    }
}

impl BondExpr {
    /// Concrete order when the expression names exactly one.
    pub fn order(&self) -> Option<BondOrder> {
        match self {
            Expr::Prim(BondPrim::Single) => Some(BondOrder::Single),
            Expr::Prim(BondPrim::Double) => Some(BondOrder::Double),
            Expr::Prim(BondPrim::Triple) => Some(BondOrder::Triple),
            Expr::Prim(BondPrim::Aromatic) => Some(BondOrder::Aromatic),
            _ => None,
        }
    }
}

/// Parses a SMARTS pattern.
pub fn parse_smarts(input: &str) -> Result<Smarts, SmartsError> {
    Parser {
        s: input.as_bytes(),
        text: input,
        pos: 0,
    }
    .parse_pattern()
}

struct Parser<'a> {
    s: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error<T>(&self, msg: &str) -> Result<T, SmartsError> {
        Err(SmartsError {
            position: self.pos,
            message: msg.to_string(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn parse_pattern(mut self) -> Result<Smarts, SmartsError> {
        let mut q = Smarts::default();
        let mut prev: Option<usize> = None;
        let mut pending: Option<BondExpr> = None;
        let mut branches: Vec<Option<usize>> = Vec::new();
        let mut rings: Vec<(u32, usize, Option<BondExpr>)> = Vec::new();
        let mut component = 0;
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() {
                        return self.error("branch without atom");
                    }
                    branches.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    prev = match branches.pop() {
                        Some(p) => p,
                        None => return self.error("unbalanced ')'"),
                    };
                    self.pos += 1;
                }
                b'.' => {
                    prev = None;
                    component += 1;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'/' | b'\\' => {
                    pending = Some(self.parse_bond_expr()?);
                }
                b'0'..=b'9' | b'%' => {
                    let num = if c == b'%' {
                        let digits = self.text.get(self.pos + 1..self.pos + 3);
                        self.pos += 3;
                        match digits.and_then(|d| d.parse::<u32>().ok()) {
                            Some(n) => n,
                            None => return self.error("bad ring number"),
                        }
                    } else {
                        self.pos += 1;
                        (c - b'0') as u32
                    };
                    let Some(cur) = prev else {
                        return self.error("ring bond without atom");
                    };
                    if let Some(k) = rings.iter().position(|r| r.0 == num) {
                        let (_, other, open) = rings.remove(k);
                        let expr = open
                            .or(pending.take())
                            .unwrap_or(Expr::Prim(BondPrim::Implicit));
                        q.add_bond(other, cur, expr);
                    } else {
                        rings.push((num, cur, pending.take()));
                    }
                }
                _ => {
                    let atom = if c == b'[' {
                        self.parse_bracket()?
                    } else {
                        self.parse_organic()?
                    };
                    let idx = q.add_atom(atom, component);
                    if let Some(p) = prev {
                        let expr = pending.take().unwrap_or(Expr::Prim(BondPrim::Implicit));
                        q.add_bond(p, idx, expr);
                    }
                    pending = None;
                    prev = Some(idx);
                }
            }
        }
        if !branches.is_empty() {
            return self.error("unbalanced '('");
        }
        if !rings.is_empty() {
            return self.error("unclosed ring");
        }
        if pending.is_some() {
            return self.error("dangling bond");
        }
        Ok(q)
    }

    fn parse_organic(&mut self) -> Result<QueryAtom, SmartsError> {
        let rest = &self.text[self.pos..];
        let (prim, len) = if rest.starts_with("Cl") {
            (elem(17, Some(false)), 2)
        } else if rest.starts_with("Br") {
            (elem(35, Some(false)), 2)
        } else {
            let p = match self.peek().unwrap() {
                b'*' => AtomPrim::Any,
                b'a' => AtomPrim::Aromatic,
                b'A' => AtomPrim::Aliphatic,
                b'B' => elem(5, Some(false)),
                b'C' => elem(6, Some(false)),
                b'N' => elem(7, Some(false)),
                b'O' => elem(8, Some(false)),
                b'P' => elem(15, Some(false)),
                b'S' => elem(16, Some(false)),
                b'F' => elem(9, Some(false)),
                b'I' => elem(53, Some(false)),
                b'b' => elem(5, Some(true)),
                b'c' => elem(6, Some(true)),
                b'n' => elem(7, Some(true)),
                b'o' => elem(8, Some(true)),
                b'p' => elem(15, Some(true)),
                b's' => elem(16, Some(true)),
                _ => return self.error("unexpected character"),
            };
            (p, 1)
        };
        self.pos += len;
        Ok(QueryAtom {
            expr: Expr::Prim(prim),
            map: 0,
        })
    }

    fn parse_bracket(&mut self) -> Result<QueryAtom, SmartsError> {
        self.pos += 1; // '['
        let expr = self.parse_low()?;
        let mut map = 0u16;
        if self.peek() == Some(b':') {
            self.pos += 1;
            map = self.number().unwrap_or(0) as u16;
        }
        if self.peek() != Some(b']') {
            return self.error("expected ']'");
        }
        self.pos += 1;
        Ok(QueryAtom { expr, map })
    }

    fn parse_low(&mut self) -> Result<AtomExpr, SmartsError> {
        let mut left = self.parse_or()?;
        while self.peek() == Some(b';') {
            self.pos += 1;
            let right = self.parse_or()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_or(&mut self) -> Result<AtomExpr, SmartsError> {
        let mut left = self.parse_and()?;
        while self.peek() == Some(b',') {
            self.pos += 1;
            let right = self.parse_and()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<AtomExpr, SmartsError> {
        let mut left = self.parse_not()?;
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                }
                Some(b';' | b',' | b']' | b':' | b')') | None => break,
                _ => {}
            }
            let right = self.parse_not()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_not(&mut self) -> Result<AtomExpr, SmartsError> {
        if self.peek() == Some(b'!') {
            self.pos += 1;
            let inner = self.parse_not()?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        Ok(Expr::Prim(self.parse_atom_prim()?))
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.text[start..self.pos].parse().ok()
    }

    fn parse_atom_prim(&mut self) -> Result<AtomPrim, SmartsError> {
        let Some(c) = self.peek() else {
            return self.error("unexpected end of pattern");
        };
        let rest = &self.text[self.pos..];
        // two-letter aromatic symbols
        for (sym, num) in [("se", 34u8), ("as", 33u8), ("te", 52u8)] {
            if rest.starts_with(sym) {
                self.pos += 2;
                return Ok(elem(num, Some(true)));
            }
        }
        match c {
            b'*' => {
                self.pos += 1;
                Ok(AtomPrim::Any)
            }
            b'a' => {
                self.pos += 1;
                Ok(AtomPrim::Aromatic)
            }
            b'A' if !rest[1..].starts_with(|ch: char| ch.is_ascii_lowercase()) => {
                self.pos += 1;
                Ok(AtomPrim::Aliphatic)
            }
            b'#' => {
                self.pos += 1;
                match self.number() {
                    Some(n) => Ok(elem(n as u8, None)),
                    None => self.error("expected atomic number"),
                }
            }
            b'0'..=b'9' => Ok(AtomPrim::Isotope(self.number().unwrap() as u16)),
            b'$' => {
                if !rest.starts_with("$(") {
                    return self.error("expected '$('");
                }
                let mut depth = 0usize;
                let mut end = None;
                for (k, ch) in rest.char_indices().skip(1) {
                    match ch {
                        '(' => depth += 1,
                        ')' => {
                            depth -= 1;
                            if depth == 0 {
                                end = Some(k);
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                let Some(end) = end else {
                    return self.error("unclosed recursive SMARTS");
                };
                let inner = &rest[2..end];
                let sub = parse_smarts(inner).map_err(|e| SmartsError {
                    position: self.pos + 2 + e.position,
                    message: e.message,
                })?;
                self.pos += end + 1;
                Ok(AtomPrim::Recursive(Box::new(sub)))
            }
            b'+' | b'-' => {
                self.pos += 1;
                let sign: i8 = if c == b'+' { 1 } else { -1 };
                let mag = if let Some(n) = self.number() {
                    n as i8
                } else {
                    let mut m = 1;
                    while self.peek() == Some(c) {
                        self.pos += 1;
                        m += 1;
                    }
                    m
                };
                Ok(AtomPrim::Charge(sign * mag))
            }
            b'@' => {
                while self.peek() == Some(b'@') {
                    self.pos += 1;
                }
                Ok(AtomPrim::Any)
            }
            b'D' | b'H' | b'h' | b'X' | b'v' | b'R' | b'r' | b'x'
                if !(c.is_ascii_uppercase()
                    && rest.get(..2).and_then(element::by_symbol).is_some()) =>
            {
                self.pos += 1;
                let n = self.number().map(|n| n as u8);
                Ok(match c {
                    b'D' => AtomPrim::Degree(n.unwrap_or(1)),
                    b'H' | b'h' => AtomPrim::TotalH(n.unwrap_or(1)),
                    b'X' => AtomPrim::Connectivity(n.unwrap_or(1)),
                    b'v' => AtomPrim::Valence(n.unwrap_or(1)),
                    b'R' => AtomPrim::RingCount(n),
                    b'r' => AtomPrim::RingSize(n),
                    _ => AtomPrim::RingConnectivity(n),
                })
            }
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                self.pos += 1;
                let num = match c {
                    b'b' => 5,
                    b'c' => 6,
                    b'n' => 7,
                    b'o' => 8,
                    b'p' => 15,
                    _ => 16,
                };
                Ok(elem(num, Some(true)))
            }
            b'A'..=b'Z' => {
                // greedy two-letter element symbol
                if let Some(two) = rest.get(..2) {
                    if two.as_bytes()[1].is_ascii_lowercase() {
                        if let Some(e) = element::by_symbol(two) {
                            self.pos += 2;
                            return Ok(elem(e.number, Some(false)));
                        }
                    }
                }
                match element::by_symbol(&rest[..1]) {
                    Some(e) => {
                        self.pos += 1;
                        Ok(elem(e.number, Some(false)))
                    }
                    None => self.error("unknown element"),
                }
            }
            _ => self.error("unexpected character in atom primitive"),
        }
    }

    fn parse_bond_expr(&mut self) -> Result<BondExpr, SmartsError> {
        self.parse_bond_low()
    }

    fn parse_bond_low(&mut self) -> Result<BondExpr, SmartsError> {
        let mut left = self.parse_bond_or()?;
        while self.peek() == Some(b';') {
            self.pos += 1;
            let right = self.parse_bond_or()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_bond_or(&mut self) -> Result<BondExpr, SmartsError> {
        let mut left = self.parse_bond_and()?;
        while self.peek() == Some(b',') {
            self.pos += 1;
            let right = self.parse_bond_and()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_bond_and(&mut self) -> Result<BondExpr, SmartsError> {
        let mut left = self.parse_bond_not()?;
        loop {
            match self.peek() {
                Some(b'&') => self.pos += 1,
                Some(b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'/' | b'\\') => {}
                _ => break,
            }
            let right = self.parse_bond_not()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_bond_not(&mut self) -> Result<BondExpr, SmartsError> {
        let Some(c) = self.peek() else {
            return self.error("expected bond");
        };
        self.pos += 1;
        Ok(match c {
            b'!' => Expr::Not(Box::new(self.parse_bond_not()?)),
            b'-' | b'/' | b'\\' => Expr::Prim(BondPrim::Single),
            b'=' => Expr::Prim(BondPrim::Double),
            b'#' => Expr::Prim(BondPrim::Triple),
            b':' => Expr::Prim(BondPrim::Aromatic),
            b'~' => Expr::Prim(BondPrim::Any),
            b'@' => Expr::Prim(BondPrim::Ring),
            _ => {
                self.pos -= 1;
                return self.error("bad bond primitive");
            }
        })
    }
}

fn elem(number: u8, aromatic: Option<bool>) -> AtomPrim {
    AtomPrim::Element { number, aromatic }
}

impl Smarts {
    fn add_atom(&mut self, atom: QueryAtom, component: usize) -> usize {
        self.atoms.push(atom);
        self.adj.push(Vec::new());
        self.component.push(component);
        self.atoms.len() - 1
    }

    fn add_bond(&mut self, a: usize, b: usize, expr: BondExpr) {
        let idx = self.bonds.len();
        self.bonds.push(QueryBond { a, b, expr });
        self.adj[a].push((b, idx));
        self.adj[b].push((a, idx));
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a].iter().find(|(n, _)| *n == b).map(|(_, bi)| *bi)
    }

    /// Number of '.'-separated components.
    pub fn component_count(&self) -> usize {
        self.component.iter().max().map_or(0, |m| m + 1)
    }

    /// The sub-pattern for one component, with atoms in original order.
    pub fn component_pattern(&self, comp: usize) -> (Smarts, Vec<usize>) {
        let keep: Vec<usize> = (0..self.atoms.len()).filter(|&i| self.component[i] == comp).collect();
        let mut out = Smarts::default();
        let mut map = vec![usize::MAX; self.atoms.len()];
        for &i in &keep {
            map[i] = out.add_atom(self.atoms[i].clone(), 0);
        }
        for b in &self.bonds {
            if map[b.a] != usize::MAX && map[b.b] != usize::MAX {
                out.add_bond(map[b.a], map[b.b], b.expr.clone());
            }
        }
        (out, keep)
    }

    /// All injective matches (query atom index -> target atom index).
    pub fn matches(&self, mol: &Mol) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.search(mol, None, &mut |m| {
            out.push(m.to_vec());
            true
        });
        out
    }

    /// Matches deduplicated by the set of target atoms covered.
    pub fn unique_matches(&self, mol: &Mol) -> Vec<Vec<usize>> {
        let mut seen: Vec<Vec<usize>> = Vec::new();
        let mut out = Vec::new();
        for m in self.matches(mol) {
            let mut key = m.clone();
            key.sort_unstable();
            if !seen.contains(&key) {
                seen.push(key);
                out.push(m);
            }
        }
        out
    }

    pub fn has_match(&self, mol: &Mol) -> bool {
        let mut found = false;
        self.search(mol, None, &mut |_| {
            found = true;
            false
        });
        found
    }

    /// Whether the pattern matches with query atom 0 on `atom`.
    pub fn matches_at(&self, mol: &Mol, atom: usize) -> bool {
        let mut found = false;
        self.search(mol, Some(atom), &mut |_| {
            found = true;
            false
        });
        found
    }

    fn search(&self, mol: &Mol, anchor: Option<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) {
        let nq = self.atoms.len();
        if nq == 0 || mol.atom_count() == 0 {
            return;
        }
        // DFS order over the query graph with parent links
        let mut order = Vec::with_capacity(nq);
        let mut parent = vec![None; nq];
        let mut seen = vec![false; nq];
        for root in 0..nq {
            if seen[root] {
                continue;
            }
            let mut stack = vec![root];
            seen[root] = true;
            while let Some(v) = stack.pop() {
                order.push(v);
                for &(w, _) in self.adj[v].iter().rev() {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(v);
                        stack.push(w);
                    }
                }
            }
        }
        let mut assign = vec![usize::MAX; nq];
        let mut used = vec![false; mol.atom_count()];
        let mut state = SearchState {
            q: self,
            mol,
            order: &order,
            parent: &parent,
            anchor,
        };
        state.step(0, &mut assign, &mut used, visit);
    }
}

struct SearchState<'a> {
    q: &'a Smarts,
    mol: &'a Mol,
    order: &'a [usize],
    parent: &'a [Option<usize>],
    anchor: Option<usize>,
}

impl SearchState<'_> {
    fn step(
        &mut self,
        depth: usize,
        assign: &mut [usize],
        used: &mut [bool],
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if depth == self.order.len() {
            return visit(assign);
        }
        let qa = self.order[depth];
        let candidates: Vec<usize> = match self.parent[qa] {
            Some(p) => self.mol.neighbors(assign[p]).iter().map(|&(w, _)| w).collect(),
            None if depth == 0 && self.anchor.is_some() => vec![self.anchor.unwrap()],
            None => (0..self.mol.atom_count()).collect(),
        };
        for t in candidates {
            if used[t] || !atom_matches(&self.q.atoms[qa].expr, self.mol, t) {
                continue;
            }
            let bonds_ok = self.q.adj[qa].iter().all(|&(qn, qb)| {
                let tn = assign[qn];
                if tn == usize::MAX {
                    return true;
                }
                match self.mol.bond_between(t, tn) {
                    Some(tb) => bond_matches(&self.q.bonds[qb].expr, self.mol, tb),
                    None => false,
                }
            });
            if !bonds_ok {
                continue;
            }
            assign[qa] = t;
            used[t] = true;
            let keep_going = self.step(depth + 1, assign, used, visit);
            assign[qa] = usize::MAX;
            used[t] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

pub fn atom_matches(expr: &AtomExpr, mol: &Mol, i: usize) -> bool {
    let atom = mol.atom(i);
    let rings = mol.rings();
    expr.eval(&|p: &AtomPrim| match p {
        AtomPrim::Any => true,
        AtomPrim::Aromatic => atom.aromatic,
        AtomPrim::Aliphatic => !atom.aromatic,
        AtomPrim::Element { number, aromatic } => {
            atom.element == *number && aromatic.is_none_or(|a| a == atom.aromatic)
        }
        AtomPrim::Degree(d) => mol.degree(i) == *d as usize,
        AtomPrim::TotalH(h) => atom.hydrogens == *h,
        AtomPrim::Connectivity(x) => mol.connectivity(i) == *x as usize,
        AtomPrim::Valence(v) => mol.total_valence(i) == *v,
        AtomPrim::RingCount(None) => rings.atom_in_ring(i),
        AtomPrim::RingCount(Some(0)) => !rings.atom_in_ring(i),
        AtomPrim::RingCount(Some(n)) => rings.atom_ring_count(i) == *n as usize,
        AtomPrim::RingSize(None) => rings.atom_in_ring(i),
        AtomPrim::RingSize(Some(0)) => !rings.atom_in_ring(i),
        AtomPrim::RingSize(Some(n)) => rings.atom_in_ring_of_size(i, *n as usize),
        AtomPrim::RingConnectivity(n) => {
            let rb = mol
                .neighbors(i)
                .iter()
                .filter(|&&(_, b)| rings.bond_in_ring(b))
                .count();
            match n {
                None => rb > 0,
                Some(n) => rb == *n as usize,
            }
        }
        AtomPrim::Charge(c) => atom.charge == *c,
        AtomPrim::Isotope(m) => atom.isotope == *m,
        AtomPrim::Recursive(sub) => sub.matches_at(mol, i),
    })
}

pub fn bond_matches(expr: &BondExpr, mol: &Mol, b: usize) -> bool {
    let order = mol.bond(b).order;
    expr.eval(&|p: &BondPrim| match p {
        BondPrim::Single => order == BondOrder::Single,
        BondPrim::Double => order == BondOrder::Double,
        BondPrim::Triple => order == BondOrder::Triple,
        BondPrim::Aromatic => order == BondOrder::Aromatic,
        BondPrim::Any => true,
        BondPrim::Ring => mol.rings().bond_in_ring(b),
        BondPrim::Implicit => matches!(order, BondOrder::Single | BondOrder::Aromatic),
    })
}
