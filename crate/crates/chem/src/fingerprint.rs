//! Morgan (circular) bit fingerprints and Tanimoto similarity.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mol::Mol;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FingerprintError {
    #[error("fingerprint length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid fingerprint hex: {0}")]
    BadHex(String),
}

/// Fixed-length bit vector with the radius it was computed at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitFingerprint {
    words: Vec<u64>,
    nbits: usize,
    radius: u32,
}

impl BitFingerprint {
    pub fn zeros(nbits: usize, radius: u32) -> Self {
        BitFingerprint {
            words: vec![0; nbits.div_ceil(64)],
            nbits,
            radius,
        }
    }

    pub fn from_bits(nbits: usize, radius: u32, on: &[usize]) -> Self {
        let mut fp = Self::zeros(nbits, radius);
        for &b in on {
            fp.set(b);
        }
        fp
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.nbits, "bit {bit} out of range");
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Indices of set bits in increasing order.
    pub fn on_bits(&self) -> Vec<usize> {
        (0..self.nbits).filter(|&b| self.get(b)).collect()
    }

    /// Dense 0/1 vector.
    pub fn to_dense<T: From<u8>>(&self) -> Vec<T> {
        (0..self.nbits).map(|b| T::from(u8::from(self.get(b)))).collect()
    }

    /// Lowercase hex, most significant nibble first, bit 0 in the last nibble.
    pub fn to_hex(&self) -> String {
        let nibbles = self.nbits.div_ceil(4);
        let mut s = String::with_capacity(nibbles);
        for k in (0..nibbles).rev() {
            let mut v = 0u8;
            for j in 0..4 {
                let bit = k * 4 + j;
                if bit < self.nbits && self.get(bit) {
                    v |= 1 << j;
                }
            }
            write!(s, "{v:x}").unwrap();
        }
        s
    }

    pub fn from_hex(hex: &str, nbits: usize, radius: u32) -> Result<Self, FingerprintError> {
        if hex.len() != nbits.div_ceil(4) {
            return Err(FingerprintError::BadHex(format!("expected {} digits", nbits.div_ceil(4))));
        }
        let mut fp = Self::zeros(nbits, radius);
        for (pos, ch) in hex.chars().enumerate() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| FingerprintError::BadHex(format!("bad digit '{ch}'")))?;
            let k = hex.len() - 1 - pos;
            for j in 0..4 {
                if v >> j & 1 == 1 {
                    let bit = k * 4 + j;
                    if bit >= nbits {
                        return Err(FingerprintError::BadHex("bit beyond length".into()));
                    }
                    fp.set(bit);
                }
            }
        }
        Ok(fp)
    }
}

/// |a ∧ b| / |a ∨ b|, defined as 1.0 when both are empty.
pub fn tanimoto(a: &BitFingerprint, b: &BitFingerprint) -> Result<f64, FingerprintError> {
    if a.nbits != b.nbits {
        return Err(FingerprintError::LengthMismatch(a.nbits, b.nbits));
    }
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

fn hash_combine(seed: u32, v: u32) -> u32 {
    seed ^ v
        .wrapping_add(0x9e37_79b9)
        .wrapping_add(seed << 6)
        .wrapping_add(seed >> 2)
}

fn hash_slice(values: &[u32]) -> u32 {
    values.iter().fold(0, |s, &v| hash_combine(s, v))
}

fn atom_invariant(mol: &Mol, i: usize) -> u32 {
    let a = mol.atom(i);
    let rings = mol.rings();
    hash_slice(&[
        a.element as u32,
        mol.connectivity(i) as u32,
        a.hydrogens as u32,
        a.charge as i32 as u32,
        a.isotope as u32,
        u32::from(rings.atom_in_ring(i)),
    ])
}

/// Morgan fingerprint folded to `nbits`.
pub fn morgan(mol: &Mol, radius: u32, nbits: usize) -> BitFingerprint {
    let mut fp = BitFingerprint::zeros(nbits, radius);
    for v in morgan_ids(mol, radius) {
        fp.set(fmix32(v) as usize % nbits);
    }
    fp
}

// murmur3 finalizer; spreads ids before folding
fn fmix32(mut h: u32) -> u32 {
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^ (h >> 16)
}

/// Distinct unfolded environment identifiers up to `radius`, with
/// environments deduplicated by their bond sets.
pub fn morgan_ids(mol: &Mol, radius: u32) -> Vec<u32> {
    let n = mol.atom_count();
    let nb = mol.bond_count();
    let words = nb.div_ceil(64).max(1);
    let mut ids: Vec<u32> = Vec::new();
    let mut inv: Vec<u32> = (0..n).map(|i| atom_invariant(mol, i)).collect();
    ids.extend(&inv);
    let mut env: Vec<Vec<u64>> = vec![vec![0; words]; n];
    let mut seen: Vec<Vec<u64>> = Vec::new();
    let mut dead = vec![false; n];

    for layer in 0..radius {
        let mut next = inv.clone();
        let mut next_env = env.clone();
        let mut candidates: Vec<(Vec<u64>, u32, usize)> = Vec::new();
        for i in 0..n {
            if dead[i] {
                continue;
            }
            if mol.degree(i) == 0 {
                dead[i] = true;
                continue;
            }
            let mut nbrs: Vec<(u32, u32)> = mol
                .neighbors(i)
                .iter()
                .map(|&(w, b)| (mol.bond(b).order.code() as u32, inv[w]))
                .collect();
            nbrs.sort_unstable();
            let mut vals = vec![layer, inv[i]];
            for (bo, ni) in nbrs {
                vals.push(bo);
                vals.push(ni);
            }
            next[i] = hash_slice(&vals);
            let mut e = env[i].clone();
            for &(w, b) in mol.neighbors(i) {
                e[b / 64] |= 1 << (b % 64);
                for (x, y) in e.iter_mut().zip(&env[w]) {
                    *x |= y;
                }
            }
            next_env[i] = e.clone();
            candidates.push((e, next[i], i));
        }
        candidates.sort();
        for (e, v, i) in candidates {
            if seen.contains(&e) {
                dead[i] = true;
                continue;
            }
            ids.push(v);
            seen.push(e);
        }
        inv = next;
        env = next_env;
    }
    ids.sort_unstable();
    ids.dedup();
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    #[test]
    fn tanimoto_definition() {
        let a = BitFingerprint::from_bits(16, 2, &[1, 2, 3]);
        let b = BitFingerprint::from_bits(16, 2, &[2, 3, 4]);
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
        let z = BitFingerprint::zeros(16, 2);
        assert_eq!(tanimoto(&z, &z).unwrap(), 1.0);
        assert_eq!(tanimoto(&a, &z).unwrap(), 0.0);
        let c = BitFingerprint::zeros(32, 2);
        assert!(tanimoto(&a, &c).is_err());
    }

    #[test]
    fn hex_roundtrip() {
        let a = BitFingerprint::from_bits(4096, 3, &[0, 5, 63, 64, 4095]);
        let h = a.to_hex();
        assert_eq!(h.len(), 1024);
        assert!(h.ends_with("21") || h.ends_with("1"));
        assert_eq!(BitFingerprint::from_hex(&h, 4096, 3).unwrap(), a);
        assert!(BitFingerprint::from_hex("zz", 8, 3).is_err());
    }

    #[test]
    fn environment_counts_match_reference_popcounts() {
        // unfolded environment counts from an established Morgan implementation
        let cases: &[(&str, [usize; 2])] = &[
            ("c1ccccc1", [3, 4]),
            ("C", [1, 1]),
            ("CCO", [6, 6]),
            ("CC(=O)Nc1ccc(O)cc1", [21, 26]),
            ("c1ccc2[nH]ccc2c1", [17, 25]),
            ("CC(C)Cc1ccc(cc1)C(C)C(=O)O", [26, 32]),
            ("O=C1CCCCC1", [11, 13]),
            ("C1CC1", [3, 3]),
            ("OB(O)c1ccc(Br)cc1", [16, 20]),
            ("CN1CCN(CC1)c1ccccc1", [20, 28]),
            ("C[N+](C)(C)C", [4, 4]),
            ("CC(=O)[O-]", [8, 8]),
            ("c1ccncc1", [9, 10]),
            ("O=S(=O)(N)c1ccccc1", [16, 19]),
        ];
        for (smi, counts) in cases {
            let m = parse_smiles(smi).unwrap();
            for (k, r) in [2u32, 3].iter().enumerate() {
                assert_eq!(morgan_ids(&m, *r).len(), counts[k], "{smi} r={r}");
            }
        }
    }
}
