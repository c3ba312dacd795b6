//! Periodic table data used by the toolkit.

/// Static per-element data. Index by atomic number.
#[derive(Debug, Clone, Copy)]
pub struct ElementData {
    pub number: u8,
    pub symbol: &'static str,
    /// Standard atomic weight (g/mol).
    pub mass: f64,
    /// Single-bond covalent radius (Å).
    pub covalent_radius: f64,
    /// Allowed neutral valences, ascending. Empty for elements without a valence model.
    pub valences: &'static [u8],
}

macro_rules! el {
    ($n:expr, $s:expr, $m:expr, $r:expr, [$($v:expr),*]) => {
        ElementData { number: $n, symbol: $s, mass: $m, covalent_radius: $r, valences: &[$($v),*] }
    };
}

static TABLE: &[ElementData] = &[
    el!(0, "*", 0.0, 0.75, []),
    el!(1, "H", 1.008, 0.31, [1]),
    el!(2, "He", 4.003, 0.28, [0]),
    el!(3, "Li", 6.941, 1.28, [1]),
    el!(4, "Be", 9.012, 0.96, [2]),
    el!(5, "B", 10.812, 0.84, [3]),
    el!(6, "C", 12.011, 0.76, [4]),
    el!(7, "N", 14.007, 0.71, [3]),
    el!(8, "O", 15.999, 0.66, [2]),
    el!(9, "F", 18.998, 0.57, [1]),
    el!(10, "Ne", 20.180, 0.58, [0]),
    el!(11, "Na", 22.990, 1.66, [1]),
    el!(12, "Mg", 24.305, 1.41, [2]),
    el!(13, "Al", 26.982, 1.21, [3]),
    el!(14, "Si", 28.086, 1.11, [4]),
    el!(15, "P", 30.974, 1.07, [3, 5]),
    el!(16, "S", 32.067, 1.05, [2, 4, 6]),
    el!(17, "Cl", 35.453, 1.02, [1]),
    el!(18, "Ar", 39.948, 1.06, [0]),
    el!(19, "K", 39.098, 2.03, [1]),
    el!(20, "Ca", 40.078, 1.76, [2]),
    el!(21, "Sc", 44.956, 1.70, []),
    el!(22, "Ti", 47.867, 1.60, []),
    el!(23, "V", 50.942, 1.53, []),
    el!(24, "Cr", 51.996, 1.39, []),
    el!(25, "Mn", 54.938, 1.39, []),
    el!(26, "Fe", 55.845, 1.32, []),
    el!(27, "Co", 58.933, 1.26, []),
    el!(28, "Ni", 58.693, 1.24, []),
    el!(29, "Cu", 63.546, 1.32, []),
    el!(30, "Zn", 65.39, 1.22, [2]),
    el!(31, "Ga", 69.723, 1.22, [3]),
    el!(32, "Ge", 72.61, 1.20, [4]),
    el!(33, "As", 74.922, 1.19, [3, 5]),
    el!(34, "Se", 78.96, 1.20, [2, 4, 6]),
    el!(35, "Br", 79.904, 1.20, [1]),
    el!(36, "Kr", 83.80, 1.16, [0]),
    el!(37, "Rb", 85.468, 2.20, [1]),
    el!(38, "Sr", 87.62, 1.95, [2]),
    el!(39, "Y", 88.906, 1.90, []),
    el!(40, "Zr", 91.224, 1.75, []),
    el!(41, "Nb", 92.906, 1.64, []),
    el!(42, "Mo", 95.94, 1.54, []),
    el!(43, "Tc", 98.0, 1.47, []),
    el!(44, "Ru", 101.07, 1.46, []),
    el!(45, "Rh", 102.906, 1.42, []),
    el!(46, "Pd", 106.42, 1.39, []),
    el!(47, "Ag", 107.868, 1.45, []),
    el!(48, "Cd", 112.411, 1.44, []),
    el!(49, "In", 114.818, 1.42, [3]),
    el!(50, "Sn", 118.71, 1.39, [2, 4]),
    el!(51, "Sb", 121.76, 1.39, [3, 5]),
    el!(52, "Te", 127.6, 1.38, [2, 4, 6]),
    el!(53, "I", 126.904, 1.39, [1, 3, 5]),
    el!(54, "Xe", 131.29, 1.40, [0]),
    el!(55, "Cs", 132.905, 2.44, [1]),
    el!(56, "Ba", 137.327, 2.15, [2]),
];

static EXTRA: &[ElementData] = &[
    el!(72, "Hf", 178.49, 1.75, []),
    el!(78, "Pt", 195.078, 1.36, []),
    el!(79, "Au", 196.967, 1.36, []),
    el!(80, "Hg", 200.59, 1.32, []),
    el!(81, "Tl", 204.383, 1.45, []),
    el!(82, "Pb", 207.2, 1.46, []),
    el!(83, "Bi", 208.980, 1.48, []),
    el!(67, "Ho", 164.930, 1.92, []),
];

/// Looks up an element by atomic number.
pub fn by_number(number: u8) -> Option<&'static ElementData> {
    TABLE
        .get(number as usize)
        .or_else(|| EXTRA.iter().find(|e| e.number == number))
}

/// Looks up an element by its (case-sensitive) symbol.
pub fn by_symbol(symbol: &str) -> Option<&'static ElementData> {
    TABLE
        .iter()
        .chain(EXTRA.iter())
        .find(|e| e.symbol == symbol)
}

pub fn symbol(number: u8) -> &'static str {
    by_number(number).map(|e| e.symbol).unwrap_or("*")
}

pub fn mass(number: u8) -> f64 {
    by_number(number).map(|e| e.mass).unwrap_or(0.0)
}

pub fn covalent_radius(number: u8) -> f64 {
    by_number(number).map(|e| e.covalent_radius).unwrap_or(1.5)
}

/// Elements writable without brackets in SMILES.
pub fn is_organic_subset(number: u8) -> bool {
    matches!(number, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
}

/// Allowed valences for an atom, taking the formal charge into account.
///
/// Charged main-group atoms use the isoelectronic neutral element
/// (N+ behaves like C, O- like F, and so on).
pub fn allowed_valences(number: u8, charge: i8) -> &'static [u8] {
    if charge == 0 {
        return by_number(number).map(|e| e.valences).unwrap_or(&[]);
    }
    match (number, charge) {
        (6, 1) | (6, -1) => &[3],
        (5, -1) => &[4],
        (7, 1) => &[4],
        (7, -1) => &[2],
        (8, 1) => &[3],
        (8, -1) => &[1],
        (15, 1) => &[4],
        (16, 1) => &[3, 5],
        (16, -1) => &[1, 3, 5],
        (9 | 17 | 35 | 53, -1) => &[0],
        (1, 1) | (1, -1) => &[0],
        (3 | 11 | 19 | 37 | 55, 1) => &[0],
        (12 | 20 | 30, 2) => &[0],
        _ => &[],
    }
}
