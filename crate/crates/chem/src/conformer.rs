//! 3D coordinate generation: randomized embedding refined against a small
//! distance-restraint force field (bond lengths, valence angles, planarity
//! through sp2 angles, and non-bonded repulsion).

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aromaticity;
use crate::element;
use crate::mol::{BondOrder, Mol};

const ATTEMPTS: usize = 8;
const BOND_WEIGHT: f64 = 100.0;
const ANGLE_WEIGHT: f64 = 40.0;
const REPULSION_WEIGHT: f64 = 10.0;

#[derive(Debug, Clone, Copy)]
struct Restraint {
    i: usize,
    j: usize,
    lower: f64,
    upper: f64,
    weight: f64,
}

/// Ideal length for a bond between two elements.
pub fn bond_length(a: u8, b: u8, order: BondOrder) -> f64 {
    let base = element::covalent_radius(a) + element::covalent_radius(b);
    base * match order {
        BondOrder::Single => 1.0,
        BondOrder::Aromatic => 0.92,
        BondOrder::Double => 0.88,
        BondOrder::Triple => 0.79,
    }
}

fn ideal_angle(mol: &Mol, center: usize, a: usize, b: usize) -> f64 {
    let rings = mol.rings();
    let mut doubles = 0;
    let mut triple = false;
    let mut unsaturated = mol.atom(center).aromatic;
    for &(_, bond) in mol.neighbors(center) {
        match mol.bond(bond).order {
            BondOrder::Double => {
                doubles += 1;
                unsaturated = true;
            }
            BondOrder::Triple => triple = true,
            BondOrder::Aromatic => unsaturated = true,
            BondOrder::Single => {}
        }
    }
    // amide/aniline-type nitrogens are planar
    let conjugated_lone_pair = mol.atom(center).element == 7
        && !unsaturated
        && mol.degree(center) <= 3
        && mol.neighbors(center).iter().any(|&(w, _)| {
            mol.atom(w).aromatic || mol.has_multiple_bond(w)
        });
    let hybrid: f64 = if mol.degree(center) >= 4 {
        109.47
    } else if triple || (doubles >= 2 && mol.degree(center) == 2) {
        180.0
    } else if (unsaturated || conjugated_lone_pair) && mol.degree(center) <= 3 {
        120.0
    } else {
        109.47
    };
    // small rings force their interior angles
    let ring_angle = rings
        .rings()
        .iter()
        .filter(|r| r.len() <= 5 && r.contains(&center) && r.contains(&a) && r.contains(&b))
        .map(|r| (r.len() as f64 - 2.0) * 180.0 / r.len() as f64)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |y| y.min(x))));
    if let Some(r) = ring_angle {
        return r.to_radians();
    }
    // exocyclic angle on a planar small-ring atom splits the remainder
    if hybrid == 120.0 {
        let interior = rings
            .rings()
            .iter()
            .filter(|r| r.len() <= 5 && r.contains(&center) && (r.contains(&a) ^ r.contains(&b)))
            .map(|r| (r.len() as f64 - 2.0) * 180.0 / r.len() as f64)
            .next();
        if let Some(i) = interior {
            return ((360.0 - i) / 2.0).to_radians();
        }
    }
    hybrid.to_radians()
}

fn restraints(mol: &Mol) -> Vec<Restraint> {
    let n = mol.atom_count();
    let dist = mol.topological_distances();
    let mut out = Vec::new();
    let mut fixed = vec![vec![false; n]; n];
    for b in mol.bonds() {
        let d0 = bond_length(mol.atom(b.a).element, mol.atom(b.b).element, b.order);
        out.push(Restraint {
            i: b.a,
            j: b.b,
            lower: d0,
            upper: d0,
            weight: BOND_WEIGHT,
        });
        fixed[b.a][b.b] = true;
        fixed[b.b][b.a] = true;
    }
    for c in 0..n {
        let nb = mol.neighbors(c);
        for x in 0..nb.len() {
            for y in (x + 1)..nb.len() {
                let (a, ba) = nb[x];
                let (b, bb) = nb[y];
                if fixed[a][b] {
                    continue;
                }
                let la = bond_length(mol.atom(a).element, mol.atom(c).element, mol.bond(ba).order);
                let lb = bond_length(mol.atom(b).element, mol.atom(c).element, mol.bond(bb).order);
                let theta = ideal_angle(mol, c, a, b);
                let d = (la * la + lb * lb - 2.0 * la * lb * theta.cos()).sqrt();
                out.push(Restraint {
                    i: a,
                    j: b,
                    lower: d,
                    upper: d,
                    weight: ANGLE_WEIGHT,
                });
                fixed[a][b] = true;
                fixed[b][a] = true;
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if fixed[i][j] {
                continue;
            }
            let lower = if dist[i][j] == 3 { 2.5 } else { 3.0 };
            out.push(Restraint {
                i,
                j,
                lower,
                upper: f64::INFINITY,
                weight: REPULSION_WEIGHT,
            });
        }
    }
    out
}

fn energy_and_grad(
    coords: &[f64],
    dim: usize,
    restraints: &[Restraint],
    fourth_weight: f64,
    grad: &mut [f64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut e = 0.0;
    for r in restraints {
        let (pi, pj) = (r.i * dim, r.j * dim);
        let mut d2 = 0.0;
        for k in 0..dim {
            let diff = coords[pi + k] - coords[pj + k];
            d2 += diff * diff;
        }
        let d = d2.sqrt().max(1e-8);
        let viol = if d < r.lower {
            d - r.lower
        } else if d > r.upper {
            d - r.upper
        } else {
            continue;
        };
        e += r.weight * viol * viol;
        let scale = 2.0 * r.weight * viol / d;
        for k in 0..dim {
            let g = scale * (coords[pi + k] - coords[pj + k]);
            grad[pi + k] += g;
            grad[pj + k] -= g;
        }
    }
    if dim == 4 && fourth_weight > 0.0 {
        for i in (3..coords.len()).step_by(4) {
            e += fourth_weight * coords[i] * coords[i];
            grad[i] += 2.0 * fourth_weight * coords[i];
        }
    }
    e
}

/// FIRE minimizer; returns the final energy.
fn minimize(coords: &mut [f64], dim: usize, rs: &[Restraint], fourth_weight: f64, steps: usize) -> f64 {
    let n = coords.len();
    let mut v = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut dt: f64 = 0.02;
    let dt_max = 0.1;
    let mut alpha = 0.1;
    let mut since_negative = 0;
    let mut e = energy_and_grad(coords, dim, rs, fourth_weight, &mut g);
    for _ in 0..steps {
        let p: f64 = v.iter().zip(&g).map(|(vi, gi)| -vi * gi).sum();
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let fnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if fnorm < 1e-6 {
            break;
        }
        if p > 0.0 {
            for k in 0..n {
                v[k] = (1.0 - alpha) * v[k] - alpha * g[k] / fnorm * vnorm;
            }
            since_negative += 1;
            if since_negative > 5 {
                dt = (dt * 1.1).min(dt_max);
                alpha *= 0.99;
            }
        } else {
            v.iter_mut().for_each(|x| *x = 0.0);
            dt *= 0.5;
            alpha = 0.1;
            since_negative = 0;
        }
        for k in 0..n {
            v[k] -= dt * g[k];
            coords[k] += dt * v[k];
        }
        e = energy_and_grad(coords, dim, rs, fourth_weight, &mut g);
    }
    e
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedFailure {
    pub reason: String,
}

/// Generates heavy-atom coordinates deterministically from `seed`.
pub fn embed(mol: &Mol, seed: u64) -> Result<Vec<[f64; 3]>, EmbedFailure> {
    let n = mol.atom_count();
    if n == 0 {
        return Err(EmbedFailure {
            reason: "empty molecule".into(),
        });
    }
    if n == 1 {
        return Ok(vec![[0.0; 3]]);
    }
    let rs = restraints(mol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = 2.0 + 2.0 * (n as f64).cbrt();
    let mut best: Option<(f64, Vec<[f64; 3]>)> = None;
    for _ in 0..ATTEMPTS {
        let mut c4: Vec<f64> = (0..n * 4).map(|_| rng.random_range(-side..side)).collect();
        minimize(&mut c4, 4, &rs, 0.0, 600);
        minimize(&mut c4, 4, &rs, 5.0, 800);
        let mut c3: Vec<f64> = Vec::with_capacity(n * 3);
        for i in 0..n {
            c3.extend_from_slice(&c4[i * 4..i * 4 + 3]);
        }
        let e = minimize(&mut c3, 3, &rs, 0.0, 1500);
        if !c3.iter().all(|x| x.is_finite()) {
            continue;
        }
        let coords: Vec<[f64; 3]> = c3.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        if acceptable(&coords, &rs) {
            return Ok(center(coords));
        }
        if best.as_ref().is_none_or(|(be, _)| e < *be) {
            best = Some((e, coords));
        }
    }
    Err(EmbedFailure {
        reason: format!(
            "no acceptable geometry after {ATTEMPTS} attempts (best energy {:.3})",
            best.map_or(f64::NAN, |b| b.0)
        ),
    })
}

fn acceptable(coords: &[[f64; 3]], rs: &[Restraint]) -> bool {
    rs.iter().all(|r| {
        let d = dist(&coords[r.i], &coords[r.j]);
        let tol = if r.weight == BOND_WEIGHT {
            0.1
        } else if r.weight == ANGLE_WEIGHT {
            0.25
        } else {
            0.5
        };
        d >= r.lower - tol && d <= r.upper + tol
    })
}

fn center(mut coords: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    let n = coords.len() as f64;
    let mut c = [0.0; 3];
    for p in &coords {
        for k in 0..3 {
            c[k] += p[k] / n;
        }
    }
    for p in &mut coords {
        for k in 0..3 {
            p[k] -= c[k];
        }
    }
    coords
}

pub fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// MDL molfile (V2000) block with heavy atoms, Kekulé bonds and charges.
pub fn to_molblock(mol: &Mol, coords: &[[f64; 3]], name: &str) -> String {
    let mut kek = mol.clone();
    if aromaticity::kekulize(&mut kek).is_err() {
        kek = mol.clone();
    }
    let mut s = String::new();
    writeln!(s, "{name}").unwrap();
    writeln!(s, "  pharmasyn").unwrap();
    writeln!(s).unwrap();
    writeln!(s, "{:>3}{:>3}  0  0  0  0  0  0  0  0999 V2000", kek.atom_count(), kek.bond_count()).unwrap();
    for (i, atom) in kek.atoms().iter().enumerate() {
        let p = coords[i];
        writeln!(
            s,
            "{:>10.4}{:>10.4}{:>10.4} {:<3} 0  0  0  0  0  0  0  0  0  0  0  0",
            p[0],
            p[1],
            p[2],
            element::symbol(atom.element)
        )
        .unwrap();
    }
    for b in kek.bonds() {
        let code = match b.order {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        };
        writeln!(s, "{:>3}{:>3}{:>3}  0", b.a + 1, b.b + 1, code).unwrap();
    }
    let charged: Vec<(usize, i8)> = kek
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.charge != 0)
        .map(|(i, a)| (i, a.charge))
        .collect();
    for chunk in charged.chunks(8) {
        write!(s, "M  CHG{:>3}", chunk.len()).unwrap();
        for (i, c) in chunk {
            write!(s, " {:>3} {:>3}", i + 1, c).unwrap();
        }
        writeln!(s).unwrap();
    }
    writeln!(s, "M  END").unwrap();
    s
}
