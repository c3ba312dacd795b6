#![allow(dead_code)]

use ndarray::Array2;
use pharmasyn_chem::{PharmacophoreClass, PharmacophoreGraph, PharmacophorePoint};
use rand::Rng;

pub fn random_graph<R: Rng>(rng: &mut R, n: usize) -> PharmacophoreGraph {
    let points = (0..n)
        .map(|_| PharmacophorePoint {
            class: PharmacophoreClass::from_index(rng.random_range(0..PharmacophoreClass::COUNT)).unwrap(),
            xyz: [
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            ],
        })
        .collect();
    PharmacophoreGraph::new(points)
}

/// Uniform random rotation from a unit quaternion, optionally a reflection.
pub fn random_orthogonal<R: Rng>(rng: &mut R) -> [[f64; 3]; 3] {
    let mut q = [0.0f64; 4];
    loop {
        for v in q.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let n2: f64 = q.iter().map(|v| v * v).sum();
        if n2 > 1e-3 && n2 <= 1.0 {
            let n = n2.sqrt();
            q.iter_mut().for_each(|v| *v /= n);
            break;
        }
    }
    let [w, x, y, z] = q;
    let mut r = [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ];
    if rng.random_bool(0.5) {
        r.iter_mut().for_each(|row| row.iter_mut().for_each(|v| *v = -*v));
    }
    r
}

pub fn transform(p: [f64; 3], r: &[[f64; 3]; 3], t: [f64; 3]) -> [f64; 3] {
    let mut o = [0.0; 3];
    for i in 0..3 {
        o[i] = r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + t[i];
    }
    o
}

pub fn moved(g: &PharmacophoreGraph, r: &[[f64; 3]; 3], t: [f64; 3]) -> PharmacophoreGraph {
    PharmacophoreGraph::new(
        g.points
            .iter()
            .map(|p| PharmacophorePoint {
                class: p.class,
                xyz: transform(p.xyz, r, t),
            })
            .collect(),
    )
}

/// max |a − b| / max(max |b|, 1e-12)
pub fn rel_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
    num / den
}
