//! Adam with global-norm gradient clipping.

use ndarray::{Array2, NdFloat, Zip};

use crate::graph::Gradients;
use crate::params::ParamStore;

#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Vec<Array2<T>>,
    v: Vec<Array2<T>>,
}

impl<T: NdFloat> Adam<T> {
    pub fn new(store: &ParamStore<T>, lr: f64) -> Self {
        let zeros = || {
            (0..store.len())
                .map(|i| Array2::zeros(store.value(i).raw_dim()))
                .collect()
        };
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One update. Parameters without a gradient are left untouched.
    pub fn step(&mut self, store: &mut ParamStore<T>, grads: &Gradients<T>) {
        self.t += 1;
        let f = |x: f64| T::from(x).expect("representable");
        let (b1, b2) = (f(self.beta1), f(self.beta2));
        let c1 = f(1.0 - self.beta1.powi(self.t));
        let c2 = f(1.0 - self.beta2.powi(self.t));
        let (lr, eps) = (f(self.lr), f(self.eps));
        let one = T::one();
        for id in 0..store.len() {
            let Some(g) = grads.get(id) else { continue };
            Zip::from(store.value_mut(id))
                .and(&mut self.m[id])
                .and(&mut self.v[id])
                .and(g)
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    let mh = *m / c1;
                    let vh = *v / c2;
                    *p -= lr * mh / (vh.sqrt() + eps);
                });
        }
    }
}

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm<T: NdFloat>(grads: &mut Gradients<T>, max_norm: f64) -> f64 {
    let sq: f64 = grads
        .grads
        .iter()
        .flatten()
        .map(|g| g.iter().map(|x| x.to_f64().unwrap_or(f64::NAN).powi(2)).sum::<f64>())
        .sum();
    let norm = sq.sqrt();
    if norm > max_norm && norm.is_finite() {
        let s = T::from(max_norm / norm).expect("representable");
        for g in grads.grads.iter_mut().flatten() {
            g.mapv_inplace(|x| x * s);
        }
    }
    norm
}
