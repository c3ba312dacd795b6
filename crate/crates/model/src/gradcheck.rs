//! Central-difference verification of analytic gradients.

use pharmasyn_nn::Graph;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::model::Model;
use crate::training::{forward, Batch};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub entries_checked: usize,
    pub tensors_checked: usize,
    pub max_rel_err: f64,
    /// Tensor name and flat index of the worst entry.
    pub worst: Option<(String, usize)>,
}

/// |a − n| / max(|a|, |n|, floor)
pub fn rel_err(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares backprop gradients of the full loss (targets not detached)
/// against central differences on up to `per_tensor` random entries of
/// every tensor. Each estimate extrapolates central differences at `step`
/// and `step / 2`.
pub fn gradient_check(
    model: &Model<f64>,
    batch: &Batch<f64>,
    per_tensor: usize,
    step: f64,
    seed: u64,
) -> Result<GradCheckReport, ModelError> {
    let loss = |m: &Model<f64>| -> Result<f64, ModelError> {
        let mut g = Graph::new(&m.params);
        let f = forward(&mut g, &m.config, batch, false)?;
        Ok(g.scalar(f.total))
    };
    let grads = {
        let mut g = Graph::new(&model.params);
        let f = forward(&mut g, &model.config, batch, false)?;
        g.backward(f.total)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe = model.clone();
    let mut report = GradCheckReport {
        entries_checked: 0,
        tensors_checked: 0,
        max_rel_err: 0.0,
        worst: None,
    };
    for id in 0..model.params.len() {
        let n = model.params.value(id).len();
        let analytic = grads.dense(&model.params, id);
        let picks = sample(&mut rng, n, per_tensor.min(n));
        let cols = model.params.value(id).ncols();
        for flat in picks.iter() {
            let at = [flat / cols, flat % cols];
            let orig = probe.params.value(id)[at];
            let set = |m: &mut Model<f64>, v: f64| m.params.value_mut(id)[at] = v;
            let mut central = |h: f64| -> Result<f64, ModelError> {
                set(&mut probe, orig + h);
                let up = loss(&probe)?;
                set(&mut probe, orig - h);
                let down = loss(&probe)?;
                set(&mut probe, orig);
                Ok((up - down) / (2.0 * h))
            };
            // Richardson: cancels the h² term, so a step large enough to keep
            // rounding noise small does not cost accuracy on curved entries.
            let (coarse, fine) = (central(step)?, central(step / 2.0)?);
            let numeric = (4.0 * fine - coarse) / 3.0;
            let e = rel_err(analytic[at], numeric, 1e-6);
            if e > report.max_rel_err || report.worst.is_none() {
                report.max_rel_err = e;
                report.worst = Some((model.params.name(id).to_string(), flat));
            }
            report.entries_checked += 1;
        }
        report.tensors_checked += 1;
    }
    Ok(report)
}
