//! E(n)-equivariant encoder over fully connected pharmacophore graphs.

use std::rc::Rc;

use ndarray::{Array2, NdFloat};
use pharmasyn_chem::{PharmacophoreClass, PharmacophoreGraph};
use pharmasyn_nn::{xavier, zeros, Graph, ParamError, ParamStore, Var};
use rand::Rng;

use crate::config::ModelConfig;
use crate::error::ModelError;
use crate::num;

pub const FEATURE_DIM: usize = PharmacophoreClass::COUNT;

/// Final per-point embeddings (the cross-attention memory, already projected
/// to `d_model`) and the updated coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput<T> {
    pub h: Array2<T>,
    pub x_out: Array2<T>,
}

/// Several graphs stacked into one block-diagonal graph.
#[derive(Debug, Clone)]
pub struct PackedGraphs<T> {
    pub features: Array2<T>,
    pub coords: Array2<T>,
    /// Directed edges i→j for every ordered pair i≠j within a graph.
    pub src: Rc<[usize]>,
    pub dst: Rc<[usize]>,
    /// Graph index of every point.
    pub graph_of: Vec<usize>,
    pub n_graphs: usize,
}

impl<T: NdFloat> PackedGraphs<T> {
    pub fn pack(graphs: &[&PharmacophoreGraph]) -> Result<Self, ModelError> {
        let mut feats = Vec::new();
        let mut coords = Vec::new();
        let mut graph_of = Vec::new();
        for (k, g) in graphs.iter().enumerate() {
            if g.is_empty() {
                return Err(ModelError::EmptyGraph);
            }
            for (f, x) in g.features().iter().zip(g.coords()) {
                feats.extend(f.iter().map(|&v| num::<T>(v)));
                coords.extend(x.iter().map(|&v| num::<T>(v)));
                graph_of.push(k);
            }
        }
        let n = graph_of.len();
        Self::from_parts(
            Array2::from_shape_vec((n, FEATURE_DIM), feats).expect("row-major features"),
            Array2::from_shape_vec((n, 3), coords).expect("row-major coords"),
            graph_of,
        )
    }

    /// Builds edges from raw arrays; `graph_of` must be sorted.
    pub fn from_parts(features: Array2<T>, coords: Array2<T>, graph_of: Vec<usize>) -> Result<Self, ModelError> {
        let n = graph_of.len();
        if features.nrows() != n || coords.nrows() != n {
            return Err(ModelError::ShapeMismatch {
                what: "points",
                expected: n,
                got: features.nrows().min(coords.nrows()),
            });
        }
        if features.ncols() != FEATURE_DIM {
            return Err(ModelError::ShapeMismatch {
                what: "feature width",
                expected: FEATURE_DIM,
                got: features.ncols(),
            });
        }
        if coords.ncols() != 3 {
            return Err(ModelError::ShapeMismatch {
                what: "coordinate width",
                expected: 3,
                got: coords.ncols(),
            });
        }
        if n == 0 {
            return Err(ModelError::EmptyGraph);
        }
        let (mut src, mut dst) = (Vec::new(), Vec::new());
        let mut start = 0;
        while start < n {
            let mut end = start;
            while end < n && graph_of[end] == graph_of[start] {
                end += 1;
            }
            for i in start..end {
                for j in start..end {
                    if i != j {
                        src.push(i);
                        dst.push(j);
                    }
                }
            }
            start = end;
        }
        let n_graphs = graph_of.last().map_or(0, |&g| g + 1);
        Ok(PackedGraphs {
            features,
            coords,
            src: src.into(),
            dst: dst.into(),
            graph_of,
            n_graphs,
        })
    }

    pub fn n_points(&self) -> usize {
        self.graph_of.len()
    }
}

pub(crate) fn add_params<T: NdFloat, R: Rng + ?Sized>(
    store: &mut ParamStore<T>,
    cfg: &ModelConfig,
    rng: &mut R,
) -> Result<(), ParamError> {
    let h = cfg.hidden;
    store.add("enc.embed.w", xavier(rng, FEATURE_DIM, h, 1.0))?;
    for l in 0..cfg.enc_layers {
        let p = |s: &str| format!("enc.{l}.{s}");
        store.add(p("e.wa"), xavier(rng, h, h, 1.0))?;
        store.add(p("e.wb"), xavier(rng, h, h, 1.0))?;
        store.add(p("e.wd"), xavier(rng, 1, h, 0.1))?;
        store.add(p("e.we"), xavier(rng, 1, h, 1.0))?;
        store.add(p("e.b1"), zeros(1, h))?;
        store.add(p("e.w2"), xavier(rng, h, h, 1.0))?;
        store.add(p("e.b2"), zeros(1, h))?;
        store.add(p("x.w1"), xavier(rng, h, h, 1.0))?;
        store.add(p("x.b1"), zeros(1, h))?;
        store.add(p("x.w2"), xavier(rng, h, 1, 0.001))?;
        store.add(p("h.wa"), xavier(rng, h, h, 1.0))?;
        // messages arrive summed over all neighbours
        store.add(p("h.wb"), xavier(rng, h, h, 0.25))?;
        store.add(p("h.b1"), zeros(1, h))?;
        store.add(p("h.w2"), xavier(rng, h, h, 1.0))?;
        store.add(p("h.b2"), zeros(1, h))?;
    }
    store.add("enc.out.w", xavier(rng, h, cfg.d_model, 1.0))?;
    store.add("enc.out.b", zeros(1, cfg.d_model))?;
    Ok(())
}

pub(crate) fn linear<T: NdFloat>(g: &mut Graph<T>, x: Var, w: &str, b: &str) -> Var {
    let w = g.param_named(w);
    let b = g.param_named(b);
    let y = g.matmul(x, w);
    g.add_row(y, b)
}

/// Lifts one-hot features to the hidden width (no bias).
pub fn embed_features<T: NdFloat>(g: &mut Graph<T>, features: Var) -> Var {
    let w = g.param_named("enc.embed.w");
    g.matmul(features, w)
}

/// One equivariant layer over the edge lists `src`/`dst`.
pub fn egnn_layer<T: NdFloat>(
    g: &mut Graph<T>,
    layer: usize,
    h: Var,
    x: Var,
    src: &Rc<[usize]>,
    dst: &Rc<[usize]>,
) -> Result<(Var, Var), ModelError> {
    let (n, width) = g.shape(h);
    if g.shape(x).0 != n {
        return Err(ModelError::ShapeMismatch {
            what: "coordinate rows",
            expected: n,
            got: g.shape(x).0,
        });
    }
    let p = |s: &str| format!("enc.{layer}.{s}");
    let (m_i, x_next) = if src.is_empty() {
        (g.constant(Array2::zeros((n, width))), x)
    } else {
        // φ_e first layer split over its inputs (h_i, h_j, d², e_ij = 1)
        let wa = g.param_named(&p("e.wa"));
        let wb = g.param_named(&p("e.wb"));
        let ha = g.matmul(h, wa);
        let hb = g.matmul(h, wb);
        let hi = g.gather(ha, src.clone());
        let hj = g.gather(hb, dst.clone());
        let xi = g.gather(x, src.clone());
        let xj = g.gather(x, dst.clone());
        let diff = g.sub(xi, xj);
        let sq = g.mul(diff, diff);
        let d2 = g.row_sum(sq);
        let wd = g.param_named(&p("e.wd"));
        let dterm = g.matmul(d2, wd);
        let pre = g.add(hi, hj);
        let pre = g.add(pre, dterm);
        let we = g.param_named(&p("e.we"));
        let pre = g.add_row(pre, we);
        let b1 = g.param_named(&p("e.b1"));
        let pre = g.add_row(pre, b1);
        let a = g.silu(pre);
        let m = linear(g, a, &p("e.w2"), &p("e.b2"));
        let m = g.silu(m);

        let gx = linear(g, m, &p("x.w1"), &p("x.b1"));
        let gx = g.silu(gx);
        let wx = g.param_named(&p("x.w2"));
        let gate = g.matmul(gx, wx);
        let shift = g.mul_col(diff, gate);
        let shift = g.segment_sum(shift, src.clone(), n);
        let x_next = g.add(x, shift);
        (g.segment_sum(m, src.clone(), n), x_next)
    };
    let wa = g.param_named(&p("h.wa"));
    let wb = g.param_named(&p("h.wb"));
    let a = g.matmul(h, wa);
    let b = g.matmul(m_i, wb);
    let pre = g.add(a, b);
    let b1 = g.param_named(&p("h.b1"));
    let pre = g.add_row(pre, b1);
    let act = g.silu(pre);
    let h_next = linear(g, act, &p("h.w2"), &p("h.b2"));
    Ok((h_next, x_next))
}

/// Runs every layer and the output projection. Returns (memory, coords).
pub fn encode_packed<T: NdFloat>(
    g: &mut Graph<T>,
    cfg: &ModelConfig,
    packed: &PackedGraphs<T>,
) -> Result<(Var, Var), ModelError> {
    let f = g.constant(packed.features.clone());
    let mut x = g.constant(packed.coords.clone());
    let mut h = embed_features(g, f);
    for l in 0..cfg.enc_layers {
        (h, x) = egnn_layer(g, l, h, x, &packed.src, &packed.dst)?;
    }
    let mem = linear(g, h, "enc.out.w", "enc.out.b");
    Ok((mem, x))
}
