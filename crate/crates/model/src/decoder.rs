//! Causal transformer decoder over fingerprint tokens, block retrieval and
//! the reaction head.

use std::cmp::Ordering;
use std::rc::Rc;

use ndarray::{Array1, Array2, ArrayView1, NdFloat};
use pharmasyn_chem::BitFingerprint;
use pharmasyn_nn::{normal, softmax_rows, xavier, zeros, Graph, ParamError, ParamStore, Var};
use pharmasyn_synthesis::BuildingBlockCatalog;
use rand::Rng;

use crate::config::ModelConfig;
use crate::egnn::linear;
use crate::error::ModelError;
use crate::num;

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Start,
    /// On-bit positions of a fingerprint.
    Fp(Rc<[usize]>),
}

impl Token {
    pub fn fingerprint(fp: &BitFingerprint) -> Token {
        Token::Fp(fp.on_bits().into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenSequence {
    pub tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn start() -> Self {
        TokenSequence {
            tokens: vec![Token::Start],
        }
    }

    pub fn push(&mut self, fp: &BitFingerprint) {
        self.tokens.push(Token::fingerprint(fp));
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn check(&self, fp_bits: usize) -> Result<(), ModelError> {
        if self.tokens.first() != Some(&Token::Start) || self.tokens[1..].contains(&Token::Start) {
            return Err(ModelError::ShapeMismatch {
                what: "START token position",
                expected: 0,
                got: self.tokens.iter().position(|t| *t == Token::Start).unwrap_or(usize::MAX),
            });
        }
        for t in &self.tokens {
            if let Token::Fp(bits) = t {
                if let Some(&b) = bits.iter().find(|&&b| b >= fp_bits) {
                    return Err(ModelError::ShapeMismatch {
                        what: "fingerprint bit",
                        expected: fp_bits,
                        got: b,
                    });
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn add_params<T: NdFloat, R: Rng + ?Sized>(
    store: &mut ParamStore<T>,
    cfg: &ModelConfig,
    rng: &mut R,
) -> Result<(), ParamError> {
    let (d, f, bits) = (cfg.d_model, cfg.ff, cfg.fp_bits);
    store.add("dec.tok.w1", xavier(rng, bits, d, 1.0))?;
    store.add("dec.tok.b1", zeros(1, d))?;
    store.add("dec.tok.w2", xavier(rng, d, d, 1.0))?;
    store.add("dec.tok.b2", zeros(1, d))?;
    store.add("dec.start", normal(rng, 1, d, 1.0))?;
    store.add("dec.end", normal(rng, 1, d, 1.0))?;
    for l in 0..cfg.dec_layers {
        let p = |s: &str| format!("dec.{l}.{s}");
        for ln in ["ln1", "ln2", "ln3"] {
            store.add(p(&format!("{ln}.g")), Array2::ones((1, d)))?;
            store.add(p(&format!("{ln}.b")), zeros(1, d))?;
        }
        for att in ["self", "cross"] {
            for w in ["q", "k", "v", "o"] {
                store.add(p(&format!("{att}.w{w}")), xavier(rng, d, d, 1.0))?;
                store.add(p(&format!("{att}.b{w}")), zeros(1, d))?;
            }
        }
        store.add(p("ff.w1"), xavier(rng, d, f, 1.0))?;
        store.add(p("ff.b1"), zeros(1, f))?;
        store.add(p("ff.w2"), xavier(rng, f, d, 1.0))?;
        store.add(p("ff.b2"), zeros(1, d))?;
    }
    store.add("dec.lnf.g", Array2::ones((1, d)))?;
    store.add("dec.lnf.b", zeros(1, d))?;
    store.add("proj.w", xavier(rng, bits, d, 1.0))?;
    store.add("proj.b", zeros(1, d))?;
    store.add("rxn.w", xavier(rng, 2 * d, cfg.rxn_vocab, 1.0))?;
    store.add("rxn.b", zeros(1, cfg.rxn_vocab))?;
    Ok(())
}

/// Sinusoidal encoding of `positions` at width `d`.
pub fn positional_encoding<T: NdFloat>(positions: &[usize], d: usize) -> Array2<T> {
    Array2::from_shape_fn((positions.len(), d), |(r, c)| {
        let pos = positions[r] as f64;
        let freq = 10000f64.powf((c - c % 2) as f64 / d as f64);
        num(if c % 2 == 0 { (pos / freq).sin() } else { (pos / freq).cos() })
    })
}

/// Several token sequences stacked row-wise, each tied to one graph.
#[derive(Debug, Clone)]
pub struct PackedSequences {
    pub bits: Rc<[Vec<usize>]>,
    pub is_start: Vec<bool>,
    pub positions: Vec<usize>,
    pub seq_of: Vec<usize>,
    /// Graph (memory block) each sequence attends to.
    pub graph_of_seq: Vec<usize>,
}

impl PackedSequences {
    pub fn pack(seqs: &[&TokenSequence], graph_of_seq: Vec<usize>, fp_bits: usize) -> Result<Self, ModelError> {
        assert_eq!(seqs.len(), graph_of_seq.len());
        let mut bits = Vec::new();
        let mut is_start = Vec::new();
        let mut positions = Vec::new();
        let mut seq_of = Vec::new();
        for (s, seq) in seqs.iter().enumerate() {
            seq.check(fp_bits)?;
            for (p, t) in seq.tokens.iter().enumerate() {
                match t {
                    Token::Start => {
                        bits.push(Vec::new());
                        is_start.push(true);
                    }
                    Token::Fp(b) => {
                        bits.push(b.to_vec());
                        is_start.push(false);
                    }
                }
                positions.push(p);
                seq_of.push(s);
            }
        }
        Ok(PackedSequences {
            bits: bits.into(),
            is_start,
            positions,
            seq_of,
            graph_of_seq,
        })
    }

    pub fn n_tokens(&self) -> usize {
        self.seq_of.len()
    }

    pub fn causal_mask(&self) -> Array2<bool> {
        let n = self.n_tokens();
        Array2::from_shape_fn((n, n), |(i, j)| self.seq_of[i] == self.seq_of[j] && j <= i)
    }

    pub fn cross_mask(&self, graph_of_point: &[usize]) -> Array2<bool> {
        Array2::from_shape_fn((self.n_tokens(), graph_of_point.len()), |(i, j)| {
            self.graph_of_seq[self.seq_of[i]] == graph_of_point[j]
        })
    }
}

/// Fingerprint MLP: sparse first layer, SiLU, dense second layer.
pub fn token_mlp<T: NdFloat>(g: &mut Graph<T>, bits: Rc<[Vec<usize>]>) -> Var {
    let w1 = g.param_named("dec.tok.w1");
    let a = g.sparse_rows(w1, bits);
    let b1 = g.param_named("dec.tok.b1");
    let a = g.add_row(a, b1);
    let a = g.silu(a);
    linear(g, a, "dec.tok.w2", "dec.tok.b2")
}

/// START rows get `start_embed`, fingerprint rows the token MLP; PE added.
pub fn embed_sequence<T: NdFloat>(g: &mut Graph<T>, cfg: &ModelConfig, seqs: &PackedSequences) -> Var {
    let n = seqs.n_tokens();
    let fp_rows = token_mlp(g, seqs.bits.clone());
    let keep = Array2::from_shape_fn((n, 1), |(i, _)| num::<T>(if seqs.is_start[i] { 0.0 } else { 1.0 }));
    let fp_rows = g.mul_const(fp_rows, Rc::new(keep.clone()));
    let start_col = g.constant(keep.mapv(|v| T::one() - v));
    let start = g.param_named("dec.start");
    let start_rows = g.matmul(start_col, start);
    let e = g.add(fp_rows, start_rows);
    let pe = g.constant(positional_encoding(&seqs.positions, cfg.d_model));
    g.add(e, pe)
}

fn layer_norm<T: NdFloat>(g: &mut Graph<T>, x: Var, prefix: &str) -> Var {
    let n = g.layer_norm(x, LN_EPS);
    let gain = g.param_named(&format!("{prefix}.g"));
    let bias = g.param_named(&format!("{prefix}.b"));
    let n = g.mul_row(n, gain);
    g.add_row(n, bias)
}

/// Multi-head scaled dot-product attention with a boolean keep-mask.
pub fn attention<T: NdFloat>(
    g: &mut Graph<T>,
    prefix: &str,
    heads: usize,
    q_in: Var,
    kv_in: Var,
    mask: &Rc<Array2<bool>>,
) -> Var {
    let p = |s: &str| format!("{prefix}.{s}");
    let q = linear(g, q_in, &p("wq"), &p("bq"));
    let k = linear(g, kv_in, &p("wk"), &p("bk"));
    let v = linear(g, kv_in, &p("wv"), &p("bv"));
    let d = g.shape(q).1;
    let dk = d / heads;
    let scale = num::<T>(1.0 / (dk as f64).sqrt());
    let mut outs = Vec::with_capacity(heads);
    for h in 0..heads {
        let qh = g.slice_cols(q, h * dk, (h + 1) * dk);
        let kh = g.slice_cols(k, h * dk, (h + 1) * dk);
        let vh = g.slice_cols(v, h * dk, (h + 1) * dk);
        let s = g.matmul_bt(qh, kh);
        let s = g.scale(s, scale);
        let s = g.mask_fill(s, mask.clone());
        let a = g.softmax(s);
        outs.push(g.matmul(a, vh));
    }
    let cat = g.concat_cols(&outs);
    linear(g, cat, &p("wo"), &p("bo"))
}

/// Pre-norm decoder stack. Returns Z, one row per token.
pub fn decode<T: NdFloat>(
    g: &mut Graph<T>,
    cfg: &ModelConfig,
    embedded: Var,
    memory: Var,
    causal: &Rc<Array2<bool>>,
    cross: &Rc<Array2<bool>>,
) -> Result<Var, ModelError> {
    let (t, d) = g.shape(embedded);
    let (m, dm) = g.shape(memory);
    if m == 0 {
        return Err(ModelError::EmptyGraph);
    }
    if dm != d || d != cfg.d_model {
        return Err(ModelError::ShapeMismatch {
            what: "d_model",
            expected: cfg.d_model,
            got: if dm != d { dm } else { d },
        });
    }
    if causal.dim() != (t, t) || cross.dim() != (t, m) {
        return Err(ModelError::ShapeMismatch {
            what: "attention mask",
            expected: t,
            got: causal.nrows(),
        });
    }
    let mut x = embedded;
    for l in 0..cfg.dec_layers {
        let p = |s: &str| format!("dec.{l}.{s}");
        let n = layer_norm(g, x, &p("ln1"));
        let a = attention(g, &p("self"), cfg.heads, n, n, causal);
        x = g.add(x, a);
        let n = layer_norm(g, x, &p("ln2"));
        let a = attention(g, &p("cross"), cfg.heads, n, memory, cross);
        x = g.add(x, a);
        let n = layer_norm(g, x, &p("ln3"));
        let f = linear(g, n, &p("ff.w1"), &p("ff.b1"));
        let f = g.silu(f);
        let f = linear(g, f, &p("ff.w2"), &p("ff.b2"));
        x = g.add(x, f);
    }
    Ok(layer_norm(g, x, "dec.lnf"))
}

/// Z′ = W·fp + b for each row of on-bits.
pub fn project_blocks<T: NdFloat>(g: &mut Graph<T>, bits: Rc<[Vec<usize>]>) -> Var {
    let w = g.param_named("proj.w");
    let b = g.param_named("proj.b");
    let z = g.sparse_rows(w, bits);
    g.add_row(z, b)
}

/// Reaction logits from concat(Z, Z′ of the next block).
pub fn reaction_logits<T: NdFloat>(g: &mut Graph<T>, z: Var, zprime: Var) -> Var {
    let cat = g.concat_cols(&[z, zprime]);
    linear(g, cat, "rxn.w", "rxn.b")
}

/// What the block head picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockChoice {
    Block(u32),
    End,
}

/// Z′ rows for every catalog block followed by the END row.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalIndex<T> {
    pub zprime: Array2<T>,
    pub ids: Vec<BlockChoice>,
    /// Squared row norms.
    norms2: Vec<T>,
}

impl<T: NdFloat> RetrievalIndex<T> {
    pub fn new(zprime: Array2<T>, ids: Vec<BlockChoice>) -> Self {
        assert_eq!(zprime.nrows(), ids.len());
        let norms2 = zprime.rows().into_iter().map(|r| r.dot(&r)).collect();
        RetrievalIndex { zprime, ids, norms2 }
    }

    pub fn build(params: &ParamStore<T>, catalog: &BuildingBlockCatalog) -> Self {
        let mut g = Graph::new(params);
        let bits: Vec<Vec<usize>> = catalog.blocks().iter().map(|b| b.fp.on_bits()).collect();
        let z = project_blocks(&mut g, bits.into());
        let mut rows = g.value(z).clone();
        let end = params.get("dec.end").expect("end embedding");
        rows.push_row(end.row(0)).expect("matching width");
        let mut ids: Vec<BlockChoice> = catalog.blocks().iter().map(|b| BlockChoice::Block(b.id)).collect();
        ids.push(BlockChoice::End);
        Self::new(rows, ids)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row_of(&self, choice: BlockChoice) -> Option<usize> {
        self.ids.iter().position(|&c| c == choice)
    }

    /// Cosine of `z` against every row; zero-norm rows score 0. Computed as
    /// r·z / sqrt(|r|²|z|²) so a row identical to `z` scores exactly 1.
    pub fn cosines(&self, z: ArrayView1<T>) -> Result<Vec<T>, ModelError> {
        let nz2 = z.dot(&z);
        if nz2 == T::zero() {
            return Err(ModelError::ZeroVector);
        }
        Ok(self
            .zprime
            .rows()
            .into_iter()
            .zip(&self.norms2)
            .map(|(r, &nr2)| if nr2 == T::zero() { T::zero() } else { r.dot(&z) / (nr2 * nz2).sqrt() })
            .collect())
    }

    /// All rows by descending cosine; ties by smallest id, END last.
    pub fn ranked(&self, z: ArrayView1<T>) -> Result<Vec<(BlockChoice, T)>, ModelError> {
        let cos = self.cosines(z)?;
        let mut order: Vec<(BlockChoice, T)> = self.ids.iter().copied().zip(cos).collect();
        order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
        Ok(order)
    }
}

/// Cosine argmax over the index; ties go to the smallest id.
pub fn select_block<T: NdFloat>(z: ArrayView1<T>, index: &RetrievalIndex<T>) -> Result<BlockChoice, ModelError> {
    if index.is_empty() {
        return Err(ModelError::ShapeMismatch {
            what: "retrieval index rows",
            expected: 1,
            got: 0,
        });
    }
    let cos = index.cosines(z)?;
    let mut best = 0;
    for k in 1..cos.len() {
        let better = cos[k] > cos[best] || (cos[k] == cos[best] && index.ids[k] < index.ids[best]);
        if better {
            best = k;
        }
    }
    Ok(index.ids[best])
}

/// Softmax over the reaction vocabulary for one step.
pub fn predict_reaction<T: NdFloat>(params: &ParamStore<T>, z: ArrayView1<T>, zprime_next: ArrayView1<T>) -> Array1<T> {
    let mut g = Graph::new(params);
    let zr = g.constant(z.to_owned().insert_axis(ndarray::Axis(0)));
    let zp = g.constant(zprime_next.to_owned().insert_axis(ndarray::Axis(0)));
    let l = reaction_logits(&mut g, zr, zp);
    softmax_rows(g.value(l)).row(0).to_owned()
}
