//! Tape-based reverse-mode differentiation over 2-D arrays.

use std::rc::Rc;

use ndarray::{s, Array2, Axis, NdFloat, Zip};

use crate::params::ParamStore;

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

fn c<T: NdFloat>(x: f64) -> T {
    T::from(x).expect("representable constant")
}

enum Op<T> {
    Leaf,
    Param(usize),
    MatMul(Var, Var),
    /// a · bᵀ
    MatMulBt(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    MulRow(Var, Var),
    MulCol(Var, Var),
    MulConst(Var, Rc<Array2<T>>),
    Scale(Var, T),
    Silu(Var),
    RowSum(Var),
    SumAll(Var),
    Gather(Var, Rc<[usize]>),
    SegmentSum(Var, Rc<[usize]>),
    SparseRows(Var, Rc<[Vec<usize>]>),
    SliceCols(Var, usize),
    ConcatCols(Vec<Var>),
    /// Entries where the mask is false are set to -inf.
    MaskFill(Var, Rc<Array2<bool>>),
    Softmax(Var),
    /// Saves per-row 1/σ; the node value is the normalized output.
    LayerNorm(Var, Array2<T>),
    /// Saves per-row |a| and |b|.
    RowCosine(Var, Var, Array2<T>, Array2<T>),
    /// Saves softmax probabilities.
    CrossEntropy(Var, Rc<[Option<usize>]>, Rc<[T]>, Array2<T>),
}

struct Node<T> {
    value: Option<Array2<T>>,
    op: Op<T>,
}

/// One forward pass. Parameters are read from `params` without copying.
pub struct Graph<'p, T: NdFloat> {
    params: &'p ParamStore<T>,
    nodes: Vec<Node<T>>,
    param_vars: Vec<Option<Var>>,
}

/// Gradients indexed like the parameter store.
pub struct Gradients<T> {
    pub grads: Vec<Option<Array2<T>>>,
}

impl<T: NdFloat> Gradients<T> {
    pub fn get(&self, id: usize) -> Option<&Array2<T>> {
        self.grads[id].as_ref()
    }

    /// Dense gradient, zeros for parameters that did not take part.
    pub fn dense(&self, store: &ParamStore<T>, id: usize) -> Array2<T> {
        self.grads[id]
            .clone()
            .unwrap_or_else(|| Array2::zeros(store.value(id).raw_dim()))
    }
}

impl<'p, T: NdFloat> Graph<'p, T> {
    pub fn new(params: &'p ParamStore<T>) -> Self {
        Graph {
            params,
            nodes: Vec::new(),
            param_vars: vec![None; params.len()],
        }
    }

    pub fn params(&self) -> &'p ParamStore<T> {
        self.params
    }

    fn push(&mut self, value: Array2<T>, op: Op<T>) -> Var {
        self.nodes.push(Node {
            value: Some(value),
            op,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Array2<T> {
        match &self.nodes[v.0].op {
            Op::Param(id) => self.params.value(*id),
            _ => self.nodes[v.0].value.as_ref().expect("node value"),
        }
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.value(v).dim()
    }

    pub fn scalar(&self, v: Var) -> T {
        let a = self.value(v);
        assert_eq!(a.dim(), (1, 1), "not a scalar");
        a[[0, 0]]
    }

    /// Constant input; receives no gradient.
    pub fn constant(&mut self, a: Array2<T>) -> Var {
        self.push(a, Op::Leaf)
    }

    /// Copy of `v` cut off from the gradient.
    pub fn detach(&mut self, v: Var) -> Var {
        let a = self.value(v).clone();
        self.constant(a)
    }

    /// Parameter leaf; repeated calls share one node.
    pub fn param(&mut self, id: usize) -> Var {
        if let Some(v) = self.param_vars[id] {
            return v;
        }
        self.nodes.push(Node {
            value: None,
            op: Op::Param(id),
        });
        let v = Var(self.nodes.len() - 1);
        self.param_vars[id] = Some(v);
        v
    }

    pub fn param_named(&mut self, name: &str) -> Var {
        let id = self
            .params
            .id(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"));
        self.param(id)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    pub fn matmul_bt(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(&self.value(b).t());
        self.push(v, Op::MatMulBt(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) - self.value(b);
        self.push(v, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) * self.value(b);
        self.push(v, Op::Mul(a, b))
    }

    /// a + row (1×n broadcast over rows).
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        assert_eq!(self.shape(row).0, 1);
        let v = self.value(a) + self.value(row);
        self.push(v, Op::AddRow(a, row))
    }

    pub fn mul_row(&mut self, a: Var, row: Var) -> Var {
        assert_eq!(self.shape(row).0, 1);
        let v = self.value(a) * self.value(row);
        self.push(v, Op::MulRow(a, row))
    }

    /// Scales row i of `a` by col[i] (col is m×1).
    pub fn mul_col(&mut self, a: Var, col: Var) -> Var {
        assert_eq!(self.shape(col).1, 1);
        let v = self.value(a) * self.value(col);
        self.push(v, Op::MulCol(a, col))
    }

    pub fn mul_const(&mut self, a: Var, k: Rc<Array2<T>>) -> Var {
        let v = self.value(a) * &*k;
        self.push(v, Op::MulConst(a, k))
    }

    pub fn scale(&mut self, a: Var, s: T) -> Var {
        let v = self.value(a) * s;
        self.push(v, Op::Scale(a, s))
    }

    pub fn silu(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(|x| x / (T::one() + (-x).exp()));
        self.push(v, Op::Silu(a))
    }

    /// Row sums as an m×1 column.
    pub fn row_sum(&mut self, a: Var) -> Var {
        let v = self.value(a).sum_axis(Axis(1)).insert_axis(Axis(1));
        self.push(v, Op::RowSum(a))
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let v = Array2::from_elem((1, 1), self.value(a).sum());
        self.push(v, Op::SumAll(a))
    }

    /// Rows of `a` picked by `idx`.
    pub fn gather(&mut self, a: Var, idx: Rc<[usize]>) -> Var {
        let v = self.value(a).select(Axis(0), &idx);
        self.push(v, Op::Gather(a, idx))
    }

    /// out[idx[k]] += a[k]; `n` output rows.
    pub fn segment_sum(&mut self, a: Var, idx: Rc<[usize]>, n: usize) -> Var {
        let src = self.value(a);
        assert_eq!(src.nrows(), idx.len());
        let mut v = Array2::zeros((n, src.ncols()));
        for (k, &i) in idx.iter().enumerate() {
            let mut row = v.row_mut(i);
            row += &src.row(k);
        }
        self.push(v, Op::SegmentSum(a, idx))
    }

    /// out[t] = Σ_{k ∈ rows[t]} w[k]: a binary sparse matrix times `w`.
    pub fn sparse_rows(&mut self, w: Var, rows: Rc<[Vec<usize>]>) -> Var {
        let wv = self.value(w);
        let mut v = Array2::zeros((rows.len(), wv.ncols()));
        for (t, r) in rows.iter().enumerate() {
            let mut out = v.row_mut(t);
            for &k in r {
                out += &wv.row(k);
            }
        }
        self.push(v, Op::SparseRows(w, rows))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Var {
        let v = self.value(a).slice(s![.., start..end]).to_owned();
        self.push(v, Op::SliceCols(a, start))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|&p| self.value(p).view()).collect();
        let v = ndarray::concatenate(Axis(1), &views).expect("equal row counts");
        self.push(v, Op::ConcatCols(parts.to_vec()))
    }

    pub fn mask_fill(&mut self, a: Var, mask: Rc<Array2<bool>>) -> Var {
        let mut v = self.value(a).clone();
        Zip::from(&mut v).and(&*mask).for_each(|x, &keep| {
            if !keep {
                *x = T::neg_infinity();
            }
        });
        self.push(v, Op::MaskFill(a, mask))
    }

    /// Row-wise softmax.
    pub fn softmax(&mut self, a: Var) -> Var {
        let v = softmax_rows(self.value(a));
        self.push(v, Op::Softmax(a))
    }

    /// Row-wise standardization without affine terms.
    pub fn layer_norm(&mut self, a: Var, eps: f64) -> Var {
        let x = self.value(a);
        let n = c::<T>(x.ncols() as f64);
        let mut out = x.clone();
        let mut inv = Array2::zeros((x.nrows(), 1));
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            let mean = row.sum() / n;
            row.mapv_inplace(|v| v - mean);
            let var = row.iter().fold(T::zero(), |s, &v| s + v * v) / n;
            let r = T::one() / (var + c(eps)).sqrt();
            row.mapv_inplace(|v| v * r);
            inv[[i, 0]] = r;
        }
        self.push(out, Op::LayerNorm(a, inv))
    }

    /// Row-wise cosine similarity (m×1). Zero rows give 0.
    pub fn row_cosine(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.dim(), y.dim());
        let m = x.nrows();
        let mut v = Array2::zeros((m, 1));
        let mut na = Array2::zeros((m, 1));
        let mut nb = Array2::zeros((m, 1));
        for i in 0..m {
            let (xr, yr) = (x.row(i), y.row(i));
            let p = xr.dot(&yr);
            let (u, w) = (xr.dot(&xr).sqrt(), yr.dot(&yr).sqrt());
            na[[i, 0]] = u;
            nb[[i, 0]] = w;
            v[[i, 0]] = if u > T::zero() && w > T::zero() { p / (u * w) } else { T::zero() };
        }
        self.push(v, Op::RowCosine(a, b, na, nb))
    }

    /// Σ_t weight_t · (logsumexp(l_t) − l_t[y_t]) over rows with a target.
    pub fn cross_entropy(&mut self, logits: Var, targets: Rc<[Option<usize>]>, weights: Rc<[T]>) -> Var {
        let l = self.value(logits);
        assert_eq!(l.nrows(), targets.len());
        let probs = softmax_rows(l);
        let mut loss = T::zero();
        for (t, y) in targets.iter().enumerate() {
            if let Some(y) = *y {
                let row = l.row(t);
                let m = row.fold(T::neg_infinity(), |a, &b| a.max(b));
                let lse = m + row.fold(T::zero(), |s, &v| s + (v - m).exp()).ln();
                loss += weights[t] * (lse - row[y]);
            }
        }
        self.push(Array2::from_elem((1, 1), loss), Op::CrossEntropy(logits, targets, weights, probs))
    }

    /// Backpropagates from a scalar node.
    pub fn backward(&self, out: Var) -> Gradients<T> {
        assert_eq!(self.shape(out), (1, 1), "backward needs a scalar");
        let mut g: Vec<Option<Array2<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        g[out.0] = Some(Array2::ones((1, 1)));
        let mut grads: Vec<Option<Array2<T>>> = vec![None; self.params.len()];
        for k in (0..=out.0).rev() {
            let Some(gk) = g[k].take() else { continue };
            self.propagate(k, gk, &mut g, &mut grads);
        }
        Gradients { grads }
    }

    fn propagate(
        &self,
        k: usize,
        gk: Array2<T>,
        g: &mut [Option<Array2<T>>],
        grads: &mut [Option<Array2<T>>],
    ) {
        let acc = |g: &mut [Option<Array2<T>>], v: Var, d: Array2<T>| match &mut g[v.0] {
            Some(x) => *x += &d,
            slot @ None => *slot = Some(d),
        };
        let val = |v: Var| self.value(v);
        match &self.nodes[k].op {
            Op::Leaf => {}
            Op::Param(id) => match &mut grads[*id] {
                Some(x) => *x += &gk,
                slot @ None => *slot = Some(gk),
            },
            Op::MatMul(a, b) => {
                acc(g, *a, gk.dot(&val(*b).t()));
                acc(g, *b, val(*a).t().dot(&gk));
            }
            Op::MatMulBt(a, b) => {
                acc(g, *a, gk.dot(val(*b)));
                acc(g, *b, gk.t().dot(val(*a)));
            }
            Op::Add(a, b) => {
                acc(g, *a, gk.clone());
                acc(g, *b, gk);
            }
            Op::Sub(a, b) => {
                acc(g, *b, gk.mapv(|x| -x));
                acc(g, *a, gk);
            }
            Op::Mul(a, b) => {
                acc(g, *a, &gk * val(*b));
                acc(g, *b, &gk * val(*a));
            }
            Op::AddRow(a, row) => {
                acc(g, *row, gk.sum_axis(Axis(0)).insert_axis(Axis(0)));
                acc(g, *a, gk);
            }
            Op::MulRow(a, row) => {
                acc(g, *row, (&gk * val(*a)).sum_axis(Axis(0)).insert_axis(Axis(0)));
                acc(g, *a, &gk * val(*row));
            }
            Op::MulCol(a, col) => {
                acc(g, *col, (&gk * val(*a)).sum_axis(Axis(1)).insert_axis(Axis(1)));
                acc(g, *a, &gk * val(*col));
            }
            Op::MulConst(a, kc) => acc(g, *a, &gk * &**kc),
            Op::Scale(a, s) => acc(g, *a, gk * *s),
            Op::Silu(a) => {
                let mut d = val(*a).clone();
                Zip::from(&mut d).and(&gk).for_each(|x, &gy| {
                    let sg = T::one() / (T::one() + (-*x).exp());
                    *x = gy * sg * (T::one() + *x * (T::one() - sg));
                });
                acc(g, *a, d);
            }
            Op::RowSum(a) => {
                let (m, n) = self.shape(*a);
                acc(g, *a, gk.broadcast((m, n)).expect("column").to_owned());
            }
            Op::SumAll(a) => {
                let shape = self.shape(*a);
                acc(g, *a, Array2::from_elem(shape, gk[[0, 0]]));
            }
            Op::Gather(a, idx) => {
                let (m, n) = self.shape(*a);
                let mut d = Array2::zeros((m, n));
                for (r, &i) in idx.iter().enumerate() {
                    let mut row = d.row_mut(i);
                    row += &gk.row(r);
                }
                acc(g, *a, d);
            }
            Op::SegmentSum(a, idx) => acc(g, *a, gk.select(Axis(0), idx)),
            Op::SparseRows(w, rows) => {
                let (m, n) = self.shape(*w);
                let mut d = Array2::zeros((m, n));
                for (t, r) in rows.iter().enumerate() {
                    for &kk in r {
                        let mut row = d.row_mut(kk);
                        row += &gk.row(t);
                    }
                }
                acc(g, *w, d);
            }
            Op::SliceCols(a, start) => {
                let (m, n) = self.shape(*a);
                let mut d = Array2::zeros((m, n));
                d.slice_mut(s![.., *start..*start + gk.ncols()]).assign(&gk);
                acc(g, *a, d);
            }
            Op::ConcatCols(parts) => {
                let mut off = 0;
                for &p in parts {
                    let w = self.shape(p).1;
                    acc(g, p, gk.slice(s![.., off..off + w]).to_owned());
                    off += w;
                }
            }
            Op::MaskFill(a, mask) => {
                let mut d = gk;
                Zip::from(&mut d).and(&**mask).for_each(|x, &keep| {
                    if !keep {
                        *x = T::zero();
                    }
                });
                acc(g, *a, d);
            }
            Op::Softmax(a) => {
                let p = self.nodes[k].value.as_ref().expect("softmax value");
                let mut d = &gk * p;
                let s = d.sum_axis(Axis(1)).insert_axis(Axis(1));
                d -= &(p * &s);
                acc(g, *a, d);
            }
            Op::LayerNorm(a, inv) => {
                let y = self.nodes[k].value.as_ref().expect("layer norm value");
                let n = c::<T>(y.ncols() as f64);
                let mean_g = gk.sum_axis(Axis(1)).insert_axis(Axis(1)) / n;
                let mean_gy = (&gk * y).sum_axis(Axis(1)).insert_axis(Axis(1)) / n;
                let d = (&gk - &mean_g - &(y * &mean_gy)) * inv;
                acc(g, *a, d);
            }
            Op::RowCosine(a, b, na, nb) => {
                let (x, y) = (val(*a), val(*b));
                let cos = self.nodes[k].value.as_ref().expect("cosine value");
                let mut da = Array2::zeros(x.raw_dim());
                let mut db = Array2::zeros(y.raw_dim());
                for i in 0..x.nrows() {
                    let (u, w) = (na[[i, 0]], nb[[i, 0]]);
                    if u == T::zero() || w == T::zero() {
                        continue;
                    }
                    let gi = gk[[i, 0]];
                    let ci = cos[[i, 0]];
                    let (xr, yr) = (x.row(i), y.row(i));
                    da.row_mut(i)
                        .assign(&((&yr / (u * w) - &(&xr * (ci / (u * u)))) * gi));
                    db.row_mut(i)
                        .assign(&((&xr / (u * w) - &(&yr * (ci / (w * w)))) * gi));
                }
                acc(g, *a, da);
                acc(g, *b, db);
            }
            Op::CrossEntropy(l, targets, weights, probs) => {
                let mut d = probs.clone();
                let scale = gk[[0, 0]];
                for (t, y) in targets.iter().enumerate() {
                    let mut row = d.row_mut(t);
                    match *y {
                        Some(y) => {
                            row[y] -= T::one();
                            row.mapv_inplace(|v| v * weights[t] * scale);
                        }
                        None => row.fill(T::zero()),
                    }
                }
                acc(g, *l, d);
            }
        }
    }
}

/// Numerically stable row softmax; -inf entries map to exactly 0.
pub fn softmax_rows<T: NdFloat>(a: &Array2<T>) -> Array2<T> {
    let mut out = a.clone();
    for mut row in out.rows_mut() {
        let m = row.fold(T::neg_infinity(), |x, &y| x.max(y));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    out
}
