//! Reverse-mode differentiation over dense matrices.
//!
//! Forward computation records primitive ops (matmul, hadamard,
//! masked row softmax, add, concat, pointwise activation,
//! aggregation) on a tape; the reverse sweep fills exact gradients.

use std::sync::Arc;

use ndarray::{concatenate, Array2, Axis};
use thiserror::Error;

use crate::cochain::Activation;
use crate::sparse::SparseMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum TapeError {
    #[error("tape already swept; run the forward pass again")]
    StaleTape,
    #[error("gradient seed shape mismatch at node {0}")]
    SeedShape(usize),
}

/// Nonzero pattern of a sparse matrix in row-grouped edge order.
/// Edge `e` connects row `edge_row(e)` to column `col_idx[e]`.
#[derive(Clone, Debug)]
pub struct Pattern {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl Pattern {
    pub fn from_sparse(m: &SparseMatrix) -> Self {
        let mut row_ptr = Vec::with_capacity(m.rows() + 1);
        let mut col_idx = Vec::with_capacity(m.nnz());
        row_ptr.push(0);
        for i in 0..m.rows() {
            col_idx.extend(m.row(i).map(|(j, _)| j));
            row_ptr.push(col_idx.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            row_ptr,
            col_idx,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Edge index range of one row.
    pub fn row_edges(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn col_of(&self, edge: usize) -> usize {
        self.col_idx[edge]
    }
}

pub type NodeId = usize;

enum Op {
    Leaf,
    MatMul {
        a: NodeId,
        b: NodeId,
    },
    /// `K = G · H` for a constant sparse `G`; the transpose is
    /// kept for the reverse sweep.
    SpMul {
        gt: SparseMatrix,
        h: NodeId,
    },
    Add {
        a: NodeId,
        b: NodeId,
    },
    Sub {
        a: NodeId,
        b: NodeId,
    },
    Hadamard {
        a: NodeId,
        b: NodeId,
    },
    Concat {
        a: NodeId,
        b: NodeId,
        split: usize,
    },
    Activation {
        kind: Activation,
        x: NodeId,
    },
    Scale {
        x: NodeId,
        c: f64,
    },
    SliceRows {
        x: NodeId,
        from: usize,
        rows: usize,
    },
    /// Per-edge scores `s_e = l[row(e)] + r[col(e)]`.
    EdgeScores {
        pat: Arc<Pattern>,
        l: NodeId,
        r: NodeId,
    },
    /// Masked softmax along each pattern row (stable, max-shifted).
    RowSoftmax {
        pat: Arc<Pattern>,
        s: NodeId,
    },
    /// `K_i = sum over edges (i,j) of w_e * P[j, :]`.
    WeightedAgg {
        pat: Arc<Pattern>,
        w: NodeId,
        p: NodeId,
    },
    MeanRows {
        x: NodeId,
    },
    SumAll {
        x: NodeId,
    },
    /// Scalar cross-entropy of a single logit row against a class.
    CrossEntropyLogits {
        x: NodeId,
        target: usize,
    },
}

struct Node {
    value: Array2<f64>,
    op: Op,
}

/// The recorded computation. Values live on the tape; `value(id)`
/// reads results and `backward` fills gradients.
pub struct Tape {
    nodes: Vec<Node>,
    swept: bool,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            swept: false,
        }
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        self.nodes.len() - 1
    }

    pub fn value(&self, id: NodeId) -> &Array2<f64> {
        &self.nodes[id].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id].value.len(), 1);
        self.nodes[id].value[(0, 0)]
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> NodeId {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.nodes[a].value.dot(&self.nodes[b].value);
        self.push(value, Op::MatMul { a, b })
    }

    pub fn spmul(&mut self, g: Arc<SparseMatrix>, h: NodeId) -> NodeId {
        let value = g.mul_dense(&self.nodes[h].value);
        let gt = g.transpose();
        self.push(value, Op::SpMul { gt, h })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = &self.nodes[a].value + &self.nodes[b].value;
        self.push(value, Op::Add { a, b })
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = &self.nodes[a].value - &self.nodes[b].value;
        self.push(value, Op::Sub { a, b })
    }

    pub fn hadamard(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = &self.nodes[a].value * &self.nodes[b].value;
        self.push(value, Op::Hadamard { a, b })
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let split = self.nodes[a].value.ncols();
        let value = concatenate(
            Axis(1),
            &[self.nodes[a].value.view(), self.nodes[b].value.view()],
        )
        .expect("concat row counts must match");
        self.push(value, Op::Concat { a, b, split })
    }

    pub fn activation(&mut self, kind: Activation, x: NodeId) -> NodeId {
        let value = self.nodes[x].value.mapv(|v| kind.apply(v));
        self.push(value, Op::Activation { kind, x })
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> NodeId {
        let value = self.nodes[x].value.mapv(|v| c * v);
        self.push(value, Op::Scale { x, c })
    }

    pub fn slice_rows(&mut self, x: NodeId, from: usize, rows: usize) -> NodeId {
        let value = self.nodes[x]
            .value
            .slice(ndarray::s![from..from + rows, ..])
            .to_owned();
        self.push(value, Op::SliceRows { x, from, rows })
    }

    pub fn edge_scores(&mut self, pat: Arc<Pattern>, l: NodeId, r: NodeId) -> NodeId {
        let lv = &self.nodes[l].value;
        let rv = &self.nodes[r].value;
        debug_assert_eq!(lv.nrows(), pat.rows());
        debug_assert_eq!(rv.nrows(), pat.cols());
        let mut value = Array2::zeros((pat.nnz(), 1));
        for i in 0..pat.rows() {
            for e in pat.row_edges(i) {
                value[(e, 0)] = lv[(i, 0)] + rv[(pat.col_of(e), 0)];
            }
        }
        self.push(value, Op::EdgeScores { pat, l, r })
    }

    pub fn row_softmax(&mut self, pat: Arc<Pattern>, s: NodeId) -> NodeId {
        let sv = &self.nodes[s].value;
        let mut value = Array2::zeros((pat.nnz(), 1));
        for i in 0..pat.rows() {
            let edges = pat.row_edges(i);
            if edges.is_empty() {
                continue;
            }
            let m = edges
                .clone()
                .map(|e| sv[(e, 0)])
                .fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for e in edges.clone() {
                let w = (sv[(e, 0)] - m).exp();
                value[(e, 0)] = w;
                z += w;
            }
            for e in edges {
                value[(e, 0)] /= z;
            }
        }
        self.push(value, Op::RowSoftmax { pat, s })
    }

    pub fn weighted_agg(&mut self, pat: Arc<Pattern>, w: NodeId, p: NodeId) -> NodeId {
        let wv = &self.nodes[w].value;
        let pv = &self.nodes[p].value;
        debug_assert_eq!(pv.nrows(), pat.cols());
        let mut value = Array2::zeros((pat.rows(), pv.ncols()));
        for i in 0..pat.rows() {
            for e in pat.row_edges(i) {
                let j = pat.col_of(e);
                for c in 0..pv.ncols() {
                    value[(i, c)] += wv[(e, 0)] * pv[(j, c)];
                }
            }
        }
        self.push(value, Op::WeightedAgg { pat, w, p })
    }

    pub fn mean_rows(&mut self, x: NodeId) -> NodeId {
        let xv = &self.nodes[x].value;
        let n = xv.nrows().max(1) as f64;
        let mut value = Array2::zeros((1, xv.ncols()));
        for row in xv.rows() {
            for (c, v) in row.iter().enumerate() {
                value[(0, c)] += v / n;
            }
        }
        self.push(value, Op::MeanRows { x })
    }

    pub fn sum_all(&mut self, x: NodeId) -> NodeId {
        let value = Array2::from_elem((1, 1), self.nodes[x].value.sum());
        self.push(value, Op::SumAll { x })
    }

    pub fn cross_entropy_logits(&mut self, x: NodeId, target: usize) -> NodeId {
        let xv = &self.nodes[x].value;
        debug_assert_eq!(xv.nrows(), 1);
        let m = xv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + xv.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        let loss = lse - xv[(0, target)];
        self.push(
            Array2::from_elem((1, 1), loss),
            Op::CrossEntropyLogits { x, target },
        )
    }

    /// Mean squared error against a constant target.
    pub fn mse(&mut self, x: NodeId, target: &Array2<f64>) -> NodeId {
        let t = self.leaf(target.clone());
        let diff = self.sub(x, t);
        let sq = self.hadamard(diff, diff);
        let total = self.sum_all(sq);
        self.scale(total, 1.0 / target.len() as f64)
    }

    /// Reverse sweep seeded with `d(root) = 1`; `root` must be a
    /// scalar. Returns one gradient per node.
    pub fn backward(&mut self, root: NodeId) -> Result<Vec<Array2<f64>>, TapeError> {
        let seed = Array2::ones(self.nodes[root].value.raw_dim());
        self.backward_seeded(&[(root, seed)])
    }

    /// Reverse sweep with explicit output gradients.
    pub fn backward_seeded(
        &mut self,
        seeds: &[(NodeId, Array2<f64>)],
    ) -> Result<Vec<Array2<f64>>, TapeError> {
        if self.swept {
            return Err(TapeError::StaleTape);
        }
        self.swept = true;
        let mut grads: Vec<Array2<f64>> = self
            .nodes
            .iter()
            .map(|n| Array2::zeros(n.value.raw_dim()))
            .collect();
        for (id, seed) in seeds {
            if grads[*id].raw_dim() != seed.raw_dim() {
                return Err(TapeError::SeedShape(*id));
            }
            grads[*id] += seed;
        }

        for id in (0..self.nodes.len()).rev() {
            let go = grads[id].clone();
            if go.iter().all(|&v| v == 0.0) {
                continue;
            }
            match &self.nodes[id].op {
                Op::Leaf => {}
                Op::MatMul { a, b } => {
                    let av = &self.nodes[*a].value;
                    let bv = &self.nodes[*b].value;
                    grads[*a] = &grads[*a] + &go.dot(&bv.t());
                    grads[*b] = &grads[*b] + &av.t().dot(&go);
                }
                Op::SpMul { gt, h, .. } => {
                    grads[*h] = &grads[*h] + &gt.mul_dense(&go);
                }
                Op::Add { a, b } => {
                    grads[*a] = &grads[*a] + &go;
                    grads[*b] = &grads[*b] + &go;
                }
                Op::Sub { a, b } => {
                    grads[*a] = &grads[*a] + &go;
                    grads[*b] = &grads[*b] - &go;
                }
                Op::Hadamard { a, b } => {
                    let av = self.nodes[*a].value.clone();
                    let bv = self.nodes[*b].value.clone();
                    grads[*a] = &grads[*a] + &(&go * &bv);
                    grads[*b] = &grads[*b] + &(&go * &av);
                }
                Op::Concat { a, b, split } => {
                    let left = go.slice(ndarray::s![.., ..*split]).to_owned();
                    let right = go.slice(ndarray::s![.., *split..]).to_owned();
                    grads[*a] = &grads[*a] + &left;
                    grads[*b] = &grads[*b] + &right;
                }
                Op::Activation { kind, x } => {
                    let xv = &self.nodes[*x].value;
                    let local = xv.mapv(|v| kind.derivative(v));
                    grads[*x] = &grads[*x] + &(&go * &local);
                }
                Op::Scale { x, c } => {
                    grads[*x] = &grads[*x] + &go.mapv(|v| c * v);
                }
                Op::SliceRows { x, from, rows } => {
                    let mut gx = grads[*x].clone();
                    let mut view = gx.slice_mut(ndarray::s![*from..*from + *rows, ..]);
                    view += &go;
                    grads[*x] = gx;
                }
                Op::EdgeScores { pat, l, r } => {
                    let mut gl = grads[*l].clone();
                    let mut gr = grads[*r].clone();
                    for i in 0..pat.rows() {
                        for e in pat.row_edges(i) {
                            gl[(i, 0)] += go[(e, 0)];
                            gr[(pat.col_of(e), 0)] += go[(e, 0)];
                        }
                    }
                    grads[*l] = gl;
                    grads[*r] = gr;
                }
                Op::RowSoftmax { pat, s } => {
                    let wv = &self.nodes[id].value;
                    let mut gs = grads[*s].clone();
                    for i in 0..pat.rows() {
                        let edges = pat.row_edges(i);
                        let dot: f64 = edges
                            .clone()
                            .map(|e| go[(e, 0)] * wv[(e, 0)])
                            .sum();
                        for e in edges {
                            gs[(e, 0)] += wv[(e, 0)] * (go[(e, 0)] - dot);
                        }
                    }
                    grads[*s] = gs;
                }
                Op::WeightedAgg { pat, w, p } => {
                    let wv = self.nodes[*w].value.clone();
                    let pv = self.nodes[*p].value.clone();
                    let mut gw = grads[*w].clone();
                    let mut gp = grads[*p].clone();
                    for i in 0..pat.rows() {
                        for e in pat.row_edges(i) {
                            let j = pat.col_of(e);
                            let mut acc = 0.0;
                            for c in 0..pv.ncols() {
                                acc += go[(i, c)] * pv[(j, c)];
                                gp[(j, c)] += wv[(e, 0)] * go[(i, c)];
                            }
                            gw[(e, 0)] += acc;
                        }
                    }
                    grads[*w] = gw;
                    grads[*p] = gp;
                }
                Op::MeanRows { x } => {
                    let n = self.nodes[*x].value.nrows().max(1) as f64;
                    let mut gx = grads[*x].clone();
                    for mut row in gx.rows_mut() {
                        for (c, v) in row.iter_mut().enumerate() {
                            *v += go[(0, c)] / n;
                        }
                    }
                    grads[*x] = gx;
                }
                Op::SumAll { x } => {
                    grads[*x] = &grads[*x] + go[(0, 0)];
                }
                Op::CrossEntropyLogits { x, target } => {
                    let xv = &self.nodes[*x].value;
                    let m = xv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let z: f64 = xv.iter().map(|v| (v - m).exp()).sum();
                    let mut gx = grads[*x].clone();
                    for (c, v) in xv.iter().enumerate() {
                        let soft = (v - m).exp() / z;
                        let onehot = if c == *target { 1.0 } else { 0.0 };
                        gx[(0, c)] += go[(0, 0)] * (soft - onehot);
                    }
                    grads[*x] = gx;
                }
            }
        }
        Ok(grads)
    }
}
