//! Parameterized layers: convolutional and attention push-forwards
//! and merges. Each layer exists twice — as a direct evaluation of
//! its formula and as a tape program for training — and the two are
//! tested against each other.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::cochain::{Activation, Cochain};
use crate::neighborhoods::NeighborhoodMatrix;
use crate::nn::tape::{NodeId, Pattern, Tape};
use crate::nn::NnError;
use crate::sparse::SparseMatrix;

/// A sparse matrix split into its pattern and the per-edge values in
/// pattern order, shared between taped programs.
#[derive(Clone, Debug)]
pub struct EdgeChannel {
    pub pattern: Arc<Pattern>,
    pub values: Array2<f64>,
}

impl EdgeChannel {
    pub fn from_sparse(m: &SparseMatrix) -> Self {
        let pattern = Arc::new(Pattern::from_sparse(m));
        let mut values = Array2::zeros((pattern.nnz(), 1));
        for (e, (_, _, v)) in m.triplets().enumerate() {
            values[(e, 0)] = v;
        }
        Self { pattern, values }
    }
}

fn check_shapes(
    what: &str,
    g: &NeighborhoodMatrix,
    h: &Cochain,
    w: &Array2<f64>,
) -> Result<(), NnError> {
    if h.rank() != g.domain_rank() || h.rows() != g.cols() || h.dim() != w.nrows() {
        return Err(NnError::ShapeMismatch(format!(
            "{what}: map is {}x{} on rank {}->{} with weight {}x{}, cochain is rank {} {}x{}",
            g.rows(),
            g.cols(),
            g.domain_rank(),
            g.codomain_rank(),
            w.nrows(),
            w.ncols(),
            h.rank(),
            h.rows(),
            h.dim()
        )));
    }
    Ok(())
}

/// Convolutional push-forward `K = G · H · W`.
pub fn conv_push_forward(
    g: &NeighborhoodMatrix,
    h: &Cochain,
    w: &Array2<f64>,
) -> Result<Cochain, NnError> {
    check_shapes("conv", g, h, w)?;
    let k = g.matrix().mul_dense(h.data()).dot(w);
    Ok(Cochain::new(g.codomain_rank(), k))
}

/// Convolutional merge `beta(G1 H1 W1 + G2 H2 W2)`.
#[allow(clippy::too_many_arguments)]
pub fn conv_merge(
    g1: &NeighborhoodMatrix,
    g2: &NeighborhoodMatrix,
    h1: &Cochain,
    h2: &Cochain,
    w1: &Array2<f64>,
    w2: &Array2<f64>,
    beta: Activation,
) -> Result<Cochain, NnError> {
    if g1.codomain_rank() != g2.codomain_rank() {
        return Err(NnError::ShapeMismatch(format!(
            "merge codomain ranks differ: {} vs {}",
            g1.codomain_rank(),
            g2.codomain_rank()
        )));
    }
    let a = conv_push_forward(g1, h1, w1)?;
    let b = conv_push_forward(g2, h2, w2)?;
    if a.data().raw_dim() != b.data().raw_dim() {
        return Err(NnError::ShapeMismatch(
            "merge branches produce different shapes".into(),
        ));
    }
    Ok(Cochain::new(
        g1.codomain_rank(),
        beta.apply_matrix(&(a.data() + b.data())),
    ))
}

/// Attention values on the pattern of `m`: entry `(i, j)` is the
/// softmax over row `i` of `phi(l_i + r_j)`. Rows without entries
/// stay absent (isolated cells get zero output rows).
fn attention_values(
    m: &SparseMatrix,
    l: &Array1<f64>,
    r: &Array1<f64>,
    phi: Activation,
) -> Result<SparseMatrix, NnError> {
    let mut triplets = Vec::new();
    for i in 0..m.rows() {
        let entries: Vec<usize> = m.row(i).map(|(j, _)| j).collect();
        if entries.is_empty() {
            continue;
        }
        let scores: Vec<f64> = entries
            .iter()
            .map(|&j| phi.apply(l[i] + r[j]))
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        if !z.is_finite() || z <= 0.0 {
            return Err(NnError::DegenerateRow(i));
        }
        for (&j, w) in entries.iter().zip(exp) {
            triplets.push((i, j, w / z));
        }
    }
    Ok(SparseMatrix::from_triplets(m.rows(), m.cols(), triplets))
}

fn hadamard_sparse(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    SparseMatrix::from_triplets(
        a.rows(),
        a.cols(),
        a.triplets().map(|(i, j, v)| (i, j, v * b.get(i, j))),
    )
}

/// Attention push-forward between cells of equal rank:
/// `K = (G ⊙ att) H W` with scores
/// `e_ij = phi(a^T [ (H W)_i || (H W)_j ])` normalized by masked
/// softmax over each row of `G`. `a` must have length `2 * W.ncols()`.
pub fn attention_same_rank(
    g: &NeighborhoodMatrix,
    h: &Cochain,
    w: &Array2<f64>,
    a: &Array1<f64>,
    phi: Activation,
) -> Result<Cochain, NnError> {
    check_shapes("attention", g, h, w)?;
    let d = w.ncols();
    if g.rows() != g.cols() || a.len() != 2 * d {
        return Err(NnError::ShapeMismatch(format!(
            "same-rank attention needs square map and |a| = {}, got {}x{} and {}",
            2 * d,
            g.rows(),
            g.cols(),
            a.len()
        )));
    }
    let p = h.data().dot(w);
    let l = p.dot(&a.slice(ndarray::s![..d]));
    let r = p.dot(&a.slice(ndarray::s![d..]));
    let att = attention_values(g.matrix(), &l, &r, phi)?;
    let weighted = hadamard_sparse(g.matrix(), &att);
    Ok(Cochain::new(g.codomain_rank(), weighted.mul_dense(&p)))
}

/// Same-rank attention matrix alone, for inspection and tests.
pub fn attention_matrix_same_rank(
    g: &NeighborhoodMatrix,
    h: &Cochain,
    w: &Array2<f64>,
    a: &Array1<f64>,
    phi: Activation,
) -> Result<SparseMatrix, NnError> {
    check_shapes("attention", g, h, w)?;
    let d = w.ncols();
    if a.len() != 2 * d {
        return Err(NnError::ShapeMismatch("attention vector length".into()));
    }
    let p = h.data().dot(w);
    let l = p.dot(&a.slice(ndarray::s![..d]));
    let r = p.dot(&a.slice(ndarray::s![d..]));
    attention_values(g.matrix(), &l, &r, phi)
}

/// Attention block between cells of unequal ranks `s != t` with
/// `G: C^s -> C^t`. Returns `(K_t, K_s)`:
///
/// `K_t = (G ⊙ att_{s→t}) H_s W_s`, scores from
/// `a^T [ (H_s W_s)_j || (H_t W_t)_i ]`;
/// `K_s = (G^T ⊙ att_{t→s}) H_t W_t`, scores from the block-swapped
/// `rev(a)`. `a` has length `W_s.ncols() + W_t.ncols()`.
#[allow(clippy::too_many_arguments)]
pub fn attention_cross_rank(
    g: &NeighborhoodMatrix,
    h_s: &Cochain,
    h_t: &Cochain,
    w_s: &Array2<f64>,
    w_t: &Array2<f64>,
    a: &Array1<f64>,
    phi: Activation,
) -> Result<(Cochain, Cochain), NnError> {
    let (s_rank, t_rank) = (g.domain_rank(), g.codomain_rank());
    if s_rank == t_rank {
        return Err(NnError::ShapeMismatch(
            "cross-rank attention needs distinct ranks".into(),
        ));
    }
    check_shapes("attention s-side", g, h_s, w_s)?;
    if h_t.rank() != t_rank || h_t.rows() != g.rows() || h_t.dim() != w_t.nrows() {
        return Err(NnError::ShapeMismatch(
            "attention t-side cochain does not match the map".into(),
        ));
    }
    let (t_out, s_out) = (w_s.ncols(), w_t.ncols());
    if a.len() != t_out + s_out {
        return Err(NnError::ShapeMismatch(format!(
            "attention vector needs length {}, got {}",
            t_out + s_out,
            a.len()
        )));
    }
    let p_s = h_s.data().dot(w_s);
    let p_t = h_t.data().dot(w_t);
    let a_first = a.slice(ndarray::s![..t_out]).to_owned();
    let a_second = a.slice(ndarray::s![t_out..]).to_owned();
    let proj_s = p_s.dot(&a_first);
    let proj_t = p_t.dot(&a_second);

    // s -> t: rows are t-cells, columns s-cells.
    let att_st = attention_values(g.matrix(), &proj_t, &proj_s, phi)?;
    let k_t = hadamard_sparse(g.matrix(), &att_st).mul_dense(&p_s);

    // t -> s over the transpose pattern with the swapped blocks.
    let gt = g.matrix().transpose();
    let att_ts = attention_values(&gt, &proj_s, &proj_t, phi)?;
    let k_s = hadamard_sparse(&gt, &att_ts).mul_dense(&p_t);

    Ok((Cochain::new(t_rank, k_t), Cochain::new(s_rank, k_s)))
}

/// Both cross-rank attention matrices, for inspection and tests.
#[allow(clippy::too_many_arguments)]
pub fn attention_matrices_cross_rank(
    g: &NeighborhoodMatrix,
    h_s: &Cochain,
    h_t: &Cochain,
    w_s: &Array2<f64>,
    w_t: &Array2<f64>,
    a: &Array1<f64>,
    phi: Activation,
) -> Result<(SparseMatrix, SparseMatrix), NnError> {
    let t_out = w_s.ncols();
    let p_s = h_s.data().dot(w_s);
    let p_t = h_t.data().dot(w_t);
    let proj_s = p_s.dot(&a.slice(ndarray::s![..t_out]).to_owned());
    let proj_t = p_t.dot(&a.slice(ndarray::s![t_out..]).to_owned());
    let att_st = attention_values(g.matrix(), &proj_t, &proj_s, phi)?;
    let att_ts = attention_values(&g.matrix().transpose(), &proj_s, &proj_t, phi)?;
    Ok((att_st, att_ts))
}

// --- taped builders -------------------------------------------------

/// `G · H · W` on the tape.
pub(crate) fn taped_conv(
    tape: &mut Tape,
    g: &Arc<SparseMatrix>,
    h: NodeId,
    w: NodeId,
) -> NodeId {
    let gh = tape.spmul(g.clone(), h);
    tape.matmul(gh, w)
}

/// Masked-softmax attention aggregation on the tape. `p_push` holds
/// the projected features of the pattern's column cells, `l`/`r` the
/// per-row and per-column score projections.
pub(crate) fn taped_attention(
    tape: &mut Tape,
    channel: &EdgeChannel,
    p_push: NodeId,
    l: NodeId,
    r: NodeId,
    phi: Activation,
) -> NodeId {
    let s = tape.edge_scores(channel.pattern.clone(), l, r);
    let s = tape.activation(phi, s);
    let att = tape.row_softmax(channel.pattern.clone(), s);
    let gv = tape.leaf(channel.values.clone());
    let weighted = tape.hadamard(att, gv);
    tape.weighted_agg(channel.pattern.clone(), weighted, p_push)
}

/// Same-rank attention layer on the tape; mirrors
/// [`attention_same_rank`].
pub(crate) fn taped_attention_same_rank(
    tape: &mut Tape,
    channel: &EdgeChannel,
    h: NodeId,
    w: NodeId,
    a: NodeId,
    d_out: usize,
    phi: Activation,
) -> NodeId {
    let p = tape.matmul(h, w);
    let a_left = tape.slice_rows(a, 0, d_out);
    let a_right = tape.slice_rows(a, d_out, d_out);
    let l = tape.matmul(p, a_left);
    let r = tape.matmul(p, a_right);
    taped_attention(tape, channel, p, l, r, phi)
}
