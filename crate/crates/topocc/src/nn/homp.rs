//! Higher-order message passing: the four-rule update scheme over a
//! set of neighborhood matrices, with and without attention weights.
//!
//! The implementation walks cells and neighbors exactly as the update
//! rules read; the merge-node realization used to cross-check it
//! lives in the test suites.

use ndarray::{concatenate, Array1, Array2, Axis};

use crate::cochain::{Aggregation, Cochain};
use crate::complex::CombinatorialComplex;
use crate::neighborhoods::NeighborhoodMatrix;
use crate::nn::NnError;
use crate::sparse::SparseMatrix;

/// Shipped per-edge message functions; each reads the neighbor's
/// feature vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HompAlpha {
    /// `m_{x,y} = h_y`
    Neighbor,
    /// `m_{x,y} = tanh(h_y)`
    NeighborTanh,
    /// `m_{x,y} = relu(h_y)`
    NeighborRelu,
}

impl HompAlpha {
    fn apply(&self, v: f64) -> f64 {
        match self {
            HompAlpha::Neighbor => v,
            HompAlpha::NeighborTanh => v.tanh(),
            HompAlpha::NeighborRelu => v.max(0.0),
        }
    }
}

/// Aggregation across neighborhoods, applied in the listed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterAggregation {
    Sum,
    Concat,
}

/// Update rule combining the old feature with the message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HompBeta {
    /// `h' = m`
    Replace,
    /// `h' = h + m`
    Add,
    /// `h' = tanh(h + m)`
    AddTanh,
}

#[derive(Clone, Copy, Debug)]
pub struct HompConfig {
    pub intra: Aggregation,
    pub inter: InterAggregation,
    pub beta: HompBeta,
}

/// Per-neighborhood attention weights for the attention variant.
#[derive(Clone, Debug)]
pub enum HompAttention {
    /// `a(x, y) = 1 / |N(x)|`.
    Uniform,
    /// Nonnegative weights on the neighborhood pattern, row-normalized
    /// before use.
    Weights(SparseMatrix),
}

fn check_neighborhoods(
    cc: &CombinatorialComplex,
    neighborhoods: &[NeighborhoodMatrix],
    cochains: &[Cochain],
) -> Result<(), NnError> {
    if cochains.len() != cc.dim() + 1 {
        return Err(NnError::ShapeMismatch(format!(
            "need one cochain per rank 0..={}, got {}",
            cc.dim(),
            cochains.len()
        )));
    }
    for (rank, h) in cochains.iter().enumerate() {
        if h.rank() != rank || h.rows() != cc.rank_size(rank) {
            return Err(NnError::ShapeMismatch(format!(
                "cochain at position {rank} must be rank {rank} with {} rows",
                cc.rank_size(rank)
            )));
        }
    }
    for n in neighborhoods {
        if n.rows() != cc.rank_size(n.codomain_rank()) || n.cols() != cc.rank_size(n.domain_rank())
        {
            return Err(NnError::ShapeMismatch(
                "neighborhood matrix does not match the complex".into(),
            ));
        }
    }
    Ok(())
}

/// One step of higher-order message passing. Every rank that appears
/// as a codomain of some neighborhood gets the full update
/// `h' = beta(h, inter over k of intra over N_k(x) of alpha_k(h_y))`;
/// ranks without neighborhoods pass through unchanged.
pub fn homp_step(
    cc: &CombinatorialComplex,
    neighborhoods: &[NeighborhoodMatrix],
    alphas: &[HompAlpha],
    cochains: &[Cochain],
    cfg: &HompConfig,
) -> Result<Vec<Cochain>, NnError> {
    check_neighborhoods(cc, neighborhoods, cochains)?;
    if alphas.len() != neighborhoods.len() {
        return Err(NnError::ShapeMismatch(
            "one alpha per neighborhood required".into(),
        ));
    }
    let weights: Vec<Option<SparseMatrix>> = neighborhoods.iter().map(|_| None).collect();
    step_inner(cc, neighborhoods, alphas, &weights, None, cochains, cfg)
}

/// One step of attention higher-order message passing: intra
/// aggregation becomes the attention-weighted sum
/// `m_x^k = sum over y of a^k(x, y) m_{x,y}` and neighborhoods are
/// combined with weights `b` (clamped nonnegative and renormalized to
/// sum one).
#[allow(clippy::too_many_arguments)]
pub fn attention_homp_step(
    cc: &CombinatorialComplex,
    neighborhoods: &[NeighborhoodMatrix],
    alphas: &[HompAlpha],
    attention: &[HompAttention],
    b: &[f64],
    cochains: &[Cochain],
    cfg: &HompConfig,
) -> Result<Vec<Cochain>, NnError> {
    check_neighborhoods(cc, neighborhoods, cochains)?;
    if alphas.len() != neighborhoods.len()
        || attention.len() != neighborhoods.len()
        || b.len() != neighborhoods.len()
    {
        return Err(NnError::ShapeMismatch(
            "alphas, attention, and b must match the neighborhood list".into(),
        ));
    }
    // Project b onto the simplex: clamp and renormalize.
    let clamped: Vec<f64> = b.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 {
        return Err(NnError::ShapeMismatch(
            "attention weights b must have positive mass".into(),
        ));
    }
    let b: Vec<f64> = clamped.into_iter().map(|v| v / total).collect();

    let weights: Vec<Option<SparseMatrix>> = neighborhoods
        .iter()
        .zip(attention)
        .map(|(n, att)| {
            Some(match att {
                HompAttention::Uniform => row_normalized_pattern(n.matrix()),
                HompAttention::Weights(w) => masked_row_normalized(w, n.matrix()),
            })
        })
        .collect();
    step_inner(cc, neighborhoods, alphas, &weights, Some(&b), cochains, cfg)
}

/// Uniform attention: each nonzero entry of a row becomes `1/deg`.
fn row_normalized_pattern(m: &SparseMatrix) -> SparseMatrix {
    let mut triplets = Vec::new();
    for i in 0..m.rows() {
        let deg = m.row(i).count();
        if deg == 0 {
            continue;
        }
        for (j, _) in m.row(i) {
            triplets.push((i, j, 1.0 / deg as f64));
        }
    }
    SparseMatrix::from_triplets(m.rows(), m.cols(), triplets)
}

/// Restricts weights to the pattern of `mask` and normalizes each
/// nonempty row to sum one; negative weights clamp to zero.
fn masked_row_normalized(weights: &SparseMatrix, mask: &SparseMatrix) -> SparseMatrix {
    let mut triplets = Vec::new();
    for i in 0..mask.rows() {
        let entries: Vec<(usize, f64)> = mask
            .row(i)
            .map(|(j, _)| (j, weights.get(i, j).max(0.0)))
            .collect();
        let total: f64 = entries.iter().map(|(_, v)| v).sum();
        if total <= 0.0 {
            continue;
        }
        for (j, v) in entries {
            triplets.push((i, j, v / total));
        }
    }
    SparseMatrix::from_triplets(mask.rows(), mask.cols(), triplets)
}

fn step_inner(
    cc: &CombinatorialComplex,
    neighborhoods: &[NeighborhoodMatrix],
    alphas: &[HompAlpha],
    weights: &[Option<SparseMatrix>],
    b: Option<&[f64]>,
    cochains: &[Cochain],
    cfg: &HompConfig,
) -> Result<Vec<Cochain>, NnError> {
    let mut out = Vec::with_capacity(cochains.len());
    for rank in 0..=cc.dim() {
        let targets: Vec<usize> = neighborhoods
            .iter()
            .enumerate()
            .filter(|(_, n)| n.codomain_rank() == rank)
            .map(|(k, _)| k)
            .collect();
        if targets.is_empty() {
            out.push(cochains[rank].clone());
            continue;
        }
        let h = &cochains[rank];
        let n_cells = cc.rank_size(rank);
        let mut per_neighborhood: Vec<Array2<f64>> = Vec::with_capacity(targets.len());
        for &k in &targets {
            let nbr = &neighborhoods[k];
            let source = &cochains[nbr.domain_rank()];
            let d = source.dim();
            let mut m_k = Array2::zeros((n_cells, d));
            for i in 0..n_cells {
                let edges: Vec<(usize, f64)> = nbr.matrix().row(i).collect();
                if edges.is_empty() {
                    continue;
                }
                match weights[k] {
                    Some(ref w) => {
                        // Attention-weighted sum over the neighborhood.
                        for (y, _) in &edges {
                            let a = w.get(i, *y);
                            for c in 0..d {
                                m_k[(i, c)] += a * alphas[k].apply(source.data()[(*y, c)]);
                            }
                        }
                    }
                    None => {
                        let mut row = Array1::zeros(d);
                        match cfg.intra {
                            Aggregation::Sum | Aggregation::Mean => {
                                for (y, _) in &edges {
                                    for c in 0..d {
                                        row[c] += alphas[k].apply(source.data()[(*y, c)]);
                                    }
                                }
                                if cfg.intra == Aggregation::Mean {
                                    row /= edges.len() as f64;
                                }
                            }
                            Aggregation::Max => {
                                row.fill(f64::NEG_INFINITY);
                                for (y, _) in &edges {
                                    for c in 0..d {
                                        row[c] =
                                            row[c].max(alphas[k].apply(source.data()[(*y, c)]));
                                    }
                                }
                            }
                        }
                        for c in 0..d {
                            m_k[(i, c)] = row[c];
                        }
                    }
                }
            }
            if let Some(b) = b {
                m_k *= b[k];
            }
            per_neighborhood.push(m_k);
        }

        let message = match cfg.inter {
            InterAggregation::Sum => {
                let mut acc = per_neighborhood[0].clone();
                for m in &per_neighborhood[1..] {
                    if m.raw_dim() != acc.raw_dim() {
                        return Err(NnError::ShapeMismatch(
                            "inter-neighborhood sum needs equal feature dims".into(),
                        ));
                    }
                    acc += m;
                }
                acc
            }
            InterAggregation::Concat => {
                let views: Vec<_> = per_neighborhood.iter().map(|m| m.view()).collect();
                concatenate(Axis(1), &views)
                    .map_err(|e| NnError::ShapeMismatch(e.to_string()))?
            }
        };

        let updated = match cfg.beta {
            HompBeta::Replace => message,
            HompBeta::Add => {
                if message.raw_dim() != h.data().raw_dim() {
                    return Err(NnError::ShapeMismatch(
                        "additive update needs message dims equal to the cochain".into(),
                    ));
                }
                h.data() + &message
            }
            HompBeta::AddTanh => {
                if message.raw_dim() != h.data().raw_dim() {
                    return Err(NnError::ShapeMismatch(
                        "additive update needs message dims equal to the cochain".into(),
                    ));
                }
                (h.data() + &message).mapv(f64::tanh)
            }
        };
        out.push(Cochain::new(rank, updated));
    }
    Ok(out)
}
