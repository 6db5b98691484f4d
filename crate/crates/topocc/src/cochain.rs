//! Cochains (feature matrices bound to one rank) and the elementary
//! tensor operations in non-parameterized form: apply, push-forward,
//! merge node, split node, and (un)pooling classification of maps.

use ndarray::{concatenate, Array2, Axis};
use thiserror::Error;

use crate::cell::CellSet;
use crate::complex::CombinatorialComplex;
use crate::lifting::{augment, Graph, LiftError};
use crate::neighborhoods::{incidence, NeighborhoodMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum CochainError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("clusters do not partition the vertex set")]
    NotAPartition,
    #[error("every cluster was dropped by deduplication; nothing to pool")]
    EmptyAugmentation,
    #[error(transparent)]
    Lift(#[from] LiftError),
}

/// A k-cochain: one feature row per k-cell in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    rank: usize,
    data: Array2<f64>,
}

impl Cochain {
    pub fn new(rank: usize, data: Array2<f64>) -> Self {
        Self { rank, data }
    }

    /// Zero cochain of feature dimension `d` on the k-cells of `cc`.
    pub fn zeros(cc: &CombinatorialComplex, rank: usize, d: usize) -> Self {
        Self {
            rank,
            data: Array2::zeros((cc.rank_size(rank), d)),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }
}

/// Permutation-invariant aggregation used by push-forwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregation {
    Sum,
    Mean,
    Max,
}

impl Aggregation {
    /// Folds the feature rows indexed by `neighbors` of `h`. Empty
    /// neighborhoods yield a zero row, also for `Max`.
    fn fold(&self, h: &Array2<f64>, neighbors: &[usize], alpha: Alpha, out: &mut [f64]) {
        out.fill(0.0);
        if neighbors.is_empty() {
            return;
        }
        match self {
            Aggregation::Sum | Aggregation::Mean => {
                for &x in neighbors {
                    for (c, slot) in out.iter_mut().enumerate() {
                        *slot += alpha.apply(h[(x, c)]);
                    }
                }
                if matches!(self, Aggregation::Mean) {
                    let n = neighbors.len() as f64;
                    for slot in out.iter_mut() {
                        *slot /= n;
                    }
                }
            }
            Aggregation::Max => {
                for slot in out.iter_mut() {
                    *slot = f64::NEG_INFINITY;
                }
                for &x in neighbors {
                    for (c, slot) in out.iter_mut().enumerate() {
                        *slot = slot.max(alpha.apply(h[(x, c)]));
                    }
                }
            }
        }
    }
}

/// Per-entry map applied to neighbor features before aggregation.
/// Parameterized (affine) maps live in the nn layers; this enum is
/// the extension point for further pointwise choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alpha {
    Identity,
    Tanh,
    Relu,
}

impl Alpha {
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            Alpha::Identity => v,
            Alpha::Tanh => v.tanh(),
            Alpha::Relu => v.max(0.0),
        }
    }
}

/// Activation applied after combining cochains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
    LeakyRelu,
}

impl Activation {
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            Activation::Identity => v,
            Activation::Tanh => v.tanh(),
            Activation::Relu => v.max(0.0),
            Activation::LeakyRelu => {
                if v >= 0.0 {
                    v
                } else {
                    0.2 * v
                }
            }
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - v.tanh() * v.tanh(),
            Activation::Relu => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu => {
                if v >= 0.0 {
                    1.0
                } else {
                    0.2
                }
            }
        }
    }

    pub fn apply_matrix(&self, m: &Array2<f64>) -> Array2<f64> {
        m.mapv(|v| self.apply(v))
    }
}

/// How a merge node combines its two pushed-forward cochains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    Sum,
    Concat,
}

/// Applies the cochain map as a plain matrix product `G · H`.
pub fn apply_map(g: &NeighborhoodMatrix, h: &Cochain) -> Result<Cochain, CochainError> {
    if h.rank() != g.domain_rank() || h.rows() != g.cols() {
        return Err(CochainError::ShapeMismatch(format!(
            "map expects a rank-{} cochain with {} rows, got rank {} with {}",
            g.domain_rank(),
            g.cols(),
            h.rank(),
            h.rows()
        )));
    }
    Ok(Cochain::new(g.codomain_rank(), g.matrix().mul_dense(h.data())))
}

/// Push-forward of `h` through `G`: row `y` of the result aggregates
/// `alpha` of the neighbor features read from the transpose pattern
/// of `G` (the nonzero columns of row `y`). Matrix values do not
/// enter; only the pattern does.
pub fn push_forward(
    g: &NeighborhoodMatrix,
    h: &Cochain,
    agg: Aggregation,
    alpha: Alpha,
) -> Result<Cochain, CochainError> {
    if h.rank() != g.domain_rank() || h.rows() != g.cols() {
        return Err(CochainError::ShapeMismatch(format!(
            "push-forward expects a rank-{} cochain with {} rows, got rank {} with {}",
            g.domain_rank(),
            g.cols(),
            h.rank(),
            h.rows()
        )));
    }
    let mut out = Array2::zeros((g.rows(), h.dim()));
    let mut row = vec![0.0; h.dim()];
    for y in 0..g.rows() {
        let neighbors: Vec<usize> = g.matrix().row(y).map(|(x, _)| x).collect();
        agg.fold(h.data(), &neighbors, alpha, &mut row);
        for (c, &v) in row.iter().enumerate() {
            out[(y, c)] = v;
        }
    }
    Ok(Cochain::new(g.codomain_rank(), out))
}

/// Merge node: `beta(F_G1(H1) ⊗ F_G2(H2))` where the push-forwards
/// use sum aggregation with identity alpha and `⊗` is `combine`.
pub fn merge_node(
    g1: &NeighborhoodMatrix,
    g2: &NeighborhoodMatrix,
    h1: &Cochain,
    h2: &Cochain,
    combine: Combine,
    beta: Activation,
) -> Result<Cochain, CochainError> {
    if g1.codomain_rank() != g2.codomain_rank() {
        return Err(CochainError::ShapeMismatch(format!(
            "merge codomain ranks differ: {} vs {}",
            g1.codomain_rank(),
            g2.codomain_rank()
        )));
    }
    let a = push_forward(g1, h1, Aggregation::Sum, Alpha::Identity)?;
    let b = push_forward(g2, h2, Aggregation::Sum, Alpha::Identity)?;
    let combined = match combine {
        Combine::Sum => {
            if a.dim() != b.dim() {
                return Err(CochainError::ShapeMismatch(format!(
                    "sum combine needs equal feature dims, got {} and {}",
                    a.dim(),
                    b.dim()
                )));
            }
            a.data() + b.data()
        }
        Combine::Concat => concatenate(Axis(1), &[a.data().view(), b.data().view()])
            .map_err(|e| CochainError::ShapeMismatch(e.to_string()))?,
    };
    Ok(Cochain::new(
        g1.codomain_rank(),
        beta.apply_matrix(&combined),
    ))
}

/// Split node: duplicates `h` and pushes each copy through its map.
pub fn split_node(
    g1: &NeighborhoodMatrix,
    g2: &NeighborhoodMatrix,
    h: &Cochain,
    beta1: Activation,
    beta2: Activation,
) -> Result<(Cochain, Cochain), CochainError> {
    let a = push_forward(g1, h, Aggregation::Sum, Alpha::Identity)?;
    let b = push_forward(g2, h, Aggregation::Sum, Alpha::Identity)?;
    Ok((
        Cochain::new(a.rank(), beta1.apply_matrix(a.data())),
        Cochain::new(b.rank(), beta2.apply_matrix(b.data())),
    ))
}

/// Whether a cochain map pools (codomain rank above domain rank),
/// unpools, or preserves rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapClass {
    Pooling,
    Unpooling,
    RankPreserving,
}

pub fn classify_map(g: &NeighborhoodMatrix) -> MapClass {
    use std::cmp::Ordering;
    match g.codomain_rank().cmp(&g.domain_rank()) {
        Ordering::Greater => MapClass::Pooling,
        Ordering::Less => MapClass::Unpooling,
        Ordering::Equal => MapClass::RankPreserving,
    }
}

/// Graph pooling via vertex clusters: augments the graph complex
/// with one 2-cell per cluster (clusters equal to existing cells are
/// dropped) and pools vertex features through `B_{0,2}^T`.
pub fn graph_pool_via_clusters(
    g: &Graph,
    clusters: &[Vec<usize>],
    h0: &Cochain,
    agg: Aggregation,
) -> Result<(CombinatorialComplex, Cochain), CochainError> {
    let mut seen = vec![false; g.vertex_count()];
    for cluster in clusters {
        if cluster.is_empty() {
            return Err(CochainError::NotAPartition);
        }
        for &v in cluster {
            if v >= g.vertex_count() || seen[v] {
                return Err(CochainError::NotAPartition);
            }
            seen[v] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(CochainError::NotAPartition);
    }
    let base = g.to_cc();
    let cells: Vec<CellSet> = clusters
        .iter()
        .map(|c| CellSet::new(c.iter().copied()))
        .collect::<Result<_, _>>()
        .map_err(LiftError::Cc)?;
    let kept: Vec<CellSet> = cells.into_iter().filter(|c| !base.contains(c)).collect();
    if kept.is_empty() {
        return Err(CochainError::EmptyAugmentation);
    }
    let augmented = augment(&base, &kept)?;
    let b02t = incidence(&augmented, 0, 2)
        .expect("augmented complex has 2-cells")
        .transpose();
    let pooled = push_forward(&b02t, h0, agg, Alpha::Identity)?;
    Ok((augmented, pooled))
}
