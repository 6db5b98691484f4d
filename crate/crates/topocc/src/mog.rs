//! Mapper on graphs: pull an interval cover back through a scalar
//! vertex function, take connected components per interval, connect
//! intersecting components, and augment the graph with the components
//! as top-rank cells.

use thiserror::Error;

use crate::cell::CellSet;
use crate::cochain::{push_forward, Aggregation, Alpha, Cochain, CochainError};
use crate::complex::CombinatorialComplex;
use crate::lifting::{augment, Graph, LiftError};
use crate::neighborhoods::incidence;

#[derive(Debug, Error, PartialEq)]
pub enum MogError {
    #[error("cover needs n >= 1 intervals and overlap in (0, 1)")]
    BadParams,
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
}

/// A finite family of closed intervals covering `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MogCover {
    intervals: Vec<(f64, f64)>,
}

impl MogCover {
    /// Cover from explicit intervals; each must satisfy `lo < hi`.
    pub fn from_intervals(intervals: Vec<(f64, f64)>) -> Result<Self, MogError> {
        if intervals.is_empty() || intervals.iter().any(|&(lo, hi)| lo >= hi) {
            return Err(MogError::BadParams);
        }
        Ok(Self { intervals })
    }

    /// Uniform cover: `n` intervals of length `(1 + overlap) / n`
    /// with evenly spaced starts, clipped to `[0, 1]`. Consecutive
    /// intervals always overlap.
    pub fn uniform(n: usize, overlap: f64) -> Result<Self, MogError> {
        if n == 0 || overlap <= 0.0 || overlap >= 1.0 {
            return Err(MogError::BadParams);
        }
        let len = ((1.0 + overlap) / n as f64).min(1.0);
        let intervals = (0..n)
            .map(|t| {
                let lo = if n == 1 {
                    0.0
                } else {
                    t as f64 * (1.0 - len) / (n - 1) as f64
                };
                (lo.max(0.0), (lo + len).min(1.0))
            })
            .collect();
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Average geodesic distance per vertex: the mean unit-weight
/// shortest-path distance to the other vertices of its component.
pub fn agd(g: &Graph) -> Vec<f64> {
    let mut out = vec![0.0; g.vertex_count()];
    for comp in g.components() {
        let n = comp.len() as f64;
        for &v in &comp {
            let dist = g.bfs_distances(v);
            let total: usize = comp.iter().map(|&u| dist[u]).sum();
            out[v] = total as f64 / n;
        }
    }
    out
}

/// Min-max scales a finite scalar into `[0, 1]`; constant input maps
/// to all 0.5.
pub fn normalize_scalar(f: &[f64]) -> Vec<f64> {
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if f.is_empty() || hi <= lo {
        return vec![0.5; f.len()];
    }
    f.iter().map(|&v| (v - lo) / (hi - lo)).collect()
}

/// Output of the mapper-on-graphs construction.
#[derive(Clone, Debug)]
pub struct MogResult {
    /// `(interval index, vertex set)` per component, ordered by
    /// interval then smallest vertex; identical vertex sets across
    /// intervals are merged keeping the first occurrence.
    pub components: Vec<(usize, Vec<usize>)>,
    /// Pairs of component indices with a common vertex, `i < j`.
    pub mog_edges: Vec<(usize, usize)>,
    /// The input graph augmented with one rank-2 cell per component
    /// (components equal to existing cells are dropped).
    pub augmented_cc: CombinatorialComplex,
}

/// Runs mapper on a graph: pull back each interval under closed
/// membership `lo <= f(v) <= hi`, split into connected components,
/// and connect components sharing vertices.
pub fn mog(g: &Graph, f: &[f64], cover: &MogCover) -> Result<MogResult, MogError> {
    assert_eq!(f.len(), g.vertex_count(), "one scalar per vertex");
    let mut components: Vec<(usize, Vec<usize>)> = Vec::new();
    for (t, &(lo, hi)) in cover.intervals().iter().enumerate() {
        let pullback: Vec<usize> = (0..g.vertex_count())
            .filter(|&v| lo <= f[v] && f[v] <= hi)
            .collect();
        for comp in g.components_within(&pullback) {
            if !components.iter().any(|(_, c)| *c == comp) {
                components.push((t, comp));
            }
        }
    }
    components.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

    let mut mog_edges = Vec::new();
    for i in 0..components.len() {
        for j in i + 1..components.len() {
            let (a, b) = (&components[i].1, &components[j].1);
            if a.iter().any(|v| b.binary_search(v).is_ok()) {
                mog_edges.push((i, j));
            }
        }
    }

    let base = g.to_cc();
    let cells: Vec<CellSet> = components
        .iter()
        .map(|(_, c)| CellSet::new(c.iter().copied()).expect("components are non-empty"))
        .filter(|c| !base.contains(c))
        .collect();
    let augmented_cc = if cells.is_empty() {
        base
    } else {
        augment(&base, &cells)?
    };
    Ok(MogResult {
        components,
        mog_edges,
        augmented_cc,
    })
}

/// Pools vertex features to the mapper components: the push-forward
/// of `h0` through `B_{0,2}^T` of the augmented complex.
pub fn mog_pool(
    g: &Graph,
    h0: &Cochain,
    f: &[f64],
    cover: &MogCover,
    agg: Aggregation,
) -> Result<(MogResult, Cochain), MogError> {
    let result = mog(g, f, cover)?;
    if result.augmented_cc.dim() < 2 {
        return Err(MogError::Cochain(CochainError::EmptyAugmentation));
    }
    let b02t = incidence(&result.augmented_cc, 0, 2)
        .expect("augmented complex has 2-cells")
        .transpose();
    let pooled = push_forward(&b02t, h0, agg, Alpha::Identity)?;
    Ok((result, pooled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn agd_cycle_and_path() {
        let c4 = agd(&Graph::cycle(4));
        assert_eq!(c4, vec![1.0, 1.0, 1.0, 1.0]);

        let p3 = agd(&Graph::path(3));
        assert!((p3[0] - 1.0).abs() < 1e-15);
        assert!((p3[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p3[2] - 1.0).abs() < 1e-15);

        let single = agd(&Graph::new(1, []).unwrap());
        assert_eq!(single, vec![0.0]);
    }

    #[test]
    fn agd_vertex_transitive_is_constant() {
        for g in [Graph::cycle(5), Graph::cycle(8), Graph::complete(6)] {
            let vals = agd(&g);
            for v in &vals {
                assert!((v - vals[0]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn normalization_cases() {
        assert_eq!(normalize_scalar(&[1.0, 2.0, 3.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(normalize_scalar(&[4.0, 4.0]), vec![0.5, 0.5]);
        assert_eq!(normalize_scalar(&[0.0, 1.0]), vec![0.0, 1.0]);
    }

    #[test]
    fn uniform_cover() {
        let one = MogCover::uniform(1, 0.3).unwrap();
        assert_eq!(one.intervals(), &[(0.0, 1.0)]);

        let two = MogCover::uniform(2, 0.3).unwrap();
        assert!((two.intervals()[0].0 - 0.0).abs() < 1e-15);
        assert!((two.intervals()[0].1 - 0.65).abs() < 1e-15);
        assert!((two.intervals()[1].0 - 0.35).abs() < 1e-15);
        assert!((two.intervals()[1].1 - 1.0).abs() < 1e-15);

        assert_eq!(MogCover::uniform(0, 0.3), Err(MogError::BadParams));
        assert_eq!(MogCover::uniform(2, 0.0), Err(MogError::BadParams));
    }

    #[test]
    fn cover_unions_to_unit_interval() {
        for n in 1..8 {
            for overlap in [0.1, 0.3, 0.6] {
                let cover = MogCover::uniform(n, overlap).unwrap();
                let iv = cover.intervals();
                assert_eq!(iv[0].0, 0.0);
                assert_eq!(iv[n - 1].1, 1.0);
                for w in iv.windows(2) {
                    assert!(w[0].1 > w[1].0, "consecutive intervals must overlap");
                }
            }
        }
    }

    #[test]
    fn mog_path_example() {
        let g = Graph::path(6);
        let f: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
        let cover = MogCover::from_intervals(vec![(0.0, 0.65), (0.35, 1.0)]).unwrap();
        let result = mog(&g, &f, &cover).unwrap();
        assert_eq!(
            result.components,
            vec![(0, vec![0, 1, 2, 3]), (1, vec![2, 3, 4, 5])]
        );
        assert_eq!(result.mog_edges, vec![(0, 1)]);
        assert_eq!(result.augmented_cc.rank_size(2), 2);
    }

    #[test]
    fn mog_disjoint_cover() {
        let g = Graph::path(6);
        let f: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
        let cover = MogCover::from_intervals(vec![(0.0, 0.4), (0.6, 1.0)]).unwrap();
        let result = mog(&g, &f, &cover).unwrap();
        assert_eq!(result.components.len(), 2);
        assert!(result.mog_edges.is_empty());
    }

    #[test]
    fn mog_complete_graph_single_interval() {
        let g = Graph::complete(5);
        let f = normalize_scalar(&agd(&g));
        let cover = MogCover::uniform(1, 0.5).unwrap();
        let result = mog(&g, &f, &cover).unwrap();
        assert_eq!(result.components.len(), 1);
        assert_eq!(result.components[0].1, vec![0, 1, 2, 3, 4]);
        assert!(result.mog_edges.is_empty());
    }

    #[test]
    fn mog_components_are_connected() {
        let g = Graph::cycle(12);
        let f = normalize_scalar(&agd(&Graph::path(12)));
        let cover = MogCover::uniform(3, 0.3).unwrap();
        let result = mog(&g, &f, &cover).unwrap();
        for (_, comp) in &result.components {
            let comps = g.components_within(comp);
            assert_eq!(comps.len(), 1, "component {comp:?} must be connected");
        }
    }

    #[test]
    fn mog_pool_examples() {
        let g = Graph::path(6);
        let f: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
        let cover = MogCover::from_intervals(vec![(0.0, 0.65), (0.35, 1.0)]).unwrap();

        // One-hot features: pooled rows count component members.
        let mut onehot = Array2::zeros((6, 6));
        for i in 0..6 {
            onehot[(i, i)] = 1.0;
        }
        let h0 = Cochain::new(0, onehot);
        let (_, pooled) = mog_pool(&g, &h0, &f, &cover, Aggregation::Sum).unwrap();
        let sums: Vec<f64> = pooled
            .data()
            .rows()
            .into_iter()
            .map(|r| r.sum())
            .collect();
        assert_eq!(sums, vec![4.0, 4.0]);

        // Mean over constant features stays constant.
        let ones = Cochain::new(0, Array2::ones((6, 3)));
        let (_, mean) = mog_pool(&g, &ones, &f, &cover, Aggregation::Mean).unwrap();
        assert!(mean.data().iter().all(|&v| (v - 1.0).abs() < 1e-15));

        // Single component pools everything.
        let single = MogCover::uniform(1, 0.5).unwrap();
        let (_, all) = mog_pool(&g, &ones, &f, &single, Aggregation::Sum).unwrap();
        assert_eq!(all.rows(), 1);
        assert!(all.data().iter().all(|&v| (v - 6.0).abs() < 1e-15));
    }

    #[test]
    fn pullback_membership_is_closed() {
        let g = Graph::path(3);
        let f = vec![0.0, 0.5, 1.0];
        let cover = MogCover::from_intervals(vec![(0.0, 0.5), (0.5, 1.0)]).unwrap();
        let result = mog(&g, &f, &cover).unwrap();
        // Vertex 1 sits exactly on both endpoints and joins both
        // pull-backs.
        assert_eq!(
            result.components,
            vec![(0, vec![0, 1]), (1, vec![1, 2])]
        );
    }
}
