//! Lifting maps: constructions that turn graphs, simplicial
//! complexes, and image grids into combinatorial complexes.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::cell::CellSet;
use crate::complex::{CcError, CombinatorialComplex};
use crate::neighborhoods::coadjacency;

#[derive(Debug, Error, PartialEq)]
pub enum LiftError {
    #[error("consecutive vertices {0} and {1} are not an edge")]
    NotAPath(usize, usize),
    #[error("a path needs at least two edges")]
    TooShort,
    #[error("sequence is not a cycle")]
    NotACycle,
    #[error("cycle vertex set contains chord edge {0}-{1}")]
    ChordPresent(usize, usize),
    #[error("input must be a two-dimensional complex with triangle 2-cells")]
    NotTwoDimensional,
    #[error("new cell {0:?} is strictly contained in existing cell {1:?}")]
    StrictContainmentViolation(CellSet, CellSet),
    #[error("cell {0:?} already present in the complex")]
    DuplicateCell(CellSet),
    #[error("window must satisfy 2 <= window <= min(height, width) and stride >= 1")]
    BadWindow,
    #[error(transparent)]
    Cc(#[from] CcError),
}

/// Undirected simple graph on dense vertex ids. Edges are stored as
/// sorted pairs without duplicates or self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if a >= vertex_count || b >= vertex_count {
                return Err(GraphError::VertexOutOfRange(a.max(b), vertex_count));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self {
            vertex_count,
            edges: out,
        })
    }

    /// Cycle graph `0-1-...-(n-1)-0`.
    pub fn cycle(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    /// Path graph `0-1-...-(n-1)`.
    pub fn path(n: usize) -> Self {
        Self::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1))).unwrap()
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Unit-weight shortest-path distances from `source`;
    /// `usize::MAX` marks unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let adj = self.adjacency_lists();
        let mut dist = vec![usize::MAX; self.vertex_count];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Connected components over an optional vertex subset, each
    /// sorted; components ordered by smallest vertex.
    pub fn components_within(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let inset = {
            let mut flags = vec![false; self.vertex_count];
            for &v in subset {
                flags[v] = true;
            }
            flags
        };
        let adj = self.adjacency_lists();
        let mut seen = vec![false; self.vertex_count];
        let mut comps = Vec::new();
        let mut order: Vec<usize> = subset.to_vec();
        order.sort_unstable();
        order.dedup();
        for &start in &order {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &u in &adj[v] {
                    if inset[u] && !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.vertex_count).collect();
        self.components_within(&all)
    }

    /// The graph as a one-dimensional complex: vertices at rank 0,
    /// edges at rank 1.
    pub fn to_cc(&self) -> CombinatorialComplex {
        CombinatorialComplex::build(
            self.vertex_count,
            self.edges
                .iter()
                .map(|&(a, b)| (CellSet::new([a, b]).unwrap(), 1)),
        )
        .expect("a simple graph is always a valid complex")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {0} out of range for {1} vertices")]
    VertexOutOfRange(usize, usize),
}

/// Candidate higher-rank cells are dropped when their vertex set
/// already exists at any rank, keeping the existing rank.
fn dedup_candidates(
    cc: &CombinatorialComplex,
    candidates: impl IntoIterator<Item = CellSet>,
) -> Vec<CellSet> {
    let mut seen = BTreeSet::new();
    candidates
        .into_iter()
        .filter(|c| !cc.contains(c))
        .filter(|c| seen.insert(c.clone()))
        .collect()
}

/// n-hop CC of a graph: vertices and edges plus one rank-n cell per
/// n-hop neighborhood (breadth-first ball including the center),
/// deduplicated under set semantics.
pub fn n_hop_cc(g: &Graph, n: usize) -> Result<CombinatorialComplex, LiftError> {
    assert!(n >= 2, "n-hop lifting requires n >= 2");
    let base = g.to_cc();
    let balls = (0..g.vertex_count()).map(|v| {
        let dist = g.bfs_distances(v);
        CellSet::new(
            dist.iter()
                .enumerate()
                .filter(|&(_, &d)| d <= n)
                .map(|(u, _)| u),
        )
        .unwrap()
    });
    let cells = dedup_candidates(&base, balls);
    let mut ranked: Vec<(CellSet, usize)> = base
        .iter_cells()
        .map(|(c, r)| (c.clone(), r))
        .collect();
    ranked.extend(cells.into_iter().map(|c| (c, n)));
    Ok(CombinatorialComplex::build(g.vertex_count(), ranked)?)
}

/// Path-based CC: adds one 2-cell per walk of at least two edges,
/// using the walk's vertex set. Walks with repeated vertices are
/// accepted; the induced cell is their set.
pub fn path_cc(g: &Graph, paths: &[Vec<usize>]) -> Result<CombinatorialComplex, LiftError> {
    let base = g.to_cc();
    let mut candidates = Vec::new();
    for path in paths {
        if path.len() < 3 {
            return Err(LiftError::TooShort);
        }
        for w in path.windows(2) {
            if !g.has_edge(w[0], w[1]) {
                return Err(LiftError::NotAPath(w[0], w[1]));
            }
        }
        candidates.push(CellSet::new(path.iter().copied())?);
    }
    let cells = dedup_candidates(&base, candidates);
    let mut ranked: Vec<(CellSet, usize)> =
        base.iter_cells().map(|(c, r)| (c.clone(), r)).collect();
    ranked.extend(cells.into_iter().map(|c| (c, 2)));
    Ok(CombinatorialComplex::build(g.vertex_count(), ranked)?)
}

/// Loop-based CC: adds one 2-cell per cycle whose edges are the only
/// graph edges inside its vertex set.
pub fn loop_cc(g: &Graph, loops: &[Vec<usize>]) -> Result<CombinatorialComplex, LiftError> {
    let base = g.to_cc();
    let mut candidates = Vec::new();
    for cycle in loops {
        let k = cycle.len();
        if k < 3 {
            return Err(LiftError::NotACycle);
        }
        let distinct: BTreeSet<usize> = cycle.iter().copied().collect();
        if distinct.len() != k {
            return Err(LiftError::NotACycle);
        }
        let mut cycle_edges = BTreeSet::new();
        for i in 0..k {
            let (a, b) = (cycle[i], cycle[(i + 1) % k]);
            if !g.has_edge(a, b) {
                return Err(LiftError::NotACycle);
            }
            cycle_edges.insert((a.min(b), a.max(b)));
        }
        // The cycle edges must be the only edges inside the set.
        for &(a, b) in g.edges() {
            if distinct.contains(&a) && distinct.contains(&b) && !cycle_edges.contains(&(a, b)) {
                return Err(LiftError::ChordPresent(a, b));
            }
        }
        candidates.push(CellSet::new(cycle.iter().copied())?);
    }
    let cells = dedup_candidates(&base, candidates);
    let mut ranked: Vec<(CellSet, usize)> =
        base.iter_cells().map(|(c, r)| (c.clone(), r)).collect();
    ranked.extend(cells.into_iter().map(|c| (c, 2)));
    Ok(CombinatorialComplex::build(g.vertex_count(), ranked)?)
}

/// All triangles of a graph, each as an ascending vertex triple.
pub fn all_triangles(g: &Graph) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for &(a, b) in g.edges() {
        for c in b + 1..g.vertex_count() {
            if g.has_edge(a, c) && g.has_edge(b, c) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// 2-clique complex of a graph: the loop-based CC over all triangles.
pub fn two_clique_cc(g: &Graph) -> Result<CombinatorialComplex, LiftError> {
    let loops: Vec<Vec<usize>> = all_triangles(g)
        .into_iter()
        .map(|t| t.to_vec())
        .collect();
    loop_cc(g, &loops)
}

/// Coface CC of a two-dimensional simplicial complex: for each
/// triangle the union of its vertices with the vertices of its
/// 1-coadjacent triangles becomes a 3-cell.
pub fn coface_cc(sc: &CombinatorialComplex) -> Result<CombinatorialComplex, LiftError> {
    if sc.dim() != 2 || sc.cells(2).iter().any(|c| c.len() != 3) {
        return Err(LiftError::NotTwoDimensional);
    }
    let co = coadjacency(sc, 2, 1).map_err(|_| LiftError::NotTwoDimensional)?;
    let faces = sc.cells(2);
    let candidates = faces.iter().enumerate().map(|(j, face)| {
        let mut cell = face.clone();
        for (i, _) in co.matrix().row(j) {
            cell = cell.union(&faces[i]);
        }
        cell
    });
    let cells = dedup_candidates(sc, candidates);
    let mut ranked: Vec<(CellSet, usize)> =
        sc.iter_cells().map(|(c, r)| (c.clone(), r)).collect();
    ranked.extend(cells.into_iter().map(|c| (c, 3)));
    Ok(CombinatorialComplex::build(sc.vertex_count(), ranked)?)
}

/// Highest-rank augmentation: adds the given cells at rank
/// `dim + 1`. New cells must not duplicate existing cells and must
/// not be contained in any existing cell.
pub fn augment(
    cc: &CombinatorialComplex,
    new_cells: &[CellSet],
) -> Result<CombinatorialComplex, LiftError> {
    let new_rank = cc.dim() + 1;
    let mut seen = BTreeSet::new();
    for cell in new_cells {
        if cc.contains(cell) || !seen.insert(cell.clone()) {
            return Err(LiftError::DuplicateCell(cell.clone()));
        }
        for (x, _) in cc.iter_cells() {
            if cell.is_strict_subset_of(x) {
                return Err(LiftError::StrictContainmentViolation(
                    cell.clone(),
                    x.clone(),
                ));
            }
        }
    }
    let mut ranked: Vec<(CellSet, usize)> =
        cc.iter_cells().map(|(c, r)| (c.clone(), r)).collect();
    ranked.extend(new_cells.iter().map(|c| (c.clone(), new_rank)));
    Ok(CombinatorialComplex::build(cc.vertex_count(), ranked)?)
}

/// Lattice CC of an image grid: pixels at rank 0, 4-neighbor edges
/// at rank 1, and `window`-square pixel blocks at the given stride
/// at rank 2. Pixel `(i, j)` has id `i * width + j`.
pub fn lattice_cc(
    height: usize,
    width: usize,
    window: usize,
    stride: usize,
) -> Result<CombinatorialComplex, LiftError> {
    if window < 2 || window > height.min(width) || stride < 1 {
        return Err(LiftError::BadWindow);
    }
    let id = |i: usize, j: usize| i * width + j;
    let mut edges = Vec::new();
    for i in 0..height {
        for j in 0..width {
            if j + 1 < width {
                edges.push((id(i, j), id(i, j + 1)));
            }
            if i + 1 < height {
                edges.push((id(i, j), id(i + 1, j)));
            }
        }
    }
    let g = Graph::new(height * width, edges).unwrap();
    let mut blocks = Vec::new();
    let mut bi = 0;
    while bi + window <= height {
        let mut bj = 0;
        while bj + window <= width {
            blocks.push(
                CellSet::new(
                    (bi..bi + window).flat_map(|i| (bj..bj + window).map(move |j| id(i, j))),
                )
                .unwrap(),
            );
            bj += stride;
        }
        bi += stride;
    }
    let base = g.to_cc();
    let mut ranked: Vec<(CellSet, usize)> =
        base.iter_cells().map(|(c, r)| (c.clone(), r)).collect();
    ranked.extend(blocks.into_iter().map(|c| (c, 2)));
    Ok(CombinatorialComplex::build(height * width, ranked)?)
}
