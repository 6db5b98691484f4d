//! Combinatorial complexes: a vertex set together with a family of
//! ranked cells whose rank function is order-preserving.

use std::collections::HashMap;

use thiserror::Error;

use crate::cell::CellSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CcError {
    #[error("cells must be non-empty")]
    EmptyCell,
    #[error("cell {0:?} supplied with conflicting ranks {1} and {2}")]
    DuplicateCell(CellSet, usize, usize),
    #[error("rank order violated: {0:?} (rank {1}) is contained in {2:?} (rank {3})")]
    OrderViolation(CellSet, usize, CellSet, usize),
    #[error("cell {0:?} references vertex {1} but the complex has {2} vertices")]
    VertexOutOfRange(CellSet, usize, usize),
    #[error("singleton {0:?} must have rank 0, got {1}")]
    SingletonRank(CellSet, usize),
}

/// A combinatorial complex. Immutable once built; construction goes
/// through [`CombinatorialComplex::build`], which inserts the rank-0
/// singletons, orders cells canonically (lexicographic on the sorted
/// vertex tuple within each rank) and validates order preservation.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinatorialComplex {
    vertex_count: usize,
    per_rank: Vec<Vec<CellSet>>,
    index: HashMap<CellSet, (usize, usize)>,
}

impl CombinatorialComplex {
    /// Builds a complex from `(cell, rank)` pairs. Singletons are
    /// added at rank 0 if absent; re-inserting a cell with the same
    /// rank is idempotent.
    pub fn build(
        vertex_count: usize,
        ranked_cells: impl IntoIterator<Item = (CellSet, usize)>,
    ) -> Result<Self, CcError> {
        let mut ranks: HashMap<CellSet, usize> = HashMap::new();
        for (cell, rank) in ranked_cells {
            if cell.max_vertex() >= vertex_count {
                return Err(CcError::VertexOutOfRange(
                    cell.clone(),
                    cell.max_vertex(),
                    vertex_count,
                ));
            }
            if cell.len() == 1 && rank != 0 {
                return Err(CcError::SingletonRank(cell, rank));
            }
            if let Some(&prev) = ranks.get(&cell) {
                if prev != rank {
                    return Err(CcError::DuplicateCell(cell, prev, rank));
                }
            } else {
                ranks.insert(cell, rank);
            }
        }
        for v in 0..vertex_count {
            ranks.entry(CellSet::singleton(v)).or_insert(0);
        }

        let dim = ranks.values().copied().max().unwrap_or(0);
        let mut per_rank: Vec<Vec<CellSet>> = vec![Vec::new(); dim + 1];
        for (cell, rank) in &ranks {
            per_rank[*rank].push(cell.clone());
        }
        for cells in &mut per_rank {
            cells.sort();
        }

        // Order preservation, checked pairwise. Fixtures are desk
        // scale, so the quadratic scan is fine.
        let flat: Vec<(&CellSet, usize)> = per_rank
            .iter()
            .enumerate()
            .flat_map(|(r, cells)| cells.iter().map(move |c| (c, r)))
            .collect();
        for (i, (x, rx)) in flat.iter().enumerate() {
            for (y, ry) in flat.iter().skip(i + 1) {
                if x.is_subset_of(y) && rx > ry {
                    return Err(CcError::OrderViolation(
                        (*x).clone(),
                        *rx,
                        (*y).clone(),
                        *ry,
                    ));
                }
                if y.is_subset_of(x) && ry > rx {
                    return Err(CcError::OrderViolation(
                        (*y).clone(),
                        *ry,
                        (*x).clone(),
                        *rx,
                    ));
                }
            }
        }

        let mut index = HashMap::new();
        for (r, cells) in per_rank.iter().enumerate() {
            for (i, cell) in cells.iter().enumerate() {
                index.insert(cell.clone(), (r, i));
            }
        }
        Ok(Self {
            vertex_count,
            per_rank,
            index,
        })
    }

    /// The complex on `n` isolated vertices.
    pub fn from_vertices(n: usize) -> Self {
        Self::build(n, []).expect("vertex-only complex is always valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Maximal rank among the cells.
    pub fn dim(&self) -> usize {
        self.per_rank.len() - 1
    }

    /// Cells of rank `k` in canonical order. Empty slice above `dim`.
    pub fn cells(&self, k: usize) -> &[CellSet] {
        self.per_rank.get(k).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of `k`-cells.
    pub fn rank_size(&self, k: usize) -> usize {
        self.cells(k).len()
    }

    pub fn cell_count(&self) -> usize {
        self.per_rank.iter().map(Vec::len).sum()
    }

    pub fn rank_of(&self, cell: &CellSet) -> Option<usize> {
        self.index.get(cell).map(|&(r, _)| r)
    }

    /// `(rank, index-within-rank)` of a cell under the canonical order.
    pub fn position_of(&self, cell: &CellSet) -> Option<(usize, usize)> {
        self.index.get(cell).copied()
    }

    pub fn contains(&self, cell: &CellSet) -> bool {
        self.index.contains_key(cell)
    }

    /// All cells with their ranks, rank-major in canonical order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (&CellSet, usize)> {
        self.per_rank
            .iter()
            .enumerate()
            .flat_map(|(r, cells)| cells.iter().map(move |c| (c, r)))
    }

    /// The sub-CC induced by a vertex subset: keeps exactly the cells
    /// contained in `subset`.
    pub fn induced_sub_cc(&self, subset: &[usize]) -> SubCc {
        let mut keep: Vec<usize> = subset.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let cells = self
            .iter_cells()
            .filter(|(c, _)| c.vertices().iter().all(|v| keep.binary_search(v).is_ok()))
            .map(|(c, r)| (c.clone(), r))
            .collect();
        SubCc {
            parent_vertex_count: self.vertex_count,
            cells,
        }
    }

    /// The k-skeleton: all cells of rank at most `k`.
    pub fn skeleton(&self, k: usize) -> SubCc {
        let cells = self
            .iter_cells()
            .filter(|(_, r)| *r <= k)
            .map(|(c, r)| (c.clone(), r))
            .collect();
        SubCc {
            parent_vertex_count: self.vertex_count,
            cells,
        }
    }
}

/// A sub-CC: a subset of cells of a parent complex with the
/// restricted rank function. Cell order follows the parent.
#[derive(Clone, Debug, PartialEq)]
pub struct SubCc {
    parent_vertex_count: usize,
    cells: Vec<(CellSet, usize)>,
}

impl SubCc {
    pub fn cells(&self) -> &[(CellSet, usize)] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn rank_of(&self, cell: &CellSet) -> Option<usize> {
        self.cells
            .iter()
            .find(|(c, _)| c == cell)
            .map(|&(_, r)| r)
    }

    /// Vertices whose singletons are retained, sorted.
    pub fn vertices(&self) -> Vec<usize> {
        self.cells
            .iter()
            .filter(|(c, _)| c.len() == 1)
            .map(|(c, _)| c.vertices()[0])
            .collect()
    }

    /// Rebuilds a standalone complex, reindexing the retained
    /// vertices densely as `0..n` in ascending original order.
    /// Returns the complex together with the original vertex ids.
    pub fn to_cc(&self) -> Result<(CombinatorialComplex, Vec<usize>), CcError> {
        let verts = self.vertices();
        let lookup: HashMap<usize, usize> =
            verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut ranked = Vec::with_capacity(self.cells.len());
        for (cell, rank) in &self.cells {
            let mapped = CellSet::new(cell.vertices().iter().map(|v| lookup[v]))?;
            ranked.push((mapped, *rank));
        }
        let cc = CombinatorialComplex::build(verts.len(), ranked)?;
        Ok((cc, verts))
    }
}

/// Outcome of checking a candidate CC-homomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapClass {
    /// Inclusion-preserving with `rk_src(x) >= rk_dst(f(x))`.
    Homomorphism,
    /// Injective, rank-preserving homomorphism.
    Embedding,
    Invalid(MapDefect),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapDefect {
    /// `f` is not defined on some source cell.
    NotTotal(CellSet),
    /// The image of some cell is not a cell of the target complex.
    MissingImageCell(CellSet, CellSet),
    /// `x ⊆ y` but `f(x) ⊄ f(y)`.
    InclusionViolation(CellSet, CellSet),
    /// `rk_src(x) < rk_dst(f(x))`.
    RankCondition(CellSet, CellSet),
}

/// Classifies a cell map `f: src -> dst` as a homomorphism, an
/// embedding, or invalid with the first defect found. The map must be
/// total on the cells of `src`; images absent from `dst` are reported
/// as `MissingImageCell`.
pub fn check_homomorphism(
    f: &HashMap<CellSet, CellSet>,
    src: &CombinatorialComplex,
    dst: &CombinatorialComplex,
) -> MapClass {
    for (x, rx) in src.iter_cells() {
        let Some(fx) = f.get(x) else {
            return MapClass::Invalid(MapDefect::NotTotal(x.clone()));
        };
        let Some(rfx) = dst.rank_of(fx) else {
            return MapClass::Invalid(MapDefect::MissingImageCell(x.clone(), fx.clone()));
        };
        if rx < rfx {
            return MapClass::Invalid(MapDefect::RankCondition(x.clone(), fx.clone()));
        }
    }
    for (x, _) in src.iter_cells() {
        for (y, _) in src.iter_cells() {
            if x.is_subset_of(y) && !f[x].is_subset_of(&f[y]) {
                return MapClass::Invalid(MapDefect::InclusionViolation(x.clone(), y.clone()));
            }
        }
    }
    let rank_preserving = src
        .iter_cells()
        .all(|(x, rx)| dst.rank_of(&f[x]) == Some(rx));
    let mut images: Vec<&CellSet> = src.iter_cells().map(|(x, _)| &f[x]).collect();
    images.sort();
    let injective = images.windows(2).all(|w| w[0] != w[1]);
    if rank_preserving && injective {
        MapClass::Embedding
    } else {
        MapClass::Homomorphism
    }
}

/// Builds the cell map induced by a vertex map: each cell goes to the
/// set of images of its vertices. Handy for homomorphisms that come
/// from collapsing vertices.
pub fn induced_cell_map(
    vertex_map: &HashMap<usize, usize>,
    src: &CombinatorialComplex,
) -> Result<HashMap<CellSet, CellSet>, CcError> {
    let mut out = HashMap::new();
    for (cell, _) in src.iter_cells() {
        let image = CellSet::new(cell.vertices().iter().map(|v| vertex_map[v]))?;
        out.insert(cell.clone(), image);
    }
    Ok(out)
}

/// The running three-vertex example: a 1-cell `{0,1}` and a 2-cell
/// `{0,1,2}` over `S = {0,1,2}`.
pub fn example_cc() -> CombinatorialComplex {
    CombinatorialComplex::build(
        3,
        [
            (CellSet::new([0, 1]).unwrap(), 1),
            (CellSet::new([0, 1, 2]).unwrap(), 2),
        ],
    )
    .unwrap()
}
