//! Neighborhood matrices of a combinatorial complex: incidence,
//! adjacency, coadjacency, signed incidence, and the 1-Hodge
//! Laplacian built from them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use thiserror::Error;

use crate::cell::CellSet;
use crate::complex::CombinatorialComplex;
use crate::sparse::SparseMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NbrError {
    #[error("rank pair ({0},{1}) out of range for a complex of dimension {2}")]
    RankOutOfRange(usize, usize, usize),
    #[error("cell {0:?} is not in the complex")]
    UnknownCell(CellSet),
    #[error("cell {0:?} at rank {1} has no canonical simplicial orientation")]
    NotOrientable(CellSet, usize),
    #[error("unknown matrix selector `{0}`")]
    UnknownSelector(String),
}

/// Which structural matrix a [`NeighborhoodMatrix`] represents.
/// Transposition is tracked so that selectors like `B0,1^T` keep
/// their identity when used as edge labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Selector {
    Incidence(usize, usize),
    IncidenceT(usize, usize),
    Adjacency(usize, usize),
    Coadjacency(usize, usize),
    SignedIncidence(usize),
    SignedIncidenceT(usize),
    Identity(usize),
}

impl Selector {
    pub fn transposed(self) -> Selector {
        match self {
            Selector::Incidence(r, k) => Selector::IncidenceT(r, k),
            Selector::IncidenceT(r, k) => Selector::Incidence(r, k),
            Selector::SignedIncidence(r) => Selector::SignedIncidenceT(r),
            Selector::SignedIncidenceT(r) => Selector::SignedIncidence(r),
            other => other,
        }
    }

    /// `(domain rank, codomain rank)` of the cochain map this
    /// selector denotes. `B_{r,k}` maps k-cochains to r-cochains.
    pub fn map_ranks(&self) -> (usize, usize) {
        match *self {
            Selector::Incidence(r, k) => (k, r),
            Selector::IncidenceT(r, k) => (r, k),
            Selector::Adjacency(r, _) | Selector::Coadjacency(r, _) => (r, r),
            Selector::SignedIncidence(r) => (r + 1, r),
            Selector::SignedIncidenceT(r) => (r, r + 1),
            Selector::Identity(k) => (k, k),
        }
    }

    /// Resolves the selector on a complex.
    pub fn resolve(&self, cc: &CombinatorialComplex) -> Result<NeighborhoodMatrix, NbrError> {
        match *self {
            Selector::Incidence(r, k) => incidence(cc, r, k),
            Selector::IncidenceT(r, k) => Ok(incidence(cc, r, k)?.transpose()),
            Selector::Adjacency(r, k) => adjacency(cc, r, k),
            Selector::Coadjacency(r, k) => coadjacency(cc, r, k),
            Selector::SignedIncidence(r) => signed_incidence(cc, r),
            Selector::SignedIncidenceT(r) => Ok(signed_incidence(cc, r)?.transpose()),
            Selector::Identity(k) => Ok(NeighborhoodMatrix {
                selector: Some(Selector::Identity(k)),
                domain_rank: k,
                codomain_rank: k,
                matrix: SparseMatrix::identity(cc.rank_size(k)),
            }),
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Selector::Incidence(r, k) => write!(f, "B{r},{k}"),
            Selector::IncidenceT(r, k) => write!(f, "B{r},{k}^T"),
            Selector::Adjacency(r, k) => write!(f, "A{r},{k}"),
            Selector::Coadjacency(r, k) => write!(f, "coA{r},{k}"),
            Selector::SignedIncidence(r) => write!(f, "sB{r}"),
            Selector::SignedIncidenceT(r) => write!(f, "sB{r}^T"),
            Selector::Identity(k) => write!(f, "Id{k}"),
        }
    }
}

impl FromStr for Selector {
    type Err = NbrError;

    /// Parses selectors of the form `B0,1`, `B0,1^T`, `A1,1`,
    /// `coA2,1`, `sB0`, `sB0^T`, `Id1`.
    fn from_str(s: &str) -> Result<Self, NbrError> {
        let err = || NbrError::UnknownSelector(s.to_string());
        let (base, transposed) = match s.strip_suffix("^T") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let parse_pair = |body: &str| -> Option<(usize, usize)> {
            let (a, b) = body.split_once(',')?;
            Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
        };
        let sel = if let Some(body) = base.strip_prefix("coA") {
            let (r, k) = parse_pair(body).ok_or_else(err)?;
            Selector::Coadjacency(r, k)
        } else if let Some(body) = base.strip_prefix("sB") {
            Selector::SignedIncidence(body.trim().parse().map_err(|_| err())?)
        } else if let Some(body) = base.strip_prefix('B') {
            let (r, k) = parse_pair(body).ok_or_else(err)?;
            Selector::Incidence(r, k)
        } else if let Some(body) = base.strip_prefix('A') {
            let (r, k) = parse_pair(body).ok_or_else(err)?;
            Selector::Adjacency(r, k)
        } else if let Some(body) = base.strip_prefix("Id") {
            Selector::Identity(body.trim().parse().map_err(|_| err())?)
        } else {
            return Err(err());
        };
        Ok(if transposed { sel.transposed() } else { sel })
    }
}

/// A neighborhood matrix bound to the canonical cell orderings of a
/// complex. Rows index the codomain cells of the induced cochain map
/// and columns the domain cells; the map acts by left-multiplication.
#[derive(Clone, Debug)]
pub struct NeighborhoodMatrix {
    selector: Option<Selector>,
    domain_rank: usize,
    codomain_rank: usize,
    matrix: SparseMatrix,
}

impl NeighborhoodMatrix {
    /// Wraps an arbitrary matrix as a custom cochain map.
    pub fn custom(domain_rank: usize, codomain_rank: usize, matrix: SparseMatrix) -> Self {
        Self {
            selector: None,
            domain_rank,
            codomain_rank,
            matrix,
        }
    }

    pub fn selector(&self) -> Option<Selector> {
        self.selector
    }

    /// Rank of the cochain space the map consumes.
    pub fn domain_rank(&self) -> usize {
        self.domain_rank
    }

    /// Rank of the cochain space the map produces.
    pub fn codomain_rank(&self) -> usize {
        self.codomain_rank
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn transpose(&self) -> NeighborhoodMatrix {
        NeighborhoodMatrix {
            selector: self.selector.map(Selector::transposed),
            domain_rank: self.codomain_rank,
            codomain_rank: self.domain_rank,
            matrix: self.matrix.transpose(),
        }
    }

    /// Symmetrically normalized variant; normalization choice is left
    /// to the caller, both raw and normalized forms are exposed.
    pub fn sym_normalized(&self) -> NeighborhoodMatrix {
        NeighborhoodMatrix {
            selector: self.selector,
            domain_rank: self.domain_rank,
            codomain_rank: self.codomain_rank,
            matrix: self.matrix.sym_normalized(),
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.matrix.to_dense()
    }
}

/// Incidence matrix `B_{r,k}`: entry `(i,j)` is one iff the i-th
/// r-cell is strictly contained in the j-th k-cell.
pub fn incidence(
    cc: &CombinatorialComplex,
    r: usize,
    k: usize,
) -> Result<NeighborhoodMatrix, NbrError> {
    if r >= k || k > cc.dim() {
        return Err(NbrError::RankOutOfRange(r, k, cc.dim()));
    }
    let rows = cc.cells(r);
    let cols = cc.cells(k);
    let mut triplets = Vec::new();
    for (j, y) in cols.iter().enumerate() {
        for (i, x) in rows.iter().enumerate() {
            if x.is_strict_subset_of(y) {
                triplets.push((i, j, 1.0));
            }
        }
    }
    Ok(NeighborhoodMatrix {
        selector: Some(Selector::Incidence(r, k)),
        domain_rank: k,
        codomain_rank: r,
        matrix: SparseMatrix::from_triplets(rows.len(), cols.len(), triplets),
    })
}

/// Adjacency matrix `A_{r,k}`: two distinct r-cells are related iff
/// some bridge cell of rank `r + k` strictly contains both.
pub fn adjacency(
    cc: &CombinatorialComplex,
    r: usize,
    k: usize,
) -> Result<NeighborhoodMatrix, NbrError> {
    if k == 0 || r + k > cc.dim() {
        return Err(NbrError::RankOutOfRange(r, k, cc.dim()));
    }
    let cells = cc.cells(r);
    let bridges = cc.cells(r + k);
    let mut triplets = Vec::new();
    for (i, x) in cells.iter().enumerate() {
        for (j, y) in cells.iter().enumerate().skip(i + 1) {
            let bridged = bridges
                .iter()
                .any(|z| x.is_strict_subset_of(z) && y.is_strict_subset_of(z));
            if bridged {
                triplets.push((i, j, 1.0));
                triplets.push((j, i, 1.0));
            }
        }
    }
    Ok(NeighborhoodMatrix {
        selector: Some(Selector::Adjacency(r, k)),
        domain_rank: r,
        codomain_rank: r,
        matrix: SparseMatrix::from_triplets(cells.len(), cells.len(), triplets),
    })
}

/// Coadjacency matrix `coA_{r,k}`: two distinct r-cells are related
/// iff some cell of rank `r - k` is strictly contained in both.
pub fn coadjacency(
    cc: &CombinatorialComplex,
    r: usize,
    k: usize,
) -> Result<NeighborhoodMatrix, NbrError> {
    if k == 0 || k > r || r > cc.dim() {
        return Err(NbrError::RankOutOfRange(r, k, cc.dim()));
    }
    let cells = cc.cells(r);
    let bridges = cc.cells(r - k);
    let mut triplets = Vec::new();
    for (i, x) in cells.iter().enumerate() {
        for (j, y) in cells.iter().enumerate().skip(i + 1) {
            let bridged = bridges
                .iter()
                .any(|z| z.is_strict_subset_of(x) && z.is_strict_subset_of(y));
            if bridged {
                triplets.push((i, j, 1.0));
                triplets.push((j, i, 1.0));
            }
        }
    }
    Ok(NeighborhoodMatrix {
        selector: Some(Selector::Coadjacency(r, k)),
        domain_rank: r,
        codomain_rank: r,
        matrix: SparseMatrix::from_triplets(cells.len(), cells.len(), triplets),
    })
}

/// Down and up incidence neighborhoods of a cell at rank offset `k`:
/// `down = {y ⊊ x : rk(y) = rk(x) - k}`, `up = {y ⊋ x : rk(y) = rk(x) + k}`.
pub fn up_down_incidence_sets(
    cc: &CombinatorialComplex,
    x: &CellSet,
    k: usize,
) -> Result<(BTreeSet<CellSet>, BTreeSet<CellSet>), NbrError> {
    let Some(rx) = cc.rank_of(x) else {
        return Err(NbrError::UnknownCell(x.clone()));
    };
    let down: BTreeSet<CellSet> = if k <= rx {
        cc.cells(rx - k)
            .iter()
            .filter(|y| y.is_strict_subset_of(x))
            .cloned()
            .collect()
    } else {
        BTreeSet::new()
    };
    let up: BTreeSet<CellSet> = cc
        .cells(rx + k)
        .iter()
        .filter(|y| x.is_strict_subset_of(y))
        .cloned()
        .collect();
    Ok((down, up))
}

/// Checks whether every `(r+1)`-cell is a simplex over the rank-`r`
/// cells: it has exactly `r + 2` vertices and each of its
/// `(r+1)`-vertex subsets is present as an r-cell.
fn simplicial_faces(cc: &CombinatorialComplex, r: usize, cell: &CellSet) -> Option<Vec<usize>> {
    if cell.len() != r + 2 {
        return None;
    }
    let mut face_indices = Vec::with_capacity(r + 2);
    // Faces in omitted-vertex order: the i-th face omits the i-th
    // vertex of the sorted tuple.
    for omit in 0..cell.len() {
        let face = CellSet::new(
            cell.vertices()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != omit)
                .map(|(_, &v)| v),
        )
        .ok()?;
        match cc.position_of(&face) {
            Some((rank, idx)) if rank == r => face_indices.push(idx),
            _ => return None,
        }
    }
    Some(face_indices)
}

/// Signed incidence matrix between ranks `r` and `r+1` with the
/// canonical simplicial orientation: the face omitting the i-th
/// vertex of the sorted tuple carries sign `(-1)^i`. For `r = 0`
/// this is the usual -1 on the smaller endpoint, +1 on the larger.
pub fn signed_incidence(
    cc: &CombinatorialComplex,
    r: usize,
) -> Result<NeighborhoodMatrix, NbrError> {
    if r + 1 > cc.dim() {
        return Err(NbrError::RankOutOfRange(r, r + 1, cc.dim()));
    }
    let cols = cc.cells(r + 1);
    let mut triplets = Vec::new();
    for (j, cell) in cols.iter().enumerate() {
        let Some(faces) = simplicial_faces(cc, r, cell) else {
            return Err(NbrError::NotOrientable(cell.clone(), r + 1));
        };
        for (omit, &i) in faces.iter().enumerate() {
            // Face omitting the `omit`-th vertex carries (-1)^omit.
            // For r = 0 this is -1 on the smaller endpoint and +1 on
            // the larger: the face {v1} omits index 0.
            let sign = if omit % 2 == 0 { 1.0 } else { -1.0 };
            triplets.push((i, j, sign));
        }
    }
    Ok(NeighborhoodMatrix {
        selector: Some(Selector::SignedIncidence(r)),
        domain_rank: r + 1,
        codomain_rank: r,
        matrix: SparseMatrix::from_triplets(cc.rank_size(r), cols.len(), triplets),
    })
}

/// `L_1 = B_0^T B_0 + B_1 B_1^T` over the signed incidence matrices.
/// The second term is zero when the complex has no 2-cells; if
/// 2-cells exist they must be simplicial, otherwise the orientation
/// error propagates.
pub fn hodge_laplacian_1(cc: &CombinatorialComplex) -> Result<Array2<f64>, NbrError> {
    if cc.dim() < 1 {
        return Err(NbrError::RankOutOfRange(0, 1, cc.dim()));
    }
    let b0 = signed_incidence(cc, 0)?.matrix().to_dense();
    let mut l1 = b0.t().dot(&b0);
    if cc.dim() >= 2 && cc.rank_size(2) > 0 {
        let b1 = signed_incidence(cc, 1)?.matrix().to_dense();
        l1 = l1 + b1.dot(&b1.t());
    }
    Ok(l1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell;
    use crate::complex::example_cc;

    fn path3() -> CombinatorialComplex {
        CombinatorialComplex::build(3, [(cell![0, 1], 1), (cell![1, 2], 1)]).unwrap()
    }

    #[test]
    fn incidence_on_example() {
        let cc = example_cc();
        let b01 = incidence(&cc, 0, 1).unwrap();
        assert_eq!((b01.rows(), b01.cols()), (3, 1));
        assert_eq!(b01.matrix().get(0, 0), 1.0);
        assert_eq!(b01.matrix().get(1, 0), 1.0);
        assert_eq!(b01.matrix().get(2, 0), 0.0);

        let b12 = incidence(&cc, 1, 2).unwrap();
        assert_eq!((b12.rows(), b12.cols()), (1, 1));
        assert_eq!(b12.matrix().get(0, 0), 1.0);
    }

    #[test]
    fn incidence_without_k_cells_has_zero_columns() {
        let cc = path3();
        // No 2-cells at all: rank out of range since dim = 1.
        assert!(incidence(&cc, 0, 2).is_err());

        // A complex of dimension two with an empty rank in between:
        // B_{0,1} has zero columns and B_{1,2} zero rows.
        let gappy =
            CombinatorialComplex::build(3, [(cell![0, 1, 2], 2)]).unwrap();
        assert_eq!(gappy.rank_size(1), 0);
        let b01 = incidence(&gappy, 0, 1).unwrap();
        assert_eq!((b01.rows(), b01.cols()), (3, 0));
        let b12 = incidence(&gappy, 1, 2).unwrap();
        assert_eq!((b12.rows(), b12.cols()), (0, 1));

        // No rank-1 bridges at all: the adjacency matrix is zero.
        let a01 = adjacency(&gappy, 0, 1).unwrap();
        assert_eq!(a01.matrix().nnz(), 0);
    }

    #[test]
    fn adjacency_on_example() {
        let cc = example_cc();
        let a01 = adjacency(&cc, 0, 1).unwrap();
        assert_eq!(a01.matrix().pattern(), vec![(0, 1), (1, 0)]);

        let a02 = adjacency(&cc, 0, 2).unwrap();
        let mut pat = a02.matrix().off_diagonal_pattern();
        pat.sort();
        assert_eq!(
            pat,
            vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
        );
        assert!(a02.matrix().is_symmetric());
        assert!(a02.matrix().is_zero_diagonal());
    }

    #[test]
    fn adjacency_without_bridges_is_zero() {
        let cc = example_cc();
        // Rank-1 cells with k=1 need rank-2 bridges containing two
        // distinct 1-cells; there is only one 1-cell.
        let a11 = adjacency(&cc, 1, 1).unwrap();
        assert_eq!(a11.matrix().nnz(), 0);
    }

    #[test]
    fn coadjacency_examples() {
        let cc = example_cc();
        let co21 = coadjacency(&cc, 2, 1).unwrap();
        assert_eq!((co21.rows(), co21.cols()), (1, 1));
        assert_eq!(co21.matrix().nnz(), 0);

        // Two triangles sharing edge {1,2}.
        let two = CombinatorialComplex::build(
            4,
            [
                (cell![0, 1], 1),
                (cell![0, 2], 1),
                (cell![1, 2], 1),
                (cell![1, 3], 1),
                (cell![2, 3], 1),
                (cell![0, 1, 2], 2),
                (cell![1, 2, 3], 2),
            ],
        )
        .unwrap();
        let co = coadjacency(&two, 2, 1).unwrap();
        assert_eq!(co.matrix().pattern(), vec![(0, 1), (1, 0)]);

        // coA_{1,1} on the path a-b-c: the two edges share vertex b.
        let co11 = coadjacency(&path3(), 1, 1).unwrap();
        assert_eq!(co11.matrix().pattern(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn up_down_sets() {
        let cc = example_cc();
        let (down, up) = up_down_incidence_sets(&cc, &cell![0, 1, 2], 1).unwrap();
        assert_eq!(down.into_iter().collect::<Vec<_>>(), vec![cell![0, 1]]);
        assert!(up.is_empty());

        let (down0, _) = up_down_incidence_sets(&cc, &cell![0], 1).unwrap();
        assert!(down0.is_empty());

        let (_, up2) = up_down_incidence_sets(&cc, &cell![0], 2).unwrap();
        assert_eq!(up2.into_iter().collect::<Vec<_>>(), vec![cell![0, 1, 2]]);

        assert!(matches!(
            up_down_incidence_sets(&cc, &cell![1, 2], 1),
            Err(NbrError::UnknownCell(_))
        ));
    }

    #[test]
    fn union_identity_over_offsets() {
        // N_down(x) = union over k of N_{down,k}(x), same for up.
        let cc = example_cc();
        for (x, rx) in cc.iter_cells() {
            let mut down_union = BTreeSet::new();
            let mut up_union = BTreeSet::new();
            for k in 1..=cc.dim() {
                let (d, u) = up_down_incidence_sets(&cc, x, k).unwrap();
                down_union.extend(d);
                up_union.extend(u);
            }
            let down_all: BTreeSet<CellSet> = cc
                .iter_cells()
                .filter(|(y, _)| y.is_strict_subset_of(x))
                .map(|(y, _)| y.clone())
                .collect();
            let up_all: BTreeSet<CellSet> = cc
                .iter_cells()
                .filter(|(y, _)| x.is_strict_subset_of(y))
                .map(|(y, _)| y.clone())
                .collect();
            assert_eq!(down_union, down_all, "down union at {x:?} rank {rx}");
            assert_eq!(up_union, up_all, "up union at {x:?} rank {rx}");
        }
    }

    #[test]
    fn signed_incidence_path() {
        let b0 = signed_incidence(&path3(), 0).unwrap();
        // Columns in canonical edge order {0,1}, {1,2}.
        assert_eq!(b0.matrix().get(0, 0), -1.0);
        assert_eq!(b0.matrix().get(1, 0), 1.0);
        assert_eq!(b0.matrix().get(2, 0), 0.0);
        assert_eq!(b0.matrix().get(1, 1), -1.0);
        assert_eq!(b0.matrix().get(2, 1), 1.0);
    }

    #[test]
    fn signed_pattern_matches_unsigned() {
        let cc = example_cc();
        // The lone 2-cell has three vertices but its 1-faces are not
        // all present, so rank 1 is not orientable here.
        assert!(matches!(
            signed_incidence(&cc, 1),
            Err(NbrError::NotOrientable(..))
        ));
        let b0 = signed_incidence(&cc, 0).unwrap();
        let unsigned = incidence(&cc, 0, 1).unwrap();
        let mut pat = b0.matrix().pattern();
        pat.sort();
        let mut want = unsigned.matrix().pattern();
        want.sort();
        assert_eq!(pat, want);
        assert!(b0.matrix().triplets().all(|(_, _, v)| v.abs() == 1.0));
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        // Filled triangle: B0 · B1 = 0.
        let tri = CombinatorialComplex::build(
            3,
            [
                (cell![0, 1], 1),
                (cell![0, 2], 1),
                (cell![1, 2], 1),
                (cell![0, 1, 2], 2),
            ],
        )
        .unwrap();
        let b0 = signed_incidence(&tri, 0).unwrap().matrix().to_dense();
        let b1 = signed_incidence(&tri, 1).unwrap().matrix().to_dense();
        let prod = b0.dot(&b1);
        assert!(prod.iter().all(|v| v.abs() == 0.0));
    }

    #[test]
    fn hodge_single_edge() {
        let cc = CombinatorialComplex::build(2, [(cell![0, 1], 1)]).unwrap();
        let l1 = hodge_laplacian_1(&cc).unwrap();
        assert_eq!(l1.shape(), &[1, 1]);
        assert_eq!(l1[(0, 0)], 2.0);
    }

    #[test]
    fn hodge_triangle_graph() {
        // Triangle graph without the 2-cell: diagonal 2, off-diagonal ±1.
        let cc = CombinatorialComplex::build(
            3,
            [(cell![0, 1], 1), (cell![0, 2], 1), (cell![1, 2], 1)],
        )
        .unwrap();
        let l1 = hodge_laplacian_1(&cc).unwrap();
        for i in 0..3 {
            assert_eq!(l1[(i, i)], 2.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(l1[(i, j)].abs(), 1.0);
                }
            }
        }
        // Symmetric and PSD-ish by construction.
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l1[(i, j)], l1[(j, i)]);
            }
        }
    }

    /// Cyclic Jacobi sweeps; adequate as an oracle for tiny
    /// symmetric matrices.
    fn jacobi_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
        let n = m.nrows();
        let mut a = m.clone();
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[(p, q)].abs();
                    if a[(p, q)].abs() < 1e-14 {
                        continue;
                    }
                    let theta = 0.5 * (2.0 * a[(p, q)]).atan2(a[(q, q)] - a[(p, p)]);
                    let (c, s_) = (theta.cos(), theta.sin());
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s_ * akq;
                        a[(k, q)] = s_ * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s_ * aqk;
                        a[(q, k)] = s_ * apk + c * aqk;
                    }
                }
            }
            if off < 1e-13 {
                break;
            }
        }
        let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs
    }

    #[test]
    fn hodge_triangle_spectrum() {
        let cc = CombinatorialComplex::build(
            3,
            [(cell![0, 1], 1), (cell![0, 2], 1), (cell![1, 2], 1)],
        )
        .unwrap();
        let l1 = hodge_laplacian_1(&cc).unwrap();
        let eigs = jacobi_eigenvalues(&l1);
        let want = [0.0, 3.0, 3.0];
        for (e, w) in eigs.iter().zip(want) {
            assert!((e - w).abs() < 1e-9, "eigenvalues {eigs:?}");
        }
        assert!(eigs.iter().all(|&e| e >= -1e-10), "must be PSD");
    }

    #[test]
    fn selector_parse_roundtrip() {
        for s in ["B0,1", "B0,1^T", "A1,1", "coA2,1", "sB0", "sB1^T", "Id2"] {
            let sel: Selector = s.parse().unwrap();
            assert_eq!(sel.to_string(), s);
        }
        assert!("Q1,2".parse::<Selector>().is_err());
    }

    #[test]
    fn selector_map_ranks() {
        assert_eq!(Selector::Incidence(0, 1).map_ranks(), (1, 0));
        assert_eq!(Selector::IncidenceT(0, 1).map_ranks(), (0, 1));
        assert_eq!(Selector::Adjacency(1, 1).map_ranks(), (1, 1));
        assert_eq!(Selector::SignedIncidenceT(0).map_ranks(), (0, 1));
    }
}
