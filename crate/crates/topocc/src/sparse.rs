//! Row-compressed sparse matrices with sorted column indices.
//!
//! Neighborhood matrices are sparse and small (desk scale), so a
//! minimal CSR layout with dense conversion is all that is needed.

use ndarray::Array2;

/// Sparse matrix in CSR form. Column indices are sorted within each
/// row and entries with value zero are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)))
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are
    /// summed; zeros are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut items: Vec<(usize, usize, f64)> = triplets
            .into_iter()
            .inspect(|&(i, j, _)| {
                assert!(i < rows && j < cols, "triplet ({i},{j}) out of bounds");
            })
            .collect();
        items.sort_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(items.len());
        for (i, j, v) in items {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0.0);

        let mut row_ptr = vec![0usize; rows + 1];
        for &(i, _, _) in &merged {
            row_ptr[i + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx: merged.iter().map(|&(_, j, _)| j).collect(),
            values: merged.iter().map(|&(_, _, v)| v).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of one row, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&j, &v)| (j, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or(0.0)
    }

    /// All stored entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(
            self.cols,
            self.rows,
            self.triplets().map(|(i, j, v)| (j, i, v)),
        )
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for (i, j, v) in self.triplets() {
            out[(i, j)] = v;
        }
        out
    }

    pub fn from_dense(m: &Array2<f64>) -> Self {
        Self::from_triplets(
            m.nrows(),
            m.ncols(),
            m.indexed_iter().map(|((i, j), &v)| (i, j, v)),
        )
    }

    /// Left-multiplies a dense matrix: `self · h`.
    pub fn mul_dense(&self, h: &Array2<f64>) -> Array2<f64> {
        assert_eq!(self.cols, h.nrows(), "sparse-dense shape mismatch");
        let mut out = Array2::zeros((self.rows, h.ncols()));
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                for c in 0..h.ncols() {
                    out[(i, c)] += v * h[(j, c)];
                }
            }
        }
        out
    }

    /// Sparse-sparse product `self · other` (pattern products in the
    /// structure-determination checks are tiny).
    pub fn mul_sparse(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "sparse-sparse shape mismatch");
        let mut triplets = Vec::new();
        for i in 0..self.rows {
            for (k, v) in self.row(i) {
                for (j, w) in other.row(k) {
                    triplets.push((i, j, v * w));
                }
            }
        }
        SparseMatrix::from_triplets(self.rows, other.cols, triplets)
    }

    /// The set of `(row, col)` positions with nonzero entries.
    pub fn pattern(&self) -> Vec<(usize, usize)> {
        self.triplets().map(|(i, j, _)| (i, j)).collect()
    }

    /// Nonzero positions off the main diagonal.
    pub fn off_diagonal_pattern(&self) -> Vec<(usize, usize)> {
        self.triplets()
            .filter(|&(i, j, _)| i != j)
            .map(|(i, j, _)| (i, j))
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).map(|(_, v)| v).sum())
            .collect()
    }

    /// Symmetric degree normalization `D_r^{-1/2} G D_c^{-1/2}`,
    /// where the degrees are row and column sums of `|G|`. Rows or
    /// columns with zero degree are left zero.
    pub fn sym_normalized(&self) -> SparseMatrix {
        let mut rdeg = vec![0.0; self.rows];
        let mut cdeg = vec![0.0; self.cols];
        for (i, j, v) in self.triplets() {
            rdeg[i] += v.abs();
            cdeg[j] += v.abs();
        }
        let scale = |d: f64| if d > 0.0 { d.powf(-0.5) } else { 0.0 };
        SparseMatrix::from_triplets(
            self.rows,
            self.cols,
            self.triplets()
                .map(|(i, j, v)| (i, j, scale(rdeg[i]) * v * scale(cdeg[j]))),
        )
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && self
                .triplets()
                .all(|(i, j, v)| (self.get(j, i) - v).abs() == 0.0)
    }

    pub fn is_zero_diagonal(&self) -> bool {
        (0..self.rows.min(self.cols)).all(|i| self.get(i, i) == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn triplets_roundtrip_sorted() {
        let m = SparseMatrix::from_triplets(2, 3, [(1, 2, 3.0), (0, 1, 1.0), (1, 0, 2.0)]);
        let t: Vec<_> = m.triplets().collect();
        assert_eq!(t, vec![(0, 1, 1.0), (1, 0, 2.0), (1, 2, 3.0)]);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = SparseMatrix::from_triplets(1, 2, [(0, 0, 1.0), (0, 0, -1.0), (0, 1, 2.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 2.0);
    }

    #[test]
    fn dense_product_matches() {
        let g = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, -1.0), (1, 0, 2.0)]);
        let h = array![[1.0, 2.0], [3.0, 4.0]];
        let got = g.mul_dense(&h);
        let want = g.to_dense().dot(&h);
        assert_eq!(got, want);
    }

    #[test]
    fn transpose_involution() {
        let g = SparseMatrix::from_triplets(2, 3, [(0, 2, 1.0), (1, 0, -1.0)]);
        assert_eq!(g.transpose().transpose(), g);
    }

    #[test]
    fn sym_normalization_zero_rows_stay_zero() {
        let g = SparseMatrix::from_triplets(3, 3, [(0, 1, 1.0), (1, 0, 1.0)]);
        let n = g.sym_normalized();
        assert_eq!(n.get(0, 1), 1.0);
        assert_eq!(n.row(2).count(), 0);
    }
}
