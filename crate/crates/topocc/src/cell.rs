//! Cells: non-empty sets of vertex identifiers.

use std::fmt;

use crate::complex::CcError;

/// A cell of a combinatorial complex: a non-empty set of vertices,
/// stored sorted and deduplicated. Two cells are equal iff their
/// vertex sets are equal; the `Ord` impl is lexicographic on the
/// sorted vertex tuple, which fixes the canonical cell ordering used
/// for all matrix layouts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellSet {
    vertices: Vec<usize>,
}

impl CellSet {
    /// Builds a cell from arbitrary vertex ids; sorts and dedups.
    pub fn new(vertices: impl IntoIterator<Item = usize>) -> Result<Self, CcError> {
        let mut v: Vec<usize> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(CcError::EmptyCell);
        }
        Ok(Self { vertices: v })
    }

    /// Singleton cell `{v}`.
    pub fn singleton(v: usize) -> Self {
        Self { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Subset test (not necessarily strict).
    pub fn is_subset_of(&self, other: &CellSet) -> bool {
        if self.vertices.len() > other.vertices.len() {
            return false;
        }
        self.vertices.iter().all(|v| other.contains(*v))
    }

    /// Strict subset test.
    pub fn is_strict_subset_of(&self, other: &CellSet) -> bool {
        self.vertices.len() < other.vertices.len() && self.is_subset_of(other)
    }

    /// True if the two cells share at least one vertex.
    pub fn intersects(&self, other: &CellSet) -> bool {
        self.vertices.iter().any(|v| other.contains(*v))
    }

    pub fn max_vertex(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    /// Union of the two vertex sets.
    pub fn union(&self, other: &CellSet) -> CellSet {
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices);
        v.sort_unstable();
        v.dedup();
        CellSet { vertices: v }
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Shorthand used throughout the tests.
#[macro_export]
macro_rules! cell {
    ($($v:expr),+ $(,)?) => {
        $crate::cell::CellSet::new([$($v),+]).unwrap()
    };
}
