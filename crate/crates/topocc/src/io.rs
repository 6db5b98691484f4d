//! Line-oriented text formats: edge lists, sparse triplets, cochains,
//! complexes, and the run configuration consumed by the CLI. All
//! formats are ASCII with `#` comments; floats print with Rust's
//! shortest round-trip representation so load/export/load is the
//! identity.

use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

use crate::cell::CellSet;
use crate::cochain::Cochain;
use crate::complex::CombinatorialComplex;
use crate::lifting::Graph;
use crate::sparse::SparseMatrix;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {0}: {1}")]
    Parse(usize, String),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid complex: {0}")]
    Complex(#[from] crate::complex::CcError),
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses `u v` pairs into a deduplicated undirected graph; the
/// vertex count is one past the largest index.
pub fn parse_edge_list(text: &str) -> Result<Graph, IoError> {
    let mut edges = Vec::new();
    let mut max_vertex = 0usize;
    for (lineno, line) in content_lines(text) {
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(IoError::Parse(lineno, "expected `u v`".into()));
        };
        let a: usize = a
            .parse()
            .map_err(|e| IoError::Parse(lineno, format!("bad vertex: {e}")))?;
        let b: usize = b
            .parse()
            .map_err(|e| IoError::Parse(lineno, format!("bad vertex: {e}")))?;
        if a == b {
            return Err(IoError::SelfLoop(a));
        }
        max_vertex = max_vertex.max(a).max(b);
        edges.push((a, b));
    }
    let count = if edges.is_empty() { 0 } else { max_vertex + 1 };
    Graph::new(count, edges).map_err(|e| IoError::Parse(0, e.to_string()))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph, IoError> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for &(a, b) in g.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

/// Sparse triplet format: header `rows cols nnz`, then `i j v` lines,
/// zero-based.
pub fn format_triplets(m: &SparseMatrix) -> String {
    let mut out = format!("{} {} {}\n", m.rows(), m.cols(), m.nnz());
    for (i, j, v) in m.triplets() {
        out.push_str(&format!("{i} {j} {v}\n"));
    }
    out
}

pub fn parse_triplets(text: &str) -> Result<SparseMatrix, IoError> {
    let mut lines = content_lines(text);
    let Some((lineno, header)) = lines.next() else {
        return Err(IoError::Parse(0, "empty triplet file".into()));
    };
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|e| IoError::Parse(lineno, format!("bad header: {e}")))?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(IoError::Parse(lineno, "expected `rows cols nnz`".into()));
    };
    let mut triplets = Vec::with_capacity(nnz);
    for (lineno, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [i, j, v] = tokens[..] else {
            return Err(IoError::Parse(lineno, "expected `i j v`".into()));
        };
        triplets.push((
            i.parse()
                .map_err(|e| IoError::Parse(lineno, format!("bad row: {e}")))?,
            j.parse()
                .map_err(|e| IoError::Parse(lineno, format!("bad col: {e}")))?,
            v.parse()
                .map_err(|e| IoError::Parse(lineno, format!("bad value: {e}")))?,
        ));
    }
    if triplets.len() != nnz {
        return Err(IoError::Parse(
            0,
            format!("header promised {nnz} entries, found {}", triplets.len()),
        ));
    }
    Ok(SparseMatrix::from_triplets(rows, cols, triplets))
}

/// Cochain format: header `rank d rows`, then one feature row per
/// line.
pub fn format_cochain(h: &Cochain) -> String {
    let mut out = format!("{} {} {}\n", h.rank(), h.dim(), h.rows());
    for row in h.data().rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_cochain(text: &str) -> Result<Cochain, IoError> {
    let mut lines = content_lines(text);
    let Some((lineno, header)) = lines.next() else {
        return Err(IoError::Parse(0, "empty cochain file".into()));
    };
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|e| IoError::Parse(lineno, format!("bad header: {e}")))?;
    let [rank, d, rows] = dims[..] else {
        return Err(IoError::Parse(lineno, "expected `rank d rows`".into()));
    };
    let mut data = Array2::zeros((rows, d));
    let mut filled = 0usize;
    for (lineno, line) in lines {
        if filled >= rows {
            return Err(IoError::Parse(lineno, "more rows than the header".into()));
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()
            .map_err(|e| IoError::Parse(lineno, format!("bad value: {e}")))?;
        if values.len() != d {
            return Err(IoError::Parse(
                lineno,
                format!("expected {d} values, found {}", values.len()),
            ));
        }
        for (c, v) in values.into_iter().enumerate() {
            data[(filled, c)] = v;
        }
        filled += 1;
    }
    if filled != rows {
        return Err(IoError::Parse(
            0,
            format!("header promised {rows} rows, found {filled}"),
        ));
    }
    Ok(Cochain::new(rank, data))
}

/// Complex format: header `cc <vertex_count>`, then `cell <rank>
/// <v...>` lines (rank-0 singletons may be omitted).
pub fn format_cc(cc: &CombinatorialComplex) -> String {
    let mut out = format!("cc {}\n", cc.vertex_count());
    for (cell, rank) in cc.iter_cells() {
        if rank == 0 {
            continue;
        }
        let verts: Vec<String> = cell.vertices().iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("cell {rank} {}\n", verts.join(" ")));
    }
    out
}

pub fn parse_cc(text: &str) -> Result<CombinatorialComplex, IoError> {
    let mut lines = content_lines(text);
    let Some((lineno, header)) = lines.next() else {
        return Err(IoError::Parse(0, "empty complex file".into()));
    };
    let count: usize = header
        .strip_prefix("cc")
        .map(str::trim)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| IoError::Parse(lineno, "expected `cc <vertex_count>`".into()))?;
    let mut ranked = Vec::new();
    for (lineno, line) in lines {
        let Some(rest) = line.strip_prefix("cell ") else {
            return Err(IoError::Parse(lineno, "expected `cell <rank> <v...>`".into()));
        };
        let mut tokens = rest.split_whitespace();
        let rank: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| IoError::Parse(lineno, "bad rank".into()))?;
        let verts: Vec<usize> = tokens
            .map(|t| t.parse())
            .collect::<Result<_, _>>()
            .map_err(|e| IoError::Parse(lineno, format!("bad vertex: {e}")))?;
        let cell =
            CellSet::new(verts).map_err(|e| IoError::Parse(lineno, e.to_string()))?;
        ranked.push((cell, rank));
    }
    Ok(CombinatorialComplex::build(count, ranked)?)
}

pub fn load_cc(path: impl AsRef<Path>) -> Result<CombinatorialComplex, IoError> {
    parse_cc(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::example_cc;
    use ndarray::array;

    #[test]
    fn edge_list_examples() {
        let g = parse_edge_list("0 1\n1 2\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);

        let dup = parse_edge_list("0 1\n1 0\n0 1\n").unwrap();
        assert_eq!(dup.edges(), &[(0, 1)]);

        assert!(matches!(parse_edge_list("0 0\n"), Err(IoError::SelfLoop(0))));
        assert!(matches!(parse_edge_list("0\n"), Err(IoError::Parse(..))));
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = Graph::cycle(5);
        let back = parse_edge_list(&format_edge_list(&g)).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn triplet_roundtrip_exact() {
        let m = SparseMatrix::from_triplets(
            3,
            2,
            [(0, 0, 1.0), (1, 1, -0.125), (2, 0, 0.1 + 0.2)],
        );
        let text = format_triplets(&m);
        let back = parse_triplets(&text).unwrap();
        assert_eq!(m, back);
        let again = parse_triplets(&format_triplets(&back)).unwrap();
        assert_eq!(back, again);
    }

    #[test]
    fn paper_b01_triplet_text() {
        let cc = example_cc();
        let b01 = crate::neighborhoods::incidence(&cc, 0, 1).unwrap();
        assert_eq!(format_triplets(b01.matrix()), "3 1 2\n0 0 1\n1 0 1\n");
    }

    #[test]
    fn cochain_roundtrip() {
        let h = Cochain::new(1, array![[1.5, -2.0], [0.3333333333333333, 7.0]]);
        let back = parse_cochain(&format_cochain(&h)).unwrap();
        assert_eq!(&h, &back);
    }

    #[test]
    fn cochain_bad_shapes() {
        assert!(parse_cochain("1 2 2\n1 2\n").is_err());
        assert!(parse_cochain("1 2 1\n1 2 3\n").is_err());
    }

    #[test]
    fn cc_roundtrip() {
        let cc = example_cc();
        let back = parse_cc(&format_cc(&cc)).unwrap();
        assert_eq!(cc, back);
    }
}
