//! Hasse graphs of combinatorial complexes, augmented variants, and
//! the reduction of tensor-diagram computations to vertex message
//! passing on them.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use ndarray::Array2;

use crate::cell::CellSet;
use crate::cochain::{Cochain, Combine};
use crate::complex::CombinatorialComplex;
use crate::lifting::Graph;
use crate::neighborhoods::{incidence, NbrError, Selector};
use crate::nn::diagram::{CompiledDiagram, EdgeKind};
use crate::nn::NnError;

/// A cell as a Hasse vertex: `(rank, canonical index)`.
pub type CellKey = (usize, usize);

/// The Hasse graph of a complex: one vertex per cell, a directed core
/// edge `x -> y` whenever `x ⊊ y` with ranks one apart, and optional
/// undirected augmented edges tagged by the selector that induced
/// them.
#[derive(Clone, Debug)]
pub struct HasseGraph {
    vertices: Vec<(CellKey, CellSet)>,
    core_edges: Vec<(CellKey, CellKey)>,
    augmented: Vec<(CellKey, CellKey, Selector)>,
}

impl HasseGraph {
    pub fn vertices(&self) -> &[(CellKey, CellSet)] {
        &self.vertices
    }

    pub fn core_edges(&self) -> &[(CellKey, CellKey)] {
        &self.core_edges
    }

    /// Deduplicated undirected augmented edges with their selector
    /// tags.
    pub fn augmented_edges(&self) -> &[(CellKey, CellKey, Selector)] {
        &self.augmented
    }

    /// Core and augmented edges as one undirected set.
    pub fn all_undirected_edges(&self) -> BTreeSet<(CellKey, CellKey)> {
        let mut out = BTreeSet::new();
        for &(a, b) in &self.core_edges {
            out.insert((a.min(b), a.max(b)));
        }
        for &(a, b, _) in &self.augmented {
            out.insert((a.min(b), a.max(b)));
        }
        out
    }

    /// The core edge set is acyclic by construction (edges increase
    /// rank); exposed for property tests.
    pub fn is_acyclic(&self) -> bool {
        self.core_edges.iter().all(|&((ra, _), (rb, _))| ra < rb)
    }

    /// DOT export: solid arrows for core edges, dashed lines labeled
    /// by selector for augmented edges.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph hasse {\n");
        for ((rank, idx), cell) in &self.vertices {
            let _ = writeln!(
                out,
                "  \"{rank}_{idx}\" [label=\"{cell:?} (rank {rank})\"];"
            );
        }
        for ((ra, ia), (rb, ib)) in &self.core_edges {
            let _ = writeln!(out, "  \"{ra}_{ia}\" -> \"{rb}_{ib}\";");
        }
        for ((ra, ia), (rb, ib), sel) in &self.augmented {
            let _ = writeln!(
                out,
                "  \"{ra}_{ia}\" -> \"{rb}_{ib}\" [dir=none, style=dashed, label=\"{sel}\"];"
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the plain Hasse graph of a complex.
pub fn hasse(cc: &CombinatorialComplex) -> HasseGraph {
    let vertices: Vec<(CellKey, CellSet)> = cc
        .iter_cells()
        .map(|(cell, rank)| {
            let (_, idx) = cc.position_of(cell).unwrap();
            ((rank, idx), cell.clone())
        })
        .collect();
    let mut core_edges = Vec::new();
    for rank in 0..cc.dim() {
        for (i, x) in cc.cells(rank).iter().enumerate() {
            for (j, y) in cc.cells(rank + 1).iter().enumerate() {
                if x.is_strict_subset_of(y) {
                    core_edges.push(((rank, i), (rank + 1, j)));
                }
            }
        }
    }
    HasseGraph {
        vertices,
        core_edges,
        augmented: Vec::new(),
    }
}

/// Hasse graph augmented with one undirected edge per nonzero entry
/// of each selector's matrix (deduplicated per selector).
pub fn augment_hasse(
    cc: &CombinatorialComplex,
    selectors: &[Selector],
) -> Result<HasseGraph, NbrError> {
    let mut graph = hasse(cc);
    let mut seen = BTreeSet::new();
    for &sel in selectors {
        let resolved = sel.resolve(cc)?;
        let (dom, cod) = sel.map_ranks();
        for (i, j, _) in resolved.matrix().triplets() {
            let a = (cod, i);
            let b = (dom, j);
            let (lo, hi) = (a.min(b), a.max(b));
            if seen.insert((lo, hi, sel)) {
                graph.augmented.push((lo, hi, sel));
            }
        }
    }
    Ok(graph)
}

/// Canonical serialization of the consecutive incidence matrices
/// under the canonical cell ordering; two complexes have equal
/// structure iff their fingerprints match.
pub fn structure_fingerprint(cc: &CombinatorialComplex) -> String {
    let mut out = format!("dim={};sizes=", cc.dim());
    for rank in 0..=cc.dim() {
        if rank > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", cc.rank_size(rank));
    }
    for rank in 0..cc.dim() {
        let _ = write!(out, ";B{rank},{}=", rank + 1);
        if let Ok(b) = incidence(cc, rank, rank + 1) {
            let mut pattern = b.matrix().pattern();
            pattern.sort();
            for (n, (i, j)) in pattern.into_iter().enumerate() {
                if n > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{i}:{j}");
            }
        }
    }
    out
}

/// The graph `G_{X^k}` of a similarity measure on the k-cells:
/// vertices are k-cells, edges connect pairs with nonzero similarity,
/// weights are the similarity values.
pub fn representation_graph(
    cc: &CombinatorialComplex,
    k: usize,
    sim: impl Fn(&CellSet, &CellSet) -> f64,
) -> (Graph, Vec<f64>) {
    let cells = cc.cells(k);
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let s = sim(&cells[i], &cells[j]);
            if s != 0.0 {
                edges.push((i, j));
                weights.push(s);
            }
        }
    }
    let graph = Graph::new(cells.len(), edges).expect("indices are in range");
    (graph, weights)
}

/// Executes a compiled diagram by message passing over the Hasse
/// vertices: every cell is a vertex, every nonzero matrix entry an
/// edge carrying its scalar weight, and each diagram edge a message
/// channel. Must agree with [`CompiledDiagram::forward`].
pub fn reduce_and_run(
    diagram: &CompiledDiagram,
    cc: &CombinatorialComplex,
    inputs: &HashMap<String, Cochain>,
) -> Result<HashMap<String, Cochain>, NnError> {
    let n_nodes = diagram.nodes.len();
    // Per-diagram-node vertex features, one Vec<f64> per cell.
    let mut values: Vec<Option<Vec<Vec<f64>>>> = vec![None; n_nodes];

    for (i, node) in diagram.nodes.iter().enumerate() {
        let indeg = diagram.edges.iter().filter(|e| e.dst == i).count();
        if indeg == 0 {
            let Some(h) = inputs.get(&node.id) else {
                return Err(NnError::MissingInput(node.id.clone()));
            };
            if h.rank() != node.rank || h.rows() != cc.rank_size(node.rank) {
                return Err(NnError::ShapeMismatch(format!(
                    "input for `{}` does not live on the rank-{} cells",
                    node.id, node.rank
                )));
            }
            values[i] = Some(rows_of(h.data()));
        }
    }

    for &nid in &diagram.topo {
        if values[nid].is_some() {
            continue;
        }
        let node = &diagram.nodes[nid];
        let n_cells = cc.rank_size(node.rank);
        let merge = &diagram.merges[nid];
        let mut combined: Option<Vec<Vec<f64>>> = None;
        for edge in diagram.edges.iter().filter(|e| e.dst == nid) {
            let src = values[edge.src].as_ref().ok_or(NnError::CycleDetected)?;
            // The channel: one Hasse message per nonzero entry,
            // grouped by target vertex.
            let channel: Vec<Vec<(usize, f64)>> = (0..edge.matrix.rows())
                .map(|i| edge.matrix.row(i).collect())
                .collect();
            let contribution: Vec<Vec<f64>> = match edge.kind {
                EdgeKind::Plain => {
                    let d = src.first().map(Vec::len).unwrap_or(0);
                    let mut acc = vec![vec![0.0; d]; n_cells];
                    for (y, messages) in channel.iter().enumerate() {
                        for &(x, w) in messages {
                            for c in 0..d {
                                acc[y][c] += w * src[x][c];
                            }
                        }
                    }
                    map_rows(&acc, |v| edge.activation.apply(v))
                }
                EdgeKind::Conv => {
                    let w = diagram.params.slot(edge.w.unwrap());
                    let d = src.first().map(Vec::len).unwrap_or(w.nrows());
                    let mut acc = vec![vec![0.0; d]; n_cells];
                    for (y, messages) in channel.iter().enumerate() {
                        for &(x, weight) in messages {
                            for c in 0..d {
                                acc[y][c] += weight * src[x][c];
                            }
                        }
                    }
                    let projected: Vec<Vec<f64>> =
                        acc.iter().map(|row| vec_mat(row, w)).collect();
                    map_rows(&projected, |v| edge.activation.apply(v))
                }
                EdgeKind::Attention => {
                    let w = diagram.params.slot(edge.w.unwrap());
                    let a = diagram.params.slot(edge.a.unwrap());
                    let d = edge.out_dim;
                    let a_first: Vec<f64> = (0..d).map(|i| a[(i, 0)]).collect();
                    let a_second: Vec<f64> = (0..d).map(|i| a[(d + i, 0)]).collect();
                    let p_src: Vec<Vec<f64>> = src.iter().map(|row| vec_mat(row, w)).collect();
                    // Same rank: rows score through the first block of
                    // `a`, columns through the second. Cross rank:
                    // rows (destination cells) score through the
                    // companion projection and the second block,
                    // columns (source cells) through the first.
                    let (row_score, col_score): (Vec<f64>, Vec<f64>) = match edge.companion {
                        None => (
                            p_src.iter().map(|p| dot(p, &a_first)).collect(),
                            p_src.iter().map(|p| dot(p, &a_second)).collect(),
                        ),
                        Some(comp) => {
                            let wt = diagram.params.slot(edge.w_companion.unwrap());
                            let comp_vals =
                                values[comp].as_ref().ok_or(NnError::CycleDetected)?;
                            (
                                comp_vals
                                    .iter()
                                    .map(|row| dot(&vec_mat(row, wt), &a_second))
                                    .collect(),
                                p_src.iter().map(|p| dot(p, &a_first)).collect(),
                            )
                        }
                    };
                    let mut out = vec![vec![0.0; d]; n_cells];
                    for (y, messages) in channel.iter().enumerate() {
                        if messages.is_empty() {
                            continue;
                        }
                        let scores: Vec<f64> = messages
                            .iter()
                            .map(|&(x, _)| {
                                edge.activation.apply(row_score[y] + col_score[x])
                            })
                            .collect();
                        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
                        let z: f64 = exps.iter().sum();
                        if !z.is_finite() || z <= 0.0 {
                            return Err(NnError::DegenerateRow(y));
                        }
                        for (&(x, gval), e) in messages.iter().zip(exps) {
                            let att = e / z * gval;
                            for c in 0..d {
                                out[y][c] += att * p_src[x][c];
                            }
                        }
                    }
                    out
                }
            };
            combined = Some(match combined {
                None => contribution,
                Some(acc) => match merge.combine {
                    Combine::Sum => add_rows(&acc, &contribution)?,
                    Combine::Concat => concat_rows(&acc, &contribution),
                },
            });
        }
        let combined = combined.ok_or(NnError::CycleDetected)?;
        values[nid] = Some(map_rows(&combined, |v| merge.activation.apply(v)));
    }

    let mut outputs = HashMap::new();
    for (i, node) in diagram.nodes.iter().enumerate() {
        let outdeg = diagram.edges.iter().filter(|e| e.src == i).count();
        if outdeg == 0 {
            let rows = values[i].as_ref().unwrap();
            outputs.insert(
                node.id.clone(),
                Cochain::new(node.rank, rows_to_matrix(rows)),
            );
        }
    }
    Ok(outputs)
}

fn rows_of(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Array2<f64> {
    let d = rows.first().map(Vec::len).unwrap_or(0);
    Array2::from_shape_fn((rows.len(), d), |(i, j)| rows[i][j])
}

fn vec_mat(v: &[f64], m: &Array2<f64>) -> Vec<f64> {
    (0..m.ncols())
        .map(|c| v.iter().enumerate().map(|(r, x)| x * m[(r, c)]).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn map_rows(rows: &[Vec<f64>], f: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| f(v)).collect())
        .collect()
}

fn add_rows(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NnError> {
    if a.len() != b.len() || a.first().map(Vec::len) != b.first().map(Vec::len) {
        return Err(NnError::ShapeMismatch(
            "merge contributions have different shapes".into(),
        ));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect())
        .collect())
}

fn concat_rows(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().chain(y).copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell;
    use crate::complex::example_cc;
    use crate::lifting::loop_cc;
    use crate::neighborhoods::coadjacency;

    #[test]
    fn hasse_of_example() {
        let graph = hasse(&example_cc());
        assert_eq!(graph.vertices().len(), 5);
        let cc = example_cc();
        let key = |cell: &CellSet| {
            let (r, i) = cc.position_of(cell).unwrap();
            (r, i)
        };
        let mut edges = graph.core_edges().to_vec();
        edges.sort();
        let mut want = vec![
            (key(&cell![0]), key(&cell![0, 1])),
            (key(&cell![1]), key(&cell![0, 1])),
            (key(&cell![0, 1]), key(&cell![0, 1, 2])),
        ];
        want.sort();
        assert_eq!(edges, want);
        assert!(graph.is_acyclic());
    }

    #[test]
    fn dim_zero_is_edgeless() {
        let cc = CombinatorialComplex::from_vertices(4);
        let graph = hasse(&cc);
        assert_eq!(graph.vertices().len(), 4);
        assert!(graph.core_edges().is_empty());
    }

    #[test]
    fn triangle_loop_has_nine_edges() {
        let tri = loop_cc(&Graph::cycle(3), &[vec![0, 1, 2]]).unwrap();
        let graph = hasse(&tri);
        assert_eq!(graph.vertices().len(), 7);
        assert_eq!(graph.core_edges().len(), 9);
    }

    #[test]
    fn augmented_example() {
        let cc = example_cc();
        let graph =
            augment_hasse(&cc, &[Selector::Adjacency(0, 1), Selector::Coadjacency(2, 1)])
                .unwrap();
        // A0,1 connects the two endpoint vertices; coA2,1 adds
        // nothing on a single 2-cell.
        assert_eq!(graph.augmented_edges().len(), 1);
        let ((ra, _), (rb, _), sel) = graph.augmented_edges()[0];
        assert_eq!((ra, rb), (0, 0));
        assert_eq!(sel, Selector::Adjacency(0, 1));

        let plain = augment_hasse(&cc, &[]).unwrap();
        assert!(plain.augmented_edges().is_empty());
    }

    #[test]
    fn incidence_selectors_duplicate_core_edges() {
        let tri = loop_cc(&Graph::cycle(3), &[vec![0, 1, 2]]).unwrap();
        let graph =
            augment_hasse(&tri, &[Selector::Incidence(0, 1), Selector::Incidence(1, 2)])
                .unwrap();
        let core: BTreeSet<_> = hasse(&tri).all_undirected_edges();
        assert_eq!(graph.all_undirected_edges(), core);
    }

    #[test]
    fn fingerprint_ignores_insertion_order() {
        let a = CombinatorialComplex::build(
            3,
            [(cell![0, 1], 1), (cell![0, 1, 2], 2)],
        )
        .unwrap();
        let b = CombinatorialComplex::build(
            3,
            [(cell![0, 1, 2], 2), (cell![0, 1], 1)],
        )
        .unwrap();
        assert_eq!(structure_fingerprint(&a), structure_fingerprint(&b));
    }

    #[test]
    fn fingerprint_detects_structural_change() {
        let cc = example_cc();
        let (skeleton, _) = cc.skeleton(1).to_cc().unwrap();
        assert_ne!(structure_fingerprint(&cc), structure_fingerprint(&skeleton));

        let c4 = loop_cc(&Graph::cycle(4), &[vec![0, 1, 2, 3]]).unwrap();
        let lattice = crate::lifting::lattice_cc(2, 2, 2, 1).unwrap();
        assert_ne!(structure_fingerprint(&c4), structure_fingerprint(&lattice));
    }

    #[test]
    fn representation_graph_examples() {
        let cc = example_cc();
        // Similarity from A1,1: the single 1-cell gives an edgeless
        // graph.
        let a11 = crate::neighborhoods::adjacency(&cc, 1, 1).unwrap();
        let (g, _) = representation_graph(&cc, 1, |x, y| {
            let (_, i) = cc.position_of(x).unwrap();
            let (_, j) = cc.position_of(y).unwrap();
            a11.matrix().get(i, j)
        });
        assert_eq!(g.vertex_count(), 1);
        assert!(g.edges().is_empty());

        // coA1,1 on a path connects the two edges through the shared
        // vertex.
        let path = Graph::path(3).to_cc();
        let co = coadjacency(&path, 1, 1).unwrap();
        let (g, w) = representation_graph(&path, 1, |x, y| {
            let (_, i) = path.position_of(x).unwrap();
            let (_, j) = path.position_of(y).unwrap();
            co.matrix().get(i, j)
        });
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(w, vec![1.0]);

        // Zero similarity: edgeless.
        let (g, _) = representation_graph(&path, 0, |_, _| 0.0);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn dot_export_mentions_cells() {
        let dot = hasse(&example_cc()).to_dot();
        assert!(dot.contains("digraph"));
        assert!(dot.contains("{0,1}"));
    }
}
