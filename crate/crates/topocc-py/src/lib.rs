//! Python bindings: complexes, graphs, lifting maps, neighborhood
//! matrices, mapper pooling, and a trainable classification demo.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use topocc::cochain::{Aggregation, Cochain};
use topocc::complex::CombinatorialComplex;
use topocc::hasse::{hasse, structure_fingerprint};
use topocc::lifting::{lattice_cc, loop_cc, n_hop_cc, path_cc, two_clique_cc, Graph};
use topocc::mog::{agd, mog_pool, normalize_scalar, MogCover};
use topocc::neighborhoods::Selector;
use topocc::nn::train::{
    cycle_clique_complexes, degree_features, evaluate_accuracy, DatasetItem, Target,
};
use topocc::nn::{compile_diagram, train, Dataset, DiagramSpec, Loss, TrainConfig};
use topocc::CellSet;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `(rows, cols, [(i, j, v), ...])` of a sparse matrix.
type Triplets = (usize, usize, Vec<(usize, usize, f64)>);

/// `(components, mapper edges, pooled feature rows)`.
type MogSummary = (Vec<(usize, Vec<usize>)>, Vec<(usize, usize)>, Vec<Vec<f64>>);

/// A combinatorial complex: vertices plus ranked cells.
#[pyclass(name = "Complex")]
struct PyComplex {
    inner: CombinatorialComplex,
}

#[pymethods]
impl PyComplex {
    /// Build from a vertex count and `(cell, rank)` pairs; rank-0
    /// singletons are inserted automatically.
    #[new]
    fn new(vertex_count: usize, cells: Vec<(Vec<usize>, usize)>) -> PyResult<Self> {
        let ranked: Vec<(CellSet, usize)> = cells
            .into_iter()
            .map(|(verts, rank)| CellSet::new(verts).map(|c| (c, rank)))
            .collect::<Result<_, _>>()
            .map_err(value_error)?;
        let inner = CombinatorialComplex::build(vertex_count, ranked).map_err(value_error)?;
        Ok(Self { inner })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn cell_count(&self) -> usize {
        self.inner.cell_count()
    }

    /// Number of cells at each rank.
    fn rank_sizes(&self) -> Vec<usize> {
        (0..=self.inner.dim())
            .map(|r| self.inner.rank_size(r))
            .collect()
    }

    /// Cells of one rank in canonical order.
    fn cells(&self, rank: usize) -> Vec<Vec<usize>> {
        self.inner
            .cells(rank)
            .iter()
            .map(|c| c.vertices().to_vec())
            .collect()
    }

    /// Sparse triplets `(rows, cols, [(i, j, v), ...])` of a
    /// neighborhood matrix selector such as `"B0,1"`, `"B0,1^T"`,
    /// `"A0,1"`, `"coA2,1"`, `"sB0"`, or `"Id1"`.
    fn matrix(&self, selector: &str) -> PyResult<Triplets> {
        let sel: Selector = selector.parse().map_err(value_error)?;
        let m = sel.resolve(&self.inner).map_err(value_error)?;
        Ok((m.rows(), m.cols(), m.matrix().triplets().collect()))
    }

    /// DOT rendering of the Hasse graph.
    fn hasse_dot(&self) -> String {
        hasse(&self.inner).to_dot()
    }

    /// Canonical structure fingerprint; equal strings mean equal
    /// incidence structure.
    fn fingerprint(&self) -> String {
        structure_fingerprint(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Complex(vertices={}, cells={}, dim={})",
            self.inner.vertex_count(),
            self.inner.cell_count(),
            self.inner.dim()
        )
    }
}

/// An undirected simple graph.
#[pyclass(name = "Graph")]
struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(Self {
            inner: Graph::new(vertex_count, edges).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn cycle(n: usize) -> Self {
        Self {
            inner: Graph::cycle(n),
        }
    }

    #[staticmethod]
    fn path(n: usize) -> Self {
        Self {
            inner: Graph::path(n),
        }
    }

    #[staticmethod]
    fn complete(n: usize) -> Self {
        Self {
            inner: Graph::complete(n),
        }
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    /// Average geodesic distance per vertex.
    fn agd(&self) -> Vec<f64> {
        agd(&self.inner)
    }

    /// The graph as a one-dimensional complex.
    fn to_complex(&self) -> PyComplex {
        PyComplex {
            inner: self.inner.to_cc(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={})",
            self.inner.vertex_count(),
            self.inner.edges().len()
        )
    }
}

/// n-hop lift: breadth-first balls become rank-n cells.
#[pyfunction]
fn lift_nhop(graph: &PyGraph, n: usize) -> PyResult<PyComplex> {
    if n < 2 {
        return Err(value_error("n must be at least 2"));
    }
    Ok(PyComplex {
        inner: n_hop_cc(&graph.inner, n).map_err(value_error)?,
    })
}

/// Loop lift: each cycle becomes a 2-cell.
#[pyfunction]
fn lift_loops(graph: &PyGraph, loops: Vec<Vec<usize>>) -> PyResult<PyComplex> {
    Ok(PyComplex {
        inner: loop_cc(&graph.inner, &loops).map_err(value_error)?,
    })
}

/// Path lift: each walk of at least two edges becomes a 2-cell.
#[pyfunction]
fn lift_paths(graph: &PyGraph, paths: Vec<Vec<usize>>) -> PyResult<PyComplex> {
    Ok(PyComplex {
        inner: path_cc(&graph.inner, &paths).map_err(value_error)?,
    })
}

/// 2-clique lift: all triangles become 2-cells.
#[pyfunction]
fn lift_two_clique(graph: &PyGraph) -> PyResult<PyComplex> {
    Ok(PyComplex {
        inner: two_clique_cc(&graph.inner).map_err(value_error)?,
    })
}

/// Image-grid lift: pixels, 4-neighbor edges, and window blocks.
#[pyfunction]
fn lift_lattice(height: usize, width: usize, window: usize, stride: usize) -> PyResult<PyComplex> {
    Ok(PyComplex {
        inner: lattice_cc(height, width, window, stride).map_err(value_error)?,
    })
}

/// Mapper-on-graphs pooling. `scalar` defaults to the normalized AGD.
/// Returns `(components, mog_edges, pooled_rows)` where components
/// are `(interval, vertices)` pairs.
#[pyfunction]
#[pyo3(signature = (graph, features, intervals, overlap, scalar=None, agg="sum"))]
fn mog_pool_graph(
    graph: &PyGraph,
    features: Vec<Vec<f64>>,
    intervals: usize,
    overlap: f64,
    scalar: Option<Vec<f64>>,
    agg: &str,
) -> PyResult<MogSummary> {
    let n = graph.inner.vertex_count();
    if features.len() != n {
        return Err(value_error("one feature row per vertex required"));
    }
    let d = features.first().map(Vec::len).unwrap_or(0);
    if features.iter().any(|row| row.len() != d) {
        return Err(value_error("feature rows must have equal length"));
    }
    let data = ndarray::Array2::from_shape_fn((n, d), |(i, j)| features[i][j]);
    let h0 = Cochain::new(0, data);
    let f = match scalar {
        Some(values) => {
            if values.len() != n {
                return Err(value_error("one scalar per vertex required"));
            }
            values
        }
        None => normalize_scalar(&agd(&graph.inner)),
    };
    let aggregation = match agg {
        "sum" => Aggregation::Sum,
        "mean" => Aggregation::Mean,
        "max" => Aggregation::Max,
        other => return Err(value_error(format!("unknown aggregation `{other}`"))),
    };
    let cover = MogCover::uniform(intervals, overlap).map_err(value_error)?;
    let (result, pooled) =
        mog_pool(&graph.inner, &h0, &f, &cover, aggregation).map_err(value_error)?;
    let rows = pooled
        .data()
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    Ok((result.components, result.mog_edges, rows))
}

/// Trains the synthetic cycle-versus-clique classifier and returns
/// `(final_train_accuracy, held_out_accuracy)`.
#[pyfunction]
#[pyo3(signature = (per_class=10, epochs=100, seed=7))]
fn train_demo(per_class: usize, epochs: usize, seed: u64) -> PyResult<(f64, f64)> {
    use rand::SeedableRng;
    let spec = DiagramSpec::parse(
        "\
node v 0 2
node e 1 4
node t 2 2
edge v e B0,1^T conv relu
edge e t B1,2^T conv identity
",
    )
    .map_err(value_error)?;
    let complexes = cycle_clique_complexes(per_class, 8, 12, seed);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);
    let mut items = Vec::new();
    for (cc, label) in complexes {
        let diagram = compile_diagram(&spec, &cc, seed).map_err(value_error)?;
        let inputs: HashMap<String, Cochain> =
            [("v".to_string(), degree_features(&cc, 0.1, &mut rng))].into();
        items.push(DatasetItem {
            diagram,
            inputs,
            target: Target::Class(label),
        });
    }
    let mut test_items = Vec::new();
    let mut train_items = Vec::new();
    for (i, item) in items.drain(..).enumerate() {
        if i % 5 == 4 {
            test_items.push(item);
        } else {
            train_items.push(item);
        }
    }
    let train_set = Dataset::new(train_items);
    let test_set = Dataset::new(test_items);
    let mut params = train_set.items[0].diagram.params().clone();
    let cfg = TrainConfig {
        lr: 0.05,
        epochs,
        seed,
        loss: Loss::CrossEntropy,
        output: "t".into(),
    };
    let history = train(&mut params, &train_set, &cfg).map_err(value_error)?;
    let train_acc = history
        .last()
        .and_then(|s| s.accuracy)
        .unwrap_or(f64::NAN);
    let test_acc = evaluate_accuracy(&params, &test_set, "t").map_err(value_error)?;
    Ok((train_acc, test_acc))
}

#[pymodule]
fn topocc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyComplex>()?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(lift_nhop, m)?)?;
    m.add_function(wrap_pyfunction!(lift_loops, m)?)?;
    m.add_function(wrap_pyfunction!(lift_paths, m)?)?;
    m.add_function(wrap_pyfunction!(lift_two_clique, m)?)?;
    m.add_function(wrap_pyfunction!(lift_lattice, m)?)?;
    m.add_function(wrap_pyfunction!(mog_pool_graph, m)?)?;
    m.add_function(wrap_pyfunction!(train_demo, m)?)?;
    Ok(())
}
