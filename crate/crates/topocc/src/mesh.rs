//! Triangle meshes: OFF loading, lifting to complexes, geometric
//! feature extraction, and k-nearest-neighbor graphs on point clouds.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

use crate::cell::CellSet;
use crate::cochain::Cochain;
use crate::complex::CombinatorialComplex;
use crate::lifting::Graph;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("face {0} is not a triangle")]
    NonTriangleFace(usize),
    #[error("face {0} has zero area")]
    DegenerateFace(usize),
    #[error("edge {0}-{1} borders more than two faces")]
    NonManifoldEdge(usize, usize),
    #[error("k must satisfy 1 <= k < point count")]
    BadK,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A triangle mesh: positions and vertex-index triples.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub positions: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Unique undirected edges of the faces, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (a, c)])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn face_area_normal(p: &[[f64; 3]], [a, b, c]: [usize; 3]) -> (f64, [f64; 3]) {
    let u = [
        p[b][0] - p[a][0],
        p[b][1] - p[a][1],
        p[b][2] - p[a][2],
    ];
    let v = [
        p[c][0] - p[a][0],
        p[c][1] - p[a][1],
        p[c][2] - p[a][2],
    ];
    let n = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    (0.5 * len, n)
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if len == 0.0 {
        [0.0; 3]
    } else {
        [v[0] / len, v[1] / len, v[2] / len]
    }
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Parses an OFF mesh (header `OFF`, counts line, vertex lines, face
/// lines). Faces must be triangles; zero-area faces are rejected.
pub fn parse_off(text: &str) -> Result<Mesh, MeshError> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .peekable();
    match tokens.next() {
        Some("OFF") => {}
        other => {
            return Err(MeshError::Parse(format!(
                "expected OFF header, got {other:?}"
            )))
        }
    }
    let mut next_num = |what: &str| -> Result<f64, MeshError> {
        tokens
            .next()
            .ok_or_else(|| MeshError::Parse(format!("unexpected end of file reading {what}")))?
            .parse::<f64>()
            .map_err(|e| MeshError::Parse(format!("bad {what}: {e}")))
    };
    let nv = next_num("vertex count")? as usize;
    let nf = next_num("face count")? as usize;
    let _ne = next_num("edge count")?;
    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        positions.push([
            next_num("coordinate")?,
            next_num("coordinate")?,
            next_num("coordinate")?,
        ]);
    }
    let mut faces = Vec::with_capacity(nf);
    for f in 0..nf {
        let arity = next_num("face arity")? as usize;
        if arity != 3 {
            return Err(MeshError::NonTriangleFace(f));
        }
        let mut face = [0usize; 3];
        for slot in &mut face {
            let idx = next_num("face index")? as usize;
            if idx >= nv {
                return Err(MeshError::Parse(format!(
                    "face {f} references vertex {idx} of {nv}"
                )));
            }
            *slot = idx;
        }
        if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
            return Err(MeshError::DegenerateFace(f));
        }
        let (area, _) = face_area_normal(&positions, face);
        if area < 1e-12 {
            return Err(MeshError::DegenerateFace(f));
        }
        faces.push(face);
    }
    Ok(Mesh { positions, faces })
}

pub fn load_off(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    parse_off(&std::fs::read_to_string(path)?)
}

pub fn save_off(path: impl AsRef<Path>, mesh: &Mesh) -> Result<(), MeshError> {
    let mut out = String::from("OFF\n");
    out.push_str(&format!(
        "{} {} 0\n",
        mesh.vertex_count(),
        mesh.face_count()
    ));
    for p in &mesh.positions {
        out.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    for f in &mesh.faces {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Lifts a mesh to a complex: vertices at rank 0, unique face edges
/// at rank 1, face vertex sets at rank 2.
pub fn mesh_to_cc(mesh: &Mesh) -> CombinatorialComplex {
    let mut ranked = Vec::new();
    for &(a, b) in &mesh.edges() {
        ranked.push((CellSet::new([a, b]).unwrap(), 1));
    }
    for face in &mesh.faces {
        ranked.push((CellSet::new(face.iter().copied()).unwrap(), 2));
    }
    CombinatorialComplex::build(mesh.vertex_count(), ranked)
        .expect("triangle meshes lift to valid complexes")
}

/// Geometric cochains of a mesh, bound to the canonical cell order of
/// [`mesh_to_cc`]:
///
/// - vertices: position and area-weighted unit normal (6 values);
/// - edges: length, dihedral angle, the two opposite inner angles,
///   and per adjacent face the edge length over the mean of the other
///   two edge lengths (6 values; boundary edges get dihedral π and
///   zeros in the missing slots);
/// - faces: area, unit normal, and the three inner angles at the
///   vertices in ascending vertex order (7 values).
pub fn mesh_features(mesh: &Mesh) -> Result<(Cochain, Cochain, Cochain), MeshError> {
    let cc = mesh_to_cc(mesh);
    let p = &mesh.positions;

    // Canonical face order and per-face geometry.
    let face_cells = cc.cells(2);
    let mut face_data = Array2::zeros((face_cells.len(), 7));
    let mut face_normal = vec![[0.0; 3]; face_cells.len()];
    let mut face_area = vec![0.0; face_cells.len()];
    for (idx, cell) in face_cells.iter().enumerate() {
        let vs = cell.vertices();
        let tri = [vs[0], vs[1], vs[2]];
        let (area, normal) = face_area_normal(p, tri);
        let unit = normalize(normal);
        face_area[idx] = area;
        face_normal[idx] = unit;
        face_data[(idx, 0)] = area;
        for c in 0..3 {
            face_data[(idx, 1 + c)] = unit[c];
        }
        for (slot, &v) in tri.iter().enumerate() {
            let others: Vec<usize> = tri.iter().copied().filter(|&u| u != v).collect();
            face_data[(idx, 4 + slot)] = inner_angle(p, v, others[0], others[1]);
        }
    }

    // Vertex features: position plus area-weighted normal.
    let mut vertex_data = Array2::zeros((mesh.vertex_count(), 6));
    for v in 0..mesh.vertex_count() {
        for c in 0..3 {
            vertex_data[(v, c)] = p[v][c];
        }
        let mut acc = [0.0; 3];
        for (idx, cell) in face_cells.iter().enumerate() {
            if cell.contains(v) {
                for c in 0..3 {
                    acc[c] += face_area[idx] * face_normal[idx][c];
                }
            }
        }
        let unit = normalize(acc);
        for c in 0..3 {
            vertex_data[(v, 3 + c)] = unit[c];
        }
    }

    // Edge features. Adjacent faces in canonical face order.
    let mut edge_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (idx, cell) in face_cells.iter().enumerate() {
        let vs = cell.vertices();
        for (a, b) in [(vs[0], vs[1]), (vs[1], vs[2]), (vs[0], vs[2])] {
            edge_faces.entry((a, b)).or_default().push(idx);
        }
    }
    // Columns: [length, dihedral, angle_f1, angle_f2, ratio_f1,
    // ratio_f2] with the adjacent faces in canonical face order.
    let edge_cells = cc.cells(1);
    let mut edge_data = Array2::zeros((edge_cells.len(), 6));
    for (idx, cell) in edge_cells.iter().enumerate() {
        let (a, b) = (cell.vertices()[0], cell.vertices()[1]);
        let length = dist(&p[a], &p[b]);
        edge_data[(idx, 0)] = length;
        let adjacent = edge_faces.get(&(a, b)).cloned().unwrap_or_default();
        if adjacent.len() > 2 {
            return Err(MeshError::NonManifoldEdge(a, b));
        }
        edge_data[(idx, 1)] = match adjacent.as_slice() {
            [f1, f2] => dihedral_angle(
                p,
                (a, b),
                face_cells[*f1].vertices(),
                face_cells[*f2].vertices(),
            ),
            _ => std::f64::consts::PI,
        };
        for (slot, &f) in adjacent.iter().take(2).enumerate() {
            let vs = face_cells[f].vertices();
            let opposite = vs.iter().copied().find(|&v| v != a && v != b).unwrap();
            edge_data[(idx, 2 + slot)] = inner_angle(p, opposite, a, b);
            // Edge length over the mean of the remaining two edge
            // lengths; equilateral triangles give exactly one.
            let other = 0.5 * (dist(&p[opposite], &p[a]) + dist(&p[opposite], &p[b]));
            edge_data[(idx, 4 + slot)] = length / other;
        }
    }

    Ok((
        Cochain::new(0, vertex_data),
        Cochain::new(1, edge_data),
        Cochain::new(2, face_data),
    ))
}

/// Inner angle at `v` of the triangle `(v, a, b)`.
fn inner_angle(p: &[[f64; 3]], v: usize, a: usize, b: usize) -> f64 {
    let u = [
        p[a][0] - p[v][0],
        p[a][1] - p[v][1],
        p[a][2] - p[v][2],
    ];
    let w = [
        p[b][0] - p[v][0],
        p[b][1] - p[v][1],
        p[b][2] - p[v][2],
    ];
    let dot = u[0] * w[0] + u[1] * w[1] + u[2] * w[2];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let nw = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    (dot / (nu * nw)).clamp(-1.0, 1.0).acos()
}

/// Dihedral angle across the shared edge of two triangles, measured
/// so coplanar faces give π. Face windings are aligned to traverse
/// the shared edge in opposite directions before comparing normals.
fn dihedral_angle(p: &[[f64; 3]], (a, b): (usize, usize), f1: &[usize], f2: &[usize]) -> f64 {
    let oriented_normal = |face: &[usize], forward: bool| {
        let other = face.iter().copied().find(|&v| v != a && v != b).unwrap();
        let tri = if forward {
            [a, b, other]
        } else {
            [b, a, other]
        };
        let (_, n) = face_area_normal(p, tri);
        normalize(n)
    };
    let n1 = oriented_normal(f1, true);
    let n2 = oriented_normal(f2, false);
    let cos = (n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2]).clamp(-1.0, 1.0);
    std::f64::consts::PI - cos.acos()
}

/// Undirected union of the directed k-nearest-neighbor relation under
/// the Euclidean metric, ties broken toward lower indices.
pub fn knn_graph(points: &[[f64; 3]], k: usize) -> Result<Graph, MeshError> {
    let n = points.len();
    if k == 0 || k >= n {
        return Err(MeshError::BadK);
    }
    let mut edges = Vec::new();
    for i in 0..n {
        let mut by_dist: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (dist(&points[i], &points[j]), j))
            .collect();
        by_dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &(_, j) in by_dist.iter().take(k) {
            edges.push((i.min(j), i.max(j)));
        }
    }
    Ok(Graph::new(n, edges).expect("knn produces a simple graph"))
}
