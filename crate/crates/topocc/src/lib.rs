//! Combinatorial complexes and neural networks on them.
//!
//! A combinatorial complex is a vertex set together with a family of
//! non-empty cells carrying an order-preserving integer rank. This
//! crate builds the complexes, their neighborhood matrices
//! (incidence, adjacency, coadjacency, signed incidence, Hodge
//! Laplacian), lifting maps from graphs, meshes and image grids,
//! cochain operators (push-forward, merge, split, pooling), tensor
//! diagrams with convolutional and attention layers plus reverse-mode
//! gradients, higher-order message passing, mapper-on-graphs pooling,
//! and Hasse-graph reductions of all of the above.

pub mod cell;
pub mod cochain;
pub mod complex;
pub mod hasse;
pub mod io;
pub mod lifting;
pub mod mesh;
pub mod mog;
pub mod neighborhoods;
pub mod nn;
pub mod sparse;

pub use cell::CellSet;
pub use cochain::Cochain;
pub use complex::{CombinatorialComplex, SubCc};
pub use lifting::Graph;
pub use sparse::SparseMatrix;
