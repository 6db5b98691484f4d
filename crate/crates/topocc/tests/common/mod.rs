//! Shared fixtures for the integration suites: a zoo of small
//! complexes built through every lifting path, plus input builders
//! and the merge-node realization oracle.
#![allow(dead_code)]

use std::collections::HashMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topocc::cochain::{
    merge_node, push_forward, Activation, Alpha, Cochain, Combine,
};
use topocc::complex::{example_cc, CombinatorialComplex};
use topocc::neighborhoods::{adjacency, coadjacency, incidence, NeighborhoodMatrix, Selector};
use topocc::nn::{HompAlpha, HompBeta, HompConfig, InterAggregation};
use topocc::lifting::{
    coface_cc, lattice_cc, loop_cc, n_hop_cc, path_cc, two_clique_cc, Graph,
};
use topocc::mesh::{mesh_to_cc, Mesh};
use topocc::mog::{agd, mog, normalize_scalar, MogCover};
use topocc::CellSet;

pub fn two_triangle_sc() -> CombinatorialComplex {
    CombinatorialComplex::build(
        4,
        [
            (CellSet::new([0, 1]).unwrap(), 1),
            (CellSet::new([0, 2]).unwrap(), 1),
            (CellSet::new([1, 2]).unwrap(), 1),
            (CellSet::new([1, 3]).unwrap(), 1),
            (CellSet::new([2, 3]).unwrap(), 1),
            (CellSet::new([0, 1, 2]).unwrap(), 2),
            (CellSet::new([1, 2, 3]).unwrap(), 2),
        ],
    )
    .unwrap()
}

pub fn tetrahedron_mesh() -> Mesh {
    Mesh {
        positions: vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ],
        faces: vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
    }
}

/// The fixture zoo: every lifting path is represented. All complexes
/// have dimension at least one; most have dimension two or three.
pub fn fixture_ccs() -> Vec<(String, CombinatorialComplex)> {
    let mut out: Vec<(String, CombinatorialComplex)> = vec![
        ("paper".into(), example_cc()),
        (
            "loop_c4".into(),
            loop_cc(&Graph::cycle(4), &[vec![0, 1, 2, 3]]).unwrap(),
        ),
        (
            "loop_c3".into(),
            loop_cc(&Graph::cycle(3), &[vec![0, 1, 2]]).unwrap(),
        ),
        (
            "path_based".into(),
            path_cc(&Graph::path(4), &[vec![0, 1, 2], vec![1, 2, 3]]).unwrap(),
        ),
        ("n_hop".into(), n_hop_cc(&Graph::path(5), 2).unwrap()),
        ("coface".into(), coface_cc(&two_triangle_sc()).unwrap()),
        ("lattice".into(), lattice_cc(3, 3, 2, 1).unwrap()),
        ("mesh_tetra".into(), mesh_to_cc(&tetrahedron_mesh())),
        ("clique_k5".into(), two_clique_cc(&Graph::complete(5)).unwrap()),
        ("two_triangles".into(), two_triangle_sc()),
    ];
    // Mapper augmentation of a path graph.
    let g = Graph::path(6);
    let f: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
    let cover = MogCover::from_intervals(vec![(0.0, 0.65), (0.35, 1.0)]).unwrap();
    out.push(("mog_path".into(), mog(&g, &f, &cover).unwrap().augmented_cc));
    // Mapper augmentation of a cycle with the AGD of a perturbed
    // metric graph.
    let g = Graph::new(
        8,
        [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 6),
            (6, 7),
            (7, 0),
            (1, 5),
        ],
    )
    .unwrap();
    let f = normalize_scalar(&agd(&g));
    let cover = MogCover::uniform(3, 0.4).unwrap();
    out.push(("mog_cycle".into(), mog(&g, &f, &cover).unwrap().augmented_cc));
    out
}

/// Seeded input cochains for the listed node/rank/dim triples.
pub fn random_inputs(
    cc: &CombinatorialComplex,
    specs: &[(&str, usize, usize)],
    seed: u64,
) -> HashMap<String, Cochain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    specs
        .iter()
        .map(|&(id, rank, dim)| {
            let data = Array2::from_shape_fn((cc.rank_size(rank), dim), |_| {
                rng.random_range(-1.0..1.0)
            });
            (id.to_string(), Cochain::new(rank, data))
        })
        .collect()
}

/// Largest absolute entry difference between two cochains.
pub fn max_abs_diff(a: &Cochain, b: &Cochain) -> f64 {
    assert_eq!(a.data().raw_dim(), b.data().raw_dim(), "shape mismatch");
    a.data()
        .iter()
        .zip(b.data().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// A seeded rank-preserving permutation per rank, as gather maps.
pub fn random_permutations(cc: &CombinatorialComplex, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    (0..=cc.dim())
        .map(|rank| {
            let n = cc.rank_size(rank);
            let mut perm: Vec<usize> = (0..n).collect();
            // Fisher-Yates.
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            perm
        })
        .collect()
}

/// Seeded ±1 signs per rank with rank 0 fixed to all ones.
pub fn random_signs(cc: &CombinatorialComplex, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..=cc.dim())
        .map(|rank| {
            (0..cc.rank_size(rank))
                .map(|_| {
                    if rank == 0 || rng.random_bool(0.5) {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Applies a gather permutation to cochain rows: row `i` of the
/// result is row `perm[i]` of the input.
pub fn permute_cochain(h: &Cochain, perm: &[usize]) -> Cochain {
    let data = Array2::from_shape_fn((h.rows(), h.dim()), |(i, j)| h.data()[(perm[i], j)]);
    Cochain::new(h.rank(), data)
}

/// Applies a diagonal ±1 action to cochain rows.
pub fn sign_cochain(h: &Cochain, signs: &[f64]) -> Cochain {
    let data = Array2::from_shape_fn((h.rows(), h.dim()), |(i, j)| signs[i] * h.data()[(i, j)]);
    Cochain::new(h.rank(), data)
}

pub fn as_alpha(a: HompAlpha) -> Alpha {
    match a {
        HompAlpha::Neighbor => Alpha::Identity,
        HompAlpha::NeighborTanh => Alpha::Tanh,
        HompAlpha::NeighborRelu => Alpha::Relu,
    }
}

/// The merge-node realization: push every neighborhood forward onto
/// its target rank, fold the per-neighborhood cochains through
/// identity merge nodes, and merge the result with the input cochain
/// according to the update rule.
pub fn realize_via_merges(
    cc: &CombinatorialComplex,
    neighborhoods: &[NeighborhoodMatrix],
    alphas: &[HompAlpha],
    cochains: &[Cochain],
    cfg: &HompConfig,
) -> Vec<Cochain> {
    let mut out = Vec::new();
    for rank in 0..=cc.dim() {
        let ids: Vec<usize> = neighborhoods
            .iter()
            .enumerate()
            .filter(|(_, n)| n.codomain_rank() == rank)
            .map(|(k, _)| k)
            .collect();
        if ids.is_empty() {
            out.push(cochains[rank].clone());
            continue;
        }
        let identity = Selector::Identity(rank).resolve(cc).unwrap();
        let pushed: Vec<Cochain> = ids
            .iter()
            .map(|&k| {
                push_forward(
                    &neighborhoods[k],
                    &cochains[neighborhoods[k].domain_rank()],
                    cfg.intra,
                    as_alpha(alphas[k]),
                )
                .unwrap()
            })
            .collect();
        let combine = match cfg.inter {
            InterAggregation::Sum => Combine::Sum,
            InterAggregation::Concat => Combine::Concat,
        };
        let mut message = pushed[0].clone();
        for m in &pushed[1..] {
            message = merge_node(&identity, &identity, &message, m, combine, Activation::Identity)
                .unwrap();
        }
        let updated = match cfg.beta {
            HompBeta::Replace => message,
            HompBeta::Add => merge_node(
                &identity,
                &identity,
                &cochains[rank],
                &message,
                Combine::Sum,
                Activation::Identity,
            )
            .unwrap(),
            HompBeta::AddTanh => merge_node(
                &identity,
                &identity,
                &cochains[rank],
                &message,
                Combine::Sum,
                Activation::Tanh,
            )
            .unwrap(),
        };
        out.push(updated);
    }
    out
}

pub fn all_rank_inputs(cc: &CombinatorialComplex, dim: usize, seed: u64) -> Vec<Cochain> {
    (0..=cc.dim())
        .map(|r| {
            let key = format!("r{r}");
            random_inputs(cc, &[(key.as_str(), r, dim)], seed.wrapping_add(r as u64))
                .remove(&key)
                .unwrap()
        })
        .collect()
}

/// Every structural neighborhood matrix the complex supports.
pub fn neighborhood_pool(cc: &CombinatorialComplex) -> Vec<NeighborhoodMatrix> {
    let mut out = Vec::new();
    for r in 0..cc.dim() {
        out.push(incidence(cc, r, r + 1).unwrap());
        out.push(incidence(cc, r, r + 1).unwrap().transpose());
        out.push(adjacency(cc, r, 1).unwrap());
    }
    for r in 1..=cc.dim() {
        out.push(coadjacency(cc, r, 1).unwrap());
    }
    out
}
