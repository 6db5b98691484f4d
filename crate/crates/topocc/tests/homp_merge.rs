//! Higher-order message passing must agree with its realization as a
//! composition of merge nodes: per neighborhood a push-forward onto
//! the target rank, inter-neighborhood folding through identity merge
//! nodes, and a final merge with the previous cochain.

mod common;

use common::{
    all_rank_inputs, fixture_ccs, max_abs_diff, neighborhood_pool, realize_via_merges,
};
use topocc::cochain::Aggregation;
use topocc::complex::CombinatorialComplex;
use topocc::neighborhoods::{adjacency, incidence, NeighborhoodMatrix};
use topocc::nn::{homp_step, HompAlpha, HompBeta, HompConfig, InterAggregation};

fn check_equivalence(
    cc: &CombinatorialComplex,
    neighborhoods: &[NeighborhoodMatrix],
    alphas: &[HompAlpha],
    cfg: &HompConfig,
    seed: u64,
    label: &str,
) {
    let cochains = all_rank_inputs(cc, 3, seed);
    let direct = homp_step(cc, neighborhoods, alphas, &cochains, cfg).unwrap();
    let realized = realize_via_merges(cc, neighborhoods, alphas, &cochains, cfg);
    for (rank, (a, b)) in direct.iter().zip(&realized).enumerate() {
        let diff = max_abs_diff(a, b);
        assert!(
            diff <= 1e-12,
            "{label}: rank {rank} deviates by {diff:e} between update rules and merges"
        );
    }
}

#[test]
fn homp_equals_merge_realization_across_configurations() {
    let fixtures = fixture_ccs();
    let chosen = ["paper", "loop_c4", "mesh_tetra"];
    let alphas = [
        HompAlpha::Neighbor,
        HompAlpha::NeighborTanh,
        HompAlpha::NeighborRelu,
    ];
    let betas = [HompBeta::Replace, HompBeta::Add, HompBeta::AddTanh];
    let intras = [Aggregation::Sum, Aggregation::Mean, Aggregation::Max];
    let mut configurations = 0;
    for (name, cc) in fixtures.iter().filter(|(n, _)| chosen.contains(&n.as_str())) {
        let pool = neighborhood_pool(cc);
        for (i, &alpha) in alphas.iter().enumerate() {
            for (j, &beta) in betas.iter().enumerate() {
                let cfg = HompConfig {
                    intra: intras[(i + j) % intras.len()],
                    inter: InterAggregation::Sum,
                    beta,
                };
                let picked: Vec<NeighborhoodMatrix> = pool
                    .iter()
                    .skip((i + j) % 2)
                    .step_by(2)
                    .cloned()
                    .collect();
                let alpha_list = vec![alpha; picked.len()];
                check_equivalence(
                    cc,
                    &picked,
                    &alpha_list,
                    &cfg,
                    (i * 7 + j * 13) as u64,
                    &format!("{name}/alpha{i}/beta{j}"),
                );
                configurations += 1;
            }
        }
    }
    assert!(configurations >= 20, "need at least 20 configurations");
}

#[test]
fn homp_equals_merge_realization_with_concat() {
    let cc = topocc::complex::example_cc();
    let pool = vec![
        adjacency(&cc, 0, 1).unwrap(),
        adjacency(&cc, 0, 2).unwrap(),
        incidence(&cc, 0, 1).unwrap(),
    ];
    let alphas = vec![HompAlpha::Neighbor; pool.len()];
    let cfg = HompConfig {
        intra: Aggregation::Sum,
        inter: InterAggregation::Concat,
        beta: HompBeta::Replace,
    };
    check_equivalence(&cc, &pool, &alphas, &cfg, 77, "paper/concat");
}
