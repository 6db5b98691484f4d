//! Exit codes and end-to-end behavior of the remaining subcommands.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topocc"))
}

#[test]
fn unknown_subcommand_exits_two() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_exits_two() {
    let out = bin()
        .args(["train", "--config", "definitely-missing.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn self_loop_edge_list_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("bad.edges");
    std::fs::write(&edges, "0 0\n").unwrap();
    let out = bin()
        .args(["lift", "--method", "nhop"])
        .arg("--input")
        .arg(&edges)
        .arg("--out")
        .arg(dir.path().join("cc.txt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn paper_complex_incidence_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cc = dir.path().join("paper.txt");
    std::fs::write(&cc, "cc 3\ncell 1 0 1\ncell 2 0 1 2\n").unwrap();
    let out = bin()
        .arg("matrices")
        .arg("--cc")
        .arg(&cc)
        .args(["--which", "B0,1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "3 1 2\n0 0 1\n1 0 1\n"
    );
}

#[test]
fn lattice_lift_and_matrix_export() {
    let dir = tempfile::tempdir().unwrap();
    let cc = dir.path().join("lattice.txt");
    let out = bin()
        .args(["lift", "--method", "lattice"])
        .args(["--height", "3", "--width", "3", "--window", "2", "--stride", "1"])
        .arg("--out")
        .arg(&cc)
        .output()
        .unwrap();
    assert!(out.status.success());
    // 9 vertices + 12 edges + 4 blocks.
    assert_eq!(String::from_utf8_lossy(&out.stdout), "cells 25\n");

    let out = bin()
        .arg("matrices")
        .arg("--cc")
        .arg(&cc)
        .args(["--which", "A0,1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let header = String::from_utf8_lossy(&out.stdout);
    // 4-neighbor adjacency on 3x3: 24 directed entries.
    assert!(header.starts_with("9 9 24\n"), "{header}");
}

#[test]
fn reduce_hasse_verifies_and_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    std::fs::write(&edges, "0 1\n1 2\n2 0\n").unwrap();
    let cc = dir.path().join("cc.txt");
    assert!(bin()
        .args(["lift", "--method", "loops"])
        .arg("--input")
        .arg(&edges)
        .arg("--loops")
        .arg({
            let loops = dir.path().join("loops.txt");
            std::fs::write(&loops, "0 1 2\n").unwrap();
            loops
        })
        .arg("--out")
        .arg(&cc)
        .output()
        .unwrap()
        .status
        .success());

    let diagram = dir.path().join("d.txt");
    std::fs::write(
        &diagram,
        "node v 0 2\nnode e 1 2\nnode f 2 3\nedge v e B0,1^T conv tanh\nedge e f B1,2^T conv identity\n",
    )
    .unwrap();
    let dot = dir.path().join("h.dot");
    let out = bin()
        .arg("reduce-hasse")
        .arg("--cc")
        .arg(&cc)
        .arg("--diagram")
        .arg(&diagram)
        .arg("--dot")
        .arg(&dot)
        .args(["--seed", "7"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("reduction verified"), "{stdout}");
    let dot_text = std::fs::read_to_string(&dot).unwrap();
    assert!(dot_text.contains("digraph"));
    assert!(dot_text.contains("B0,1^T"));
}

#[test]
fn features_writes_three_cochains() {
    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("tri.off");
    std::fs::write(&off, "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
    let prefix = dir.path().join("tri").to_string_lossy().into_owned();
    let out = bin()
        .arg("features")
        .arg("--off")
        .arg(&off)
        .args(["--out-prefix", &prefix])
        .output()
        .unwrap();
    assert!(out.status.success());
    for suffix in ["vertex", "edge", "face"] {
        let path = format!("{prefix}.{suffix}.txt");
        assert!(std::path::Path::new(&path).exists(), "{path}");
    }
    // The face cochain round-trips through the text format.
    let face = std::fs::read_to_string(format!("{prefix}.face.txt")).unwrap();
    assert!(face.starts_with("2 7 1\n"));
}

#[test]
fn train_runs_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let diagram = dir.path().join("classify.txt");
    std::fs::write(
        &diagram,
        "\
node v 0 2
node e 1 4
node t 2 2
edge v e B0,1^T conv relu
edge e t B1,2^T conv identity
train lr 0.05 epochs 40 seed 99 loss cross-entropy output t
",
    )
    .unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(
        &config,
        "diagram classify.txt\ndataset cycles-cliques 4 8 10 0.1 7\n",
    )
    .unwrap();
    let out = bin()
        .arg("train")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("held-out accuracy"), "{stdout}");
}
