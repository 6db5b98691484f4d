#!/usr/bin/env python3
"""Smoke test for the topocc_py extension module.

Builds are discovered from the cargo target directory; run

    cargo build -p topocc-py --release
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def import_module():
    candidates = [
        ROOT / "target" / "release" / "libtopocc_py.so",
        ROOT / "target" / "debug" / "libtopocc_py.so",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the module first: cargo build -p topocc-py --release")
    staging = Path(tempfile.mkdtemp(prefix="topocc_py_"))
    shutil.copy(built, staging / "topocc_py.so")
    sys.path.insert(0, str(staging))
    import topocc_py

    return topocc_py


def main():
    t = import_module()
    print(f"topocc_py {t.__version__}")

    # The running three-vertex example: one 1-cell and one 2-cell.
    cc = t.Complex(3, [([0, 1], 1), ([0, 1, 2], 2)])
    assert cc.dim() == 2
    assert cc.cell_count() == 5
    assert cc.rank_sizes() == [3, 1, 1]
    rows, cols, triplets = cc.matrix("B0,1")
    assert (rows, cols) == (3, 1)
    assert triplets == [(0, 0, 1.0), (1, 0, 1.0)]
    rows, cols, triplets = cc.matrix("A0,2")
    assert rows == cols == 3 and len(triplets) == 6
    assert "digraph" in cc.hasse_dot()

    # Fingerprints ignore insertion order.
    cc2 = t.Complex(3, [([0, 1, 2], 2), ([0, 1], 1)])
    assert cc.fingerprint() == cc2.fingerprint()

    # AGD of the 4-cycle is exactly one everywhere.
    c4 = t.Graph.cycle(4)
    assert c4.agd() == [1.0, 1.0, 1.0, 1.0]
    p3 = t.Graph.path(3)
    assert abs(p3.agd()[1] - 2.0 / 3.0) < 1e-12

    # Lifts.
    ball = t.lift_nhop(t.Graph.path(3), 2)
    assert ball.cells(2) == [[0, 1, 2]]
    square = t.lift_loops(t.Graph.cycle(4), [[0, 1, 2, 3]])
    assert square.rank_sizes() == [4, 4, 1]
    grid = t.lift_lattice(3, 3, 2, 1)
    assert grid.rank_sizes() == [9, 12, 4]
    k5 = t.lift_two_clique(t.Graph.complete(5))
    assert grid.fingerprint() != k5.fingerprint()

    # Mapper pooling on the path example: two components, one edge,
    # indicator rows of four vertices each.
    onehot = [[1.0 if i == j else 0.0 for j in range(6)] for i in range(6)]
    scalar = [i / 5.0 for i in range(6)]
    components, edges, rows = t.mog_pool_graph(
        t.Graph.path(6), onehot, intervals=2, overlap=0.3, scalar=scalar
    )
    assert components == [(0, [0, 1, 2, 3]), (1, [2, 3, 4, 5])]
    assert edges == [(0, 1)]
    assert [sum(r) for r in rows] == [4.0, 4.0]

    # A quick training run separates cycles from cliques.
    train_acc, test_acc = t.train_demo(per_class=5, epochs=80, seed=7)
    assert train_acc >= 0.9, f"train accuracy {train_acc}"
    assert test_acc >= 0.8, f"held-out accuracy {test_acc}"
    print(f"train accuracy {train_acc:.3f}, held-out accuracy {test_acc:.3f}")

    print("smoke test passed")


if __name__ == "__main__":
    main()
