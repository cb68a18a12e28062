"""Smoke test for the pystarlab extension module.

Build and run with:

    maturin develop --release -m crates/python/Cargo.toml
    python python/smoke_test.py
"""

import math

import pystarlab as sl


def main():
    h = 1.0 / math.sqrt(2.0)
    t = sl.triangle([h, h, 0.0], [0.0, h, h], [h, 0.0, h])
    assert t["class"] == "W000"
    assert abs(t["S"] - math.pi / 2) < 1e-12
    assert abs(t["A"] - 8.0 * math.sqrt(2.0)) < 1e-10

    grid = sl.Grid(8, 16)
    assert len(grid) == 128
    assert abs(sum(grid.weights()) - 4.0 * math.pi) < 1e-12

    f = sl.Function.random(3, seed=1)
    g = sl.Function.random(3, seed=2)
    fg = sl.product(f, g, 2, grid)
    gf = sl.product(g, f, 2, grid)
    assert max(abs(a - b) for a, b in zip(fg.values, gf.values)) < 1e-10
    assert fg.parity_defect < 1e-12 * max(1.0, fg.sup_norm())

    odd = sl.Function.basis(2, 1, 0)
    assert sl.product(odd, g, 2, grid).sup_norm() < 1e-10

    try:
        sl.product(odd, odd, 2, grid, variant="restricted")
    except sl.ParityContractError:
        pass
    else:
        raise AssertionError("restricted product accepted an n-odd input")

    dim, entries = sl.structure_constants(2, 1, grid)
    assert dim == 4 and len(entries) == 64

    passed, checks = sl.verify(grid=(6, 12), l_max=2, ns=[1, 2], triangles=20,
                               kernel_triples=200, partition_samples=5000)
    assert passed, [c["name"] for c in checks if not c["passed"]]

    rows = sl.limit_scan(sl.Function.constant(1.0), sl.Function.constant(1.0), ks=[1, 2])
    assert rows[1][1] < rows[0][1]

    print("smoke test passed:", len(checks), "verify checks")


if __name__ == "__main__":
    main()
