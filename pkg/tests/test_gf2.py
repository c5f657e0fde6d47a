import numpy as np

from torus4 import gf2
from conftest import brute_rank


def test_rank_matches_brute_force(rng):
    for _ in range(30):
        m = rng.integers(0, 2, size=(rng.integers(1, 9), rng.integers(1, 12)), dtype=np.uint8)
        assert gf2.rank(m) == brute_rank(m)


def test_nullspace_and_solve(rng):
    for _ in range(20):
        m = rng.integers(0, 2, size=(6, 10), dtype=np.uint8)
        ns = gf2.nullspace(m)
        assert not gf2.matmul(m, ns.T).any()
        assert len(ns) == 10 - gf2.rank(m)
        x = rng.integers(0, 2, size=10, dtype=np.uint8)
        b = gf2.matmul(m, x.reshape(-1, 1)).ravel()
        sol = gf2.solve(m, b)
        assert sol is not None and np.array_equal(gf2.matmul(m, sol.reshape(-1, 1)).ravel(), b)


def test_solve_inconsistent():
    assert gf2.solve(np.zeros((2, 3), dtype=np.uint8), np.array([1, 0])) is None


def test_inverse(rng):
    while True:
        m = rng.integers(0, 2, size=(7, 7), dtype=np.uint8)
        if gf2.rank(m) == 7:
            break
    assert np.array_equal(gf2.matmul(m, gf2.inverse(m)), np.eye(7, dtype=np.uint8))


def test_echelon_and_complement(rng):
    m = rng.integers(0, 2, size=(5, 9), dtype=np.uint8)
    e = gf2.Echelon(9)
    for r in m:
        e.add(r)
    assert e.rank == gf2.rank(m)
    assert all(e.contains(r) for r in m)
    full = np.eye(9, dtype=np.uint8)
    comp = gf2.complement_basis(m, full)
    assert gf2.rank(np.vstack([m, comp])) == 9


def test_pack_roundtrip(rng):
    m = rng.integers(0, 2, size=(4, 130), dtype=np.uint8)
    assert np.array_equal(gf2.unpack_rows(gf2.pack_rows(m), 130), m)
