import functools
import itertools

import numpy as np
import pytest

from torus4.complex import css_from_lattice
from torus4.homology import cup_logical_basis
from torus4.lattice import named_lattice
from torus4.symmetry import (StabilizerGroup, SymmetryError, Tableau, ZxDuality, automorphism_logical_actions,
                             dual_map, group_order, hadamard_fold, is_permutation_only, is_zx_duality,
                             label_permutation, lattice_automorphisms, lattice_isometries, logical_action,
                             phase_fold, preserves_stabilizers, symmetry_catalog, verify_catalog)
from conftest import identity_code, lattice_code

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PZ = np.diag([1, -1]).astype(complex)


def dense_pauli(x, z, q=0):
    m = np.eye(1, dtype=complex)
    for a, b in zip(x, z):
        m = np.kron(m, (PX if a else I2) @ (PZ if b else I2))
    return (1j ** q) * m


def tableau_of(u, n):
    """Tableau of a dense unitary by brute-force matching of conjugated Paulis."""
    rows = []
    for r in range(2 * n):
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        (x if r < n else z)[r % n] = 1
        img = u @ dense_pauli(x, z) @ u.conj().T
        for bits in itertools.product([0, 1], repeat=2 * n):
            for q in range(4):
                cand = dense_pauli(bits[:n], bits[n:], q)
                if np.allclose(img, cand):
                    rows.append((bits[:n], bits[n:], q))
    xs, zs, qs = zip(*rows)
    return Tableau(np.array(xs, dtype=np.uint8), np.array(zs, dtype=np.uint8), np.array(qs, dtype=np.int64))


H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S1 = np.diag([1, 1j])
CZ = np.diag([1, 1, 1, -1]).astype(complex)
CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def test_tableau_matches_dense_conjugation(rng):
    gates = [np.kron(H1, I2), np.kron(I2, S1), np.kron(S1, H1), CZ, CX]
    for _ in range(20):
        a, b = (gates[i] for i in rng.integers(0, len(gates), 2))
        ta, tb = tableau_of(a, 2), tableau_of(b, 2)
        assert ta.then(tb) == tableau_of(b @ a, 2)
        x, z, q = rng.integers(0, 2, 2), rng.integers(0, 2, 2), int(rng.integers(0, 4))
        ix, iz, iq = ta.apply(x, z, q)
        assert np.allclose(a @ dense_pauli(x, z, q) @ a.conj().T, dense_pauli(ix, iz, iq))
        assert ta.is_symplectic()


def test_phase_fold_matches_dense_circuit():
    tau = ZxDuality(np.array([1, 0, 2]), True)
    u = np.kron(CZ, S1)
    assert phase_fold(tau) == tableau_of(u, 3)


def test_hadamard_fold_matches_dense_circuit():
    tau = ZxDuality(np.array([1, 0]), True)
    swap = CX @ np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]]) @ CX
    u = swap @ np.kron(H1, H1)
    assert np.allclose(swap @ swap, np.eye(4))
    assert hadamard_fold(tau) == tableau_of(u, 2)


def test_phase_fold_requires_involution():
    with pytest.raises(SymmetryError):
        phase_fold(ZxDuality(np.array([1, 2, 0]), False))


def test_identity_action():
    h, code, basis = lattice_code("Det3")
    act = logical_action(Tableau.identity(code.n), basis, code)
    assert act == Tableau.identity(6)
    assert label_permutation(act) == list(range(6))


def test_group_order_small_cases():
    assert group_order([Tableau.identity(6)]).order == 1
    swap = Tableau.permutation([1, 0, 2, 3, 4, 5])
    assert group_order([swap]).order == 2
    cyc = Tableau.permutation([1, 2, 3, 4, 5, 0])
    assert group_order([swap, cyc]).order == 720
    big = group_order([swap, cyc], budget=10)
    assert big.order == 720 and big.method == "schreier-sims"


@pytest.fixture(scope="module")
def hadamard():
    return lattice_code("Hadamard")


@pytest.fixture(scope="module")
def catalog(hadamard):
    h, code, basis = hadamard
    return symmetry_catalog(h, code, basis)


def test_hadamard_isometries_and_automorphisms(hadamard):
    h, code, basis = hadamard
    assert len(lattice_isometries(h)) == 384
    autos = lattice_automorphisms(h)
    assert len(autos) == 192
    acts = automorphism_logical_actions(h, code, basis)
    assert len({a.key() for a in acts}) == 24
    assert all(is_permutation_only(a) for a in acts)


@pytest.mark.parametrize("name,count", [("Det3", 48), ("Det9", 12), ("Det16", 16), ("Det45", 32)])
def test_isometry_counts(name, count):
    assert len(lattice_isometries(named_lattice(name))) == count


def test_isometries_are_orthogonal_lattice_maps(hadamard):
    from torus4.lattice import hnf_reduce
    from torus4.symmetry import reduced_basis
    h = hadamard[0]
    b = reduced_basis(h).astype(float)
    keys = set()
    for r in lattice_isometries(h):
        assert np.allclose(r @ r.T, np.eye(4))
        img = b @ r
        assert np.allclose(img, np.round(img))
        assert hnf_reduce(np.round(img).astype(int).tolist()) == h
        keys.add(np.round(r * 4).astype(int).tobytes())
    assert len(keys) == 384


def test_catalog_gates_preserve_stabilizers(catalog, hadamard):
    _, code, basis = hadamard
    group = StabilizerGroup(code)
    kinds = [g.kind for g in catalog.gates]
    assert kinds.count("permutation") == 24
    assert kinds.count("hadamard_type") == 24
    assert kinds.count("phase_type") == 13
    assert len(catalog.dualities) == 3072
    assert sum(d.order2 for d in catalog.dualities) == 240
    for g in catalog.gates:
        assert preserves_stabilizers(g.clifford, code, group)
        if g.tau is not None:
            assert is_zx_duality(code, g.tau.tau)


def test_catalog_homomorphism(catalog, hadamard):
    _, code, basis = hadamard
    group = StabilizerGroup(code)
    rng = np.random.default_rng(99)
    for _ in range(100):
        i, j = rng.integers(0, len(catalog.gates), 2)
        a, b = catalog.gates[i], catalog.gates[j]
        both = logical_action([a, b], basis, code, group)
        assert both == catalog.actions[i].then(catalog.actions[j])


def test_hadamard_fold_squares_to_permutation(catalog, hadamard):
    _, code, basis = hadamard
    fold = next(g for g in catalog.gates if g.kind == "hadamard_type")
    act = logical_action([fold, fold], basis, code)
    assert is_permutation_only(act)


def test_catalog_json_verifies(catalog, hadamard):
    import json
    _, code, basis = hadamard
    data = json.loads(catalog.to_json())
    verify_catalog(data, code, basis)
    data["gates"][0]["logical_phase"] = [1 - v for v in data["gates"][0]["logical_phase"]]
    with pytest.raises(SymmetryError):
        verify_catalog(data, code, basis)


@functools.lru_cache(maxsize=None)
def standard_code():
    h = named_lattice("hypercubic-2")
    code = css_from_lattice(h)
    return h, code, cup_logical_basis(h, code)


def test_standard_lattice_dual_map_and_label_permutations():
    h, code, basis = standard_code()
    assert is_zx_duality(code, dual_map(h))
    acts = automorphism_logical_actions(h, code, basis)
    assert len(acts) == 384
    perms = [label_permutation(a) for a in acts]
    assert all(p is not None for p in perms)
    assert len({tuple(p) for p in perms}) == 24


def test_identity_lattice_catalog_runs():
    h, code, basis = identity_code()
    cat = symmetry_catalog(h, code, basis)
    assert len(cat.gates) >= 1


def test_group_order_with_phases():
    # a logical X on qubit 0 acts trivially on the symplectic part but flips Z_0's sign
    n = 6
    flip = Tableau.identity(n)
    flip.q[n] = 2
    assert group_order([flip]).order == 1
    assert group_order([flip], phases=True).order == 2
    swap = Tableau.permutation([1, 0, 2, 3, 4, 5])
    assert group_order([swap, flip], phases=True).order == 2 * 4
    h0 = Tableau.identity(n)
    h0.x[0, 0], h0.z[0, 0], h0.x[n, 0], h0.z[n, 0] = 0, 1, 1, 0
    # single-qubit Clifford group modulo phase has order 24; H and the sign flip generate 8 of them
    assert group_order([h0, flip], phases=True).order == 8
