"""Lattice automorphisms, ZX dualities, fold-transversal gates and their logical action.

Cliffords are stored as tableaux: row ``r < n`` is the image of ``X_r`` and row
``n + r`` the image of ``Z_r``, each written as ``i^q X(x) Z(z)`` with ``q`` mod 4.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .complex import CssCode
from .gf2 import as_f2, nullspace
from .homology import LogicalBasis
from .lattice import DIM, DIRECTION_SETS, HnfMatrix, Torus, hnf_reduce


class SymmetryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Pauli / Clifford tableaux


@dataclass
class Tableau:
    """Clifford on ``n`` qubits, as images of the single-qubit Paulis."""

    x: np.ndarray  # (2n, n) uint8
    z: np.ndarray  # (2n, n) uint8
    q: np.ndarray  # (2n,) int64, phase exponent of i

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @classmethod
    def identity(cls, n: int) -> "Tableau":
        eye = np.eye(n, dtype=np.uint8)
        zero = np.zeros((n, n), dtype=np.uint8)
        return cls(np.vstack([eye, zero]), np.vstack([zero, eye]), np.zeros(2 * n, dtype=np.int64))

    @classmethod
    def permutation(cls, perm) -> "Tableau":
        """Qubit ``i`` moves to ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        n = len(perm)
        p = np.zeros((n, n), dtype=np.uint8)
        p[np.arange(n), perm] = 1
        zero = np.zeros_like(p)
        return cls(np.vstack([p, zero]), np.vstack([zero, p]), np.zeros(2 * n, dtype=np.int64))

    def apply_many(self, x, z, q=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Images of the rows ``i^q X(x) Z(z)``.

        Writing ``P`` for the (Paulis, 2n) selection of generator images, the
        phase gains ``2 * sum_{r<s} z_r . x_s`` over selected pairs, i.e. the
        quadratic form of the strictly upper triangle of ``Z X^T``.
        """
        # float64 products are exact for these small integer counts and use BLAS
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        z = np.atleast_2d(np.asarray(z, dtype=np.float64))
        q = np.zeros(len(x), dtype=np.int64) if q is None else np.asarray(q, dtype=np.int64).reshape(-1)
        sel = np.hstack([x, z])
        gx, gz, upper = self._float_parts()
        cross = ((sel @ upper) * sel).sum(axis=1).astype(np.int64)
        qq = (q + (sel @ self.q.astype(np.float64)).astype(np.int64) + 2 * cross) % 4
        return ((sel @ gx).astype(np.int64) % 2).astype(np.uint8), ((sel @ gz).astype(np.int64) % 2).astype(np.uint8), qq

    def _float_parts(self):
        cache = self.__dict__.get("_cache")
        if cache is None:
            gx, gz = self.x.astype(np.float64), self.z.astype(np.float64)
            cache = (gx, gz, np.triu((gz @ gx.T) % 2, 1))
            self.__dict__["_cache"] = cache
        return cache

    def apply(self, x, z, q: int = 0) -> tuple[np.ndarray, np.ndarray, int]:
        """Image of ``i^q X(x) Z(z)``."""
        ix, iz, iq = self.apply_many(x, z, [q])
        return ix[0], iz[0], int(iq[0])

    def then(self, other: "Tableau") -> "Tableau":
        """The Clifford that applies ``self`` first and ``other`` second."""
        return Tableau(*other.apply_many(self.x, self.z, self.q))

    @property
    def symplectic(self) -> np.ndarray:
        return np.hstack([self.x, self.z]).astype(np.uint8)

    @property
    def phase_bits(self) -> np.ndarray:
        """Sign bit of each image relative to its Hermitian form ``i^{x.z} X(x)Z(z)``."""
        xz = (self.x.astype(np.int64) * self.z).sum(axis=1)
        d = (self.q - xz) % 4
        if (d % 2).any():
            raise SymmetryError("tableau row is not Hermitian")
        return (d // 2).astype(np.uint8)

    def is_symplectic(self) -> bool:
        m = self.symplectic.astype(np.int64)
        n = self.n
        omega = np.block([[np.zeros((n, n), np.int64), np.eye(n, dtype=np.int64)],
                          [np.eye(n, dtype=np.int64), np.zeros((n, n), np.int64)]])
        return bool(((m @ omega @ m.T) % 2 == omega).all())

    def __eq__(self, other) -> bool:
        return (isinstance(other, Tableau) and np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)
                and np.array_equal(self.q % 4, other.q % 4))

    def key(self) -> bytes:
        return self.x.tobytes() + self.z.tobytes() + (self.q % 4).astype(np.int8).tobytes()


LogicalAction = Tableau


# ---------------------------------------------------------------------------
# space group


@dataclass(frozen=True)
class SpaceGroupElement:
    M: tuple[tuple[int, ...], ...]
    b: tuple[int, ...] = (0, 0, 0, 0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.M, dtype=np.int64)

    def to_dict(self) -> dict:
        return {"M": [list(r) for r in self.M], "b": list(self.b)}


def signed_permutation_matrices() -> list[np.ndarray]:
    out = []
    for perm in itertools.permutations(range(DIM)):
        for signs in itertools.product((1, -1), repeat=DIM):
            m = np.zeros((DIM, DIM), dtype=np.int64)
            m[np.arange(DIM), perm] = signs
            out.append(m)
    return out


def preserves_lattice(h: HnfMatrix, m: np.ndarray) -> bool:
    return hnf_reduce(h.to_array() @ m) == h


def _canonical_points(h: HnfMatrix, pts: np.ndarray) -> np.ndarray:
    a = h.to_array()
    x = pts.astype(np.int64).copy()
    for i in range(DIM):
        q = np.floor_divide(x[:, i], a[i, i])
        x -= q[:, None] * a[i][None, :]
    return x


def _point_index(h: HnfMatrix, pts: np.ndarray) -> np.ndarray:
    idx = np.zeros(len(pts), dtype=np.int64)
    for i, r in enumerate(h.diagonal):
        idx = idx * r + pts[:, i]
    return idx


def cell_permutation(h: HnfMatrix, g: SpaceGroupElement, k: int = 2, torus: Torus | None = None) -> np.ndarray:
    """Index map of ``k``-cells under ``x -> x M + b``."""
    t = torus or Torus(h)
    m = g.matrix
    perm_axis = np.argmax(np.abs(m), axis=1)
    sign = m[np.arange(DIM), perm_axis]
    pts = np.array(t.points, dtype=np.int64)
    image = pts @ m + np.array(g.b, dtype=np.int64)
    out = np.empty(t.num_cells(k), dtype=np.int64)
    for s, dirs in enumerate(DIRECTION_SETS[k]):
        new_dirs = tuple(sorted(int(perm_axis[d]) for d in dirs))
        shift = np.zeros(DIM, dtype=np.int64)
        for d in dirs:
            if sign[d] < 0:
                shift[perm_axis[d]] -= 1
        base = _canonical_points(h, image + shift)
        out[s * t.det:(s + 1) * t.det] = DIRECTION_SETS[k].index(new_dirs) * t.det + _point_index(h, base)
    return out


def lattice_automorphisms(h: HnfMatrix, translations: bool = False) -> list[SpaceGroupElement]:
    """Signed permutations preserving the lattice, optionally times all canonical translations.

    Without translations this is the point group (384 elements on the Hadamard
    lattice).  Distinct elements always act differently on cells.
    """
    t = Torus(h)
    mats = [m for m in signed_permutation_matrices() if preserves_lattice(h, m)]
    shifts = t.points if translations else ((0,) * DIM,)
    out, seen = [], set()
    for m in mats:
        for b in shifts:
            g = SpaceGroupElement(tuple(map(tuple, m.tolist())), tuple(int(v) for v in b))
            key = tuple(cell_permutation(h, g, 1, t)) + tuple(cell_permutation(h, g, 2, t))
            if key in seen:
                continue
            seen.add(key)
            out.append(g)
    return out


def _short_vectors(h: HnfMatrix, bound: int) -> np.ndarray:
    """All nonzero lattice vectors of squared norm <= ``bound``."""
    r = int(np.floor(np.sqrt(bound)))
    axis = np.arange(-r, r + 1)
    grid = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), -1).reshape(-1, DIM)
    grid = grid[(grid ** 2).sum(axis=1) <= bound]
    grid = grid[(_canonical_points(h, grid) == 0).all(axis=1) & grid.any(axis=1)]
    return grid[np.argsort((grid ** 2).sum(axis=1), kind="stable")]


def reduced_basis(h: HnfMatrix, max_bound: int = 400) -> np.ndarray:
    """A basis of short vectors, found by growing the norm bound until they span the lattice."""
    bound = 1
    while bound <= max_bound:
        vecs = _short_vectors(h, bound)
        basis: list[np.ndarray] = []
        for v in vecs:
            trial = np.array(basis + [v])
            if np.linalg.matrix_rank(trial) == len(trial):
                basis.append(v)
            if len(basis) == DIM:
                break
        if len(basis) == DIM and abs(round(np.linalg.det(np.array(basis)))) == h.det:
            return np.array(basis, dtype=np.int64)
        bound *= 2
    raise SymmetryError("no short basis within the norm bound")


def lattice_isometries(h: HnfMatrix) -> list[np.ndarray]:
    """Orthogonal maps of R^4 sending the lattice to itself, as rational 4x4 matrices.

    Found by mapping a short basis onto lattice vectors with the same Gram
    matrix; they need not preserve the unit-cube cell structure.
    """
    b = reduced_basis(h)
    gram = b @ b.T
    vecs = _short_vectors(h, int(gram.diagonal().max()))
    norms = (vecs ** 2).sum(axis=1)
    cand = [vecs[norms == gram[i, i]] for i in range(DIM)]
    binv = np.linalg.inv(b.astype(float))
    out = []

    def extend(chosen):
        i = len(chosen)
        if i == DIM:
            r = binv @ np.array(chosen, dtype=float)
            out.append(r)
            return
        for v in cand[i]:
            if all(int(v @ chosen[j]) == gram[i, j] for j in range(i)):
                extend(chosen + [v])

    extend([])
    return out


def qubit_permutation(h: HnfMatrix, g: SpaceGroupElement, torus: Torus | None = None) -> np.ndarray:
    return cell_permutation(h, g, 2, torus)


# ---------------------------------------------------------------------------
# ZX dualities


@dataclass
class ZxDuality:
    tau: np.ndarray
    order2: bool
    provenance: SpaceGroupElement | None = None

    def compose(self, other: "ZxDuality") -> np.ndarray:
        """Qubit permutation ``other`` after ``self``."""
        return other.tau[self.tau]


def _support_array(m: np.ndarray) -> np.ndarray:
    """Row supports as a (rows, weight) array; all rows share one weight here."""
    m = as_f2(m)
    w = m.sum(axis=1)
    if len(set(w.tolist())) != 1:
        raise SymmetryError("stabilizers of unequal weight")
    return np.nonzero(m)[1].reshape(len(m), int(w[0]))


def _canonical_supports(s: np.ndarray) -> np.ndarray:
    if s.shape[1] == 0:
        return s
    s = np.sort(s, axis=1)
    return s[np.lexsort(s.T[::-1])]


def is_zx_duality(code: CssCode, tau) -> bool:
    """Supports of X checks map onto supports of Z checks as sets, and vice versa."""
    tau = np.asarray(tau)
    sx, sz = _support_array(code.hx), _support_array(code.hz)
    if sx.shape != sz.shape:
        return False
    return (np.array_equal(_canonical_supports(tau[sx]), _canonical_supports(sz))
            and np.array_equal(_canonical_supports(tau[sz]), _canonical_supports(sx)))


def dual_map(h: HnfMatrix, torus: Torus | None = None) -> np.ndarray:
    """Face permutation from the Poincare dual identification ``(D, p) -> (D^c, p - sum_{d not in D} e_d)``."""
    t = torus or Torus(h)
    return np.array([t.index(t.dual_face(c)) for c in t.cells(2)], dtype=np.int64)


def find_zx_dualities(code: CssCode, automorphisms: list[SpaceGroupElement], h: HnfMatrix) -> list[ZxDuality]:
    """All distinct ``g o dual`` over the given space-group elements that swap X and Z supports."""
    t = Torus(h)
    base = dual_map(h, t)
    out, seen = [], set()
    for g in automorphisms:
        tau = qubit_permutation(h, g, t)[base]
        key = tau.tobytes()
        if key in seen:
            continue
        seen.add(key)
        if not is_zx_duality(code, tau):
            continue
        order2 = bool(np.array_equal(tau[tau], np.arange(len(tau))))
        out.append(ZxDuality(tau, order2, g))
    return out


# ---------------------------------------------------------------------------
# fold gates


@dataclass
class FoldGate:
    kind: str  # "hadamard_type" | "phase_type" | "permutation"
    tau: ZxDuality | None
    clifford: Tableau
    provenance: SpaceGroupElement | None = None
    perm: np.ndarray | None = None

    def physical_action(self) -> dict:
        if self.kind == "permutation":
            return {"permutation": self.perm.tolist()}
        tau = self.tau.tau
        if self.kind == "hadamard_type":
            return {"gates": "H on every qubit", "permutation": tau.tolist()}
        fixed = [int(i) for i in np.flatnonzero(tau == np.arange(len(tau)))]
        pairs = [[int(i), int(tau[i])] for i in range(len(tau)) if tau[i] > i]
        return {"S": fixed, "CZ": pairs}


def hadamard_fold(tau: ZxDuality) -> Tableau:
    """``tau o (H on all qubits)``: ``X_i -> Z_tau(i)``, ``Z_i -> X_tau(i)``."""
    p = Tableau.permutation(tau.tau)
    return Tableau(p.z.copy(), p.x.copy(), np.zeros_like(p.q))


def phase_fold(tau: ZxDuality) -> Tableau:
    """S on fixed points of ``tau`` and CZ across each swapped pair."""
    if not tau.order2:
        raise SymmetryError("phase-type fold gate requires an involutive ZX duality")
    t = tau.tau
    n = len(t)
    tab = Tableau.identity(n)
    fixed = t == np.arange(n)
    tab.z[np.arange(n), t] = 1  # X_i -> X_i Z_tau(i)  (Z_i on fixed points)
    tab.q[:n] = fixed.astype(np.int64)  # fixed: X -> iXZ = Y
    return tab


class StabilizerGroup:
    """Membership test for ``+X(a)Z(b)`` with ``a`` in rowspace(hx), ``b`` in rowspace(hz).

    The row space of a matrix is the annihilator of its null space, so each test
    is one matrix-vector product.
    """

    def __init__(self, code: CssCode):
        self.code = code
        self.kx = nullspace(code.hx).astype(np.float64)
        self.kz = nullspace(code.hz).astype(np.float64)

    def x_part(self, x) -> bool:
        return not ((self.kx @ np.asarray(x, dtype=np.float64).T).astype(np.int64) % 2).any()

    def z_part(self, z) -> bool:
        return not ((self.kz @ np.asarray(z, dtype=np.float64).T).astype(np.int64) % 2).any()

    def contains(self, x, z, q: int) -> bool:
        return q % 4 == 0 and self.x_part(x) and self.z_part(z)


def preserves_stabilizers(tab: Tableau, code: CssCode, group: StabilizerGroup | None = None) -> bool:
    group = group or StabilizerGroup(code)
    hx, hz = as_f2(code.hx), as_f2(code.hz)
    xs = np.vstack([hx, np.zeros_like(hz)])
    zs = np.vstack([np.zeros_like(hx), hz])
    ix, iz, iq = tab.apply_many(xs, zs)
    return bool((iq == 0).all() and group.x_part(ix) and group.z_part(iz))


def fold_gate(kind: str, tau: ZxDuality, code: CssCode, group: StabilizerGroup | None = None) -> FoldGate:
    if kind == "hadamard_type":
        tab = hadamard_fold(tau)
    elif kind == "phase_type":
        tab = phase_fold(tau)
    else:
        raise SymmetryError(f"unknown fold kind {kind!r}")
    if not preserves_stabilizers(tab, code, group):
        raise SymmetryError(f"{kind} fold gate does not preserve the stabilizer group")
    return FoldGate(kind, tau, tab, tau.provenance)


def permutation_gate(h: HnfMatrix, g: SpaceGroupElement, torus: Torus | None = None) -> FoldGate:
    perm = qubit_permutation(h, g, torus)
    return FoldGate("permutation", None, Tableau.permutation(perm), g, perm)


# ---------------------------------------------------------------------------
# logical action


def _as_tableau(g) -> Tableau:
    if isinstance(g, FoldGate):
        return g.clifford
    if isinstance(g, Tableau):
        return g
    return Tableau.permutation(g)


def logical_action(gates, basis: LogicalBasis, code: CssCode, group: StabilizerGroup | None = None) -> LogicalAction:
    """Induced 6-qubit Clifford of one gate or a sequence applied left to right.

    Each logical representative is pushed through the gates, reduced modulo the
    stabilizer group and expressed in the (lx, lz) frame with its sign.
    """
    seq = gates if isinstance(gates, (list, tuple)) else [gates]
    tabs = [_as_tableau(g) for g in seq]
    group = group or StabilizerGroup(code)
    lx, lz = as_f2(basis.lx), as_f2(basis.lz)
    if not np.array_equal(basis.pairing % 2, np.eye(len(lx), dtype=basis.pairing.dtype)):
        raise SymmetryError("logical basis must be symplectic (lx . lz^T = I)")
    k = len(lx)
    x = np.vstack([lx, np.zeros_like(lz)])
    z = np.vstack([np.zeros_like(lx), lz])
    q = np.zeros(2 * k, dtype=np.int64)
    for tab in tabs:
        x, z, q = tab.apply_many(x, z, q)
    a = (x.astype(np.int64) @ lz.T) % 2
    b = (z.astype(np.int64) @ lx.T) % 2
    u, v = (a @ lx) % 2, (b @ lz) % 2
    sx, sz = x ^ u.astype(np.uint8), z ^ v.astype(np.uint8)
    if not (group.x_part(sx) and group.z_part(sz)):
        raise SymmetryError("gate does not map logical operators into the normalizer")
    # each image equals L(a|b) S with L(a|b) S = i^{a.b} (-1)^{v.sx} X(x) Z(z)
    ab = (a * b).sum(axis=1)
    d = (q - ab - 2 * (v * sx).sum(axis=1)) % 4
    if (d % 2).any():
        raise SymmetryError("image of a logical is not Hermitian")
    return Tableau(a.astype(np.uint8), b.astype(np.uint8), (ab + d) % 4)


def is_permutation_only(action: LogicalAction) -> bool:
    """No X/Z mixing: the symplectic matrix is block diagonal."""
    k = action.n
    return not action.z[:k].any() and not action.x[k:].any()


def label_permutation(action: LogicalAction) -> list[int] | None:
    """Permutation of the six labels if the action permutes logical X's and Z's alike, else None."""
    k = action.n
    if not is_permutation_only(action):
        return None
    ax, az = action.x[:k], action.z[k:]
    if not ((ax.sum(axis=1) == 1).all() and np.array_equal(ax, az)):
        return None
    return [int(np.flatnonzero(r)[0]) for r in ax]


# ---------------------------------------------------------------------------
# group order


@dataclass
class GroupOrder:
    order: int
    exact: bool
    method: str


def _symplectic_perm(action: LogicalAction) -> list[int]:
    m = action.symplectic.astype(np.int64)
    dim = m.shape[0]
    vecs = ((np.arange(1 << dim)[:, None] >> np.arange(dim)[None, :]) & 1).astype(np.int64)
    img = (vecs @ m) % 2
    return (img << np.arange(dim)[None, :]).sum(axis=1).tolist()


def _signed_perm(action: LogicalAction) -> list[int]:
    """Action on the ``2 * 4^k`` signed Hermitian Paulis ``(-1)^s i^{x.z} X(x)Z(z)``, indexed ``2 * v + s``."""
    k = action.n
    dim = 2 * k
    vecs = ((np.arange(1 << dim)[:, None] >> np.arange(dim)[None, :]) & 1).astype(np.uint8)
    x, z = vecs[:, :k], vecs[:, k:]
    xz = (x.astype(np.int64) * z).sum(axis=1)
    ix, iz, iq = action.apply_many(np.vstack([x, x]), np.vstack([z, z]),
                                   np.concatenate([xz, xz + 2]))
    sign = ((iq - (ix.astype(np.int64) * iz).sum(axis=1)) % 4) // 2
    img = (np.hstack([ix, iz]).astype(np.int64) << np.arange(dim)[None, :]).sum(axis=1)
    src = np.concatenate([np.arange(1 << dim) * 2, np.arange(1 << dim) * 2 + 1])
    out = np.empty(2 << dim, dtype=np.int64)
    out[src] = 2 * img + sign
    return out.tolist()


def group_order(generators: list[LogicalAction], budget: int = 20_000, phases: bool = False) -> GroupOrder:
    """Order of the generated group.

    By default the symplectic parts are used (logical Paulis quotiented out);
    the group is closed by breadth-first search while it fits in ``budget``
    elements, and beyond that the order comes from Schreier-Sims.  With
    ``phases`` the signs are kept: Schreier-Sims on the signed Pauli set, which
    counts Cliffords modulo global phase.
    """
    from sympy.combinatorics import Permutation, PermutationGroup

    if phases:
        gens = {g.key(): g for g in generators}
        perms = [Permutation(_signed_perm(g)) for g in gens.values()]
        perms = [q for q in perms if not q.is_Identity]
        if not perms:
            return GroupOrder(1, True, "schreier-sims (with phases)")
        return GroupOrder(int(PermutationGroup(perms).order()), True, "schreier-sims (with phases)")
    gens = {g.symplectic.tobytes(): g.symplectic.astype(np.int64) for g in generators}
    gens = [m for m in gens.values() if not np.array_equal(m, np.eye(len(m), dtype=np.int64))]
    if not gens:
        return GroupOrder(1, True, "closure")
    dim = len(gens[0])
    ident = np.eye(dim, dtype=np.int64)
    seen = {ident.astype(np.uint8).tobytes()}
    frontier = [ident]
    while frontier and len(seen) <= budget:
        nxt = []
        for a in frontier:
            for g in gens:
                c = (a @ g) % 2
                key = c.astype(np.uint8).tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append(c)
        frontier = nxt
    if not frontier:
        return GroupOrder(len(seen), True, "closure")
    tabs = [Tableau(m[:, :dim // 2].astype(np.uint8), m[:, dim // 2:].astype(np.uint8), np.zeros(dim, np.int64))
            for m in gens]
    group = PermutationGroup([Permutation(_symplectic_perm(t)) for t in tabs])
    return GroupOrder(int(group.order()), True, "schreier-sims")


# ---------------------------------------------------------------------------
# catalog


@dataclass
class SymmetryCatalog:
    automorphisms: list[SpaceGroupElement]
    dualities: list[ZxDuality]
    gates: list[FoldGate] = field(default_factory=list)
    actions: list[LogicalAction] = field(default_factory=list)

    def distinct_logical_permutations(self) -> int:
        return len({a.key() for g, a in zip(self.gates, self.actions) if g.kind == "permutation"})

    def to_json(self) -> str:
        entries = []
        for g, a in zip(self.gates, self.actions):
            entries.append({
                "kind": g.kind,
                "provenance": g.provenance.to_dict() if g.provenance else None,
                "physical_action": g.physical_action(),
                "logical_symplectic": a.symplectic.tolist(),
                "logical_phase": a.phase_bits.tolist(),
            })
        return json.dumps({"automorphisms": len(self.automorphisms), "zx_dualities": len(self.dualities),
                           "gates": entries}, indent=1)


def symmetry_catalog(h: HnfMatrix, code: CssCode, basis: LogicalBasis, max_fold: int | None = None) -> SymmetryCatalog:
    """Permutation gates (one per distinct logical action) plus every verified fold gate."""
    t = Torus(h)
    group = StabilizerGroup(code)
    autos = lattice_automorphisms(h)
    duals = find_zx_dualities(code, lattice_automorphisms(h, translations=True), h)
    cat = SymmetryCatalog(autos, duals)
    seen = set()
    for g in autos:
        gate = permutation_gate(h, g, t)
        act = logical_action(gate, basis, code, group)
        if act.key() in seen:
            continue
        seen.add(act.key())
        cat.gates.append(gate)
        cat.actions.append(act)
    for tau in duals[:max_fold]:
        kinds = ["hadamard_type"] + (["phase_type"] if tau.order2 else [])
        for kind in kinds:
            try:
                gate = fold_gate(kind, tau, code, group)
            except SymmetryError:
                continue
            act = logical_action(gate, basis, code, group)
            if act.key() in seen:
                continue
            seen.add(act.key())
            cat.gates.append(gate)
            cat.actions.append(act)
    return cat


def automorphism_logical_actions(h: HnfMatrix, code: CssCode, basis: LogicalBasis) -> list[LogicalAction]:
    t = Torus(h)
    group = StabilizerGroup(code)
    return [logical_action(permutation_gate(h, g, t), basis, code, group) for g in lattice_automorphisms(h)]


def _gate_from_entry(entry: dict, n: int) -> Tableau:
    act = entry["physical_action"]
    if entry["kind"] == "permutation":
        return Tableau.permutation(act["permutation"])
    if entry["kind"] == "hadamard_type":
        tau = np.asarray(act["permutation"], dtype=np.int64)
        return hadamard_fold(ZxDuality(tau, bool(np.array_equal(tau[tau], np.arange(n)))))
    if entry["kind"] == "phase_type":
        tau = np.arange(n)
        for i, j in act["CZ"]:
            tau[i], tau[j] = j, i
        return phase_fold(ZxDuality(tau, True))
    raise SymmetryError(f"unknown gate kind {entry['kind']!r}")


def verify_catalog(data: dict, code: CssCode, basis: LogicalBasis) -> None:
    """Rebuild every catalog gate, re-check stabilizer preservation and its recorded logical action."""
    group = StabilizerGroup(code)
    for i, entry in enumerate(data["gates"]):
        tab = _gate_from_entry(entry, code.n)
        if not preserves_stabilizers(tab, code, group):
            raise SymmetryError(f"catalog gate {i} does not preserve the stabilizer group")
        act = logical_action(tab, basis, code, group)
        if act.symplectic.tolist() != entry["logical_symplectic"] or act.phase_bits.tolist() != entry["logical_phase"]:
            raise SymmetryError(f"catalog gate {i} has a different logical action")
