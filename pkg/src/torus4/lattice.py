"""Integer lattices in Z^4 and the cubical cellulation of the 4-torus Z^4 / Lambda.

A lattice is stored by its Hermite normal form (rows are generators, upper
triangular, entries above the diagonal reduced modulo the diagonal).  Vertices
of the torus are the coset representatives ``0 <= x_i < a_ii``; a k-cell is a
base vertex plus a set of k free directions.
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

DIM = 4

#: direction subsets in the canonical order for each cell dimension
#: (for 2-cells: xy, xz, xw, yz, yw, zw)
DIRECTION_SETS: dict[int, tuple[tuple[int, ...], ...]] = {
    k: tuple(itertools.combinations(range(DIM), k)) for k in range(DIM + 1)
}


class LatticeError(ValueError):
    pass


def hnf_reduce(basis) -> "HnfMatrix":
    """Row-style Hermite normal form of a nonsingular 4x4 integer matrix.

    Uses unimodular row operations only, so the row lattice is unchanged.
    Signs are absorbed, so bases with negative entries are fine.
    """
    a = np.array(basis, dtype=object).reshape(DIM, DIM)
    det = _int_det(a)
    if det == 0:
        raise LatticeError("degenerate lattice")
    a = [list(map(int, row)) for row in a]
    for col in range(DIM):
        # gcd-combine rows col.. into a single pivot in this column
        while True:
            rows = [r for r in range(col, DIM) if a[r][col] != 0]
            piv = min(rows, key=lambda r: abs(a[r][col]))
            a[col], a[piv] = a[piv], a[col]
            done = True
            for r in range(col + 1, DIM):
                if a[r][col] != 0:
                    q = a[r][col] // a[col][col]
                    a[r] = [x - q * y for x, y in zip(a[r], a[col])]
                    if a[r][col] != 0:
                        done = False
            if done:
                break
        if a[col][col] < 0:
            a[col] = [-x for x in a[col]]
        for r in range(col):
            q = a[r][col] // a[col][col]
            a[r] = [x - q * y for x, y in zip(a[r], a[col])]
    return HnfMatrix(tuple(tuple(row) for row in a))


def _int_det(a) -> int:
    m = [list(map(int, row)) for row in a]
    n = len(m)
    # Bareiss fraction-free elimination
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class HnfMatrix:
    """A 4x4 integer matrix in Hermite normal form; rows generate the lattice."""

    a: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        a = self.a
        if len(a) != DIM or any(len(row) != DIM for row in a):
            raise LatticeError("HNF must be 4x4")
        for i in range(DIM):
            if a[i][i] < 1:
                raise LatticeError(f"diagonal entry a[{i}][{i}] = {a[i][i]} must be >= 1")
            for j in range(DIM):
                if i > j and a[i][j] != 0:
                    raise LatticeError("HNF must be upper triangular")
                if i < j and not 0 <= a[i][j] < a[j][j]:
                    raise LatticeError(f"entry a[{i}][{j}] = {a[i][j]} not reduced modulo a[{j}][{j}]")

    @classmethod
    def from_rows(cls, rows) -> "HnfMatrix":
        """Validate ``rows`` as an HNF; use :func:`hnf_reduce` for arbitrary bases."""
        return cls(tuple(tuple(int(x) for x in row) for row in rows))

    @classmethod
    def from_shorthand(cls, entries: Sequence[int] | str) -> "HnfMatrix":
        """Build from the ten upper-triangular entries a11,a12,a13,a14,a22,a23,a24,a33,a34,a44."""
        if isinstance(entries, str):
            entries = [int(tok) for tok in entries.replace(" ", "").split(",") if tok]
        if len(entries) != 10:
            raise LatticeError("HNF shorthand needs exactly 10 entries")
        it = iter(entries)
        rows = [[0] * DIM for _ in range(DIM)]
        for i in range(DIM):
            for j in range(i, DIM):
                rows[i][j] = int(next(it))
        return cls.from_rows(rows)

    @property
    def shorthand(self) -> tuple[int, ...]:
        return tuple(self.a[i][j] for i in range(DIM) for j in range(i, DIM))

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.a[i][i] for i in range(DIM))

    @property
    def det(self) -> int:
        return math.prod(self.diagonal)

    def to_array(self) -> np.ndarray:
        return np.array(self.a, dtype=np.int64)

    def __str__(self) -> str:
        return "HNF(" + ",".join(map(str, self.shorthand)) + ")"


def determinant(h: HnfMatrix) -> int:
    return h.det


def canonicalize_point(p: Sequence[int], h: HnfMatrix) -> tuple[int, ...]:
    """Canonical coset representative of ``p`` modulo the row lattice of ``h``."""
    x = [int(v) for v in p]
    for i in range(DIM):
        q = x[i] // h.a[i][i]
        if q:
            row = h.a[i]
            for j in range(i, DIM):
                x[j] -= q * row[j]
    return tuple(x)


def in_lattice(v: Sequence[int], h: HnfMatrix) -> bool:
    return not any(canonicalize_point(v, h))


class Cell(NamedTuple):
    """A cell of the torus: canonical base vertex and sorted tuple of free directions."""

    base: tuple[int, ...]
    dirs: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.dirs)

    def label(self) -> str:
        """Bit-holder notation, e.g. ``(⊔⊔00)_(0,0,0,1)``."""
        s = "".join("⊔" if d in self.dirs else "0" for d in range(DIM))
        return f"({s})_{self.base}"


def _unit(d: int, sign: int = 1) -> tuple[int, ...]:
    v = [0] * DIM
    v[d] = sign
    return tuple(v)


def _add(p, q) -> tuple[int, ...]:
    return tuple(a + b for a, b in zip(p, q))


class Torus:
    """Cell bookkeeping for T^4_Lambda: enumeration, indexing and incidence."""

    def __init__(self, h: HnfMatrix):
        self.h = h
        self.det = h.det
        self._radix = h.diagonal
        if self.det == 1:
            warnings.warn("Det(L) = 1: single-vertex torus, the code is [[6,6,1]]", stacklevel=2)

    @cached_property
    def points(self) -> tuple[tuple[int, ...], ...]:
        return tuple(itertools.product(*(range(r) for r in self._radix)))

    def point_index(self, p: Sequence[int]) -> int:
        idx = 0
        for x, r in zip(p, self._radix):
            idx = idx * r + x
        return idx

    def canonical(self, p) -> tuple[int, ...]:
        return canonicalize_point(p, self.h)

    def cells(self, k: int) -> list[Cell]:
        if not 0 <= k <= DIM:
            raise LatticeError(f"cell dimension {k} out of range 0..4")
        return [Cell(p, dirs) for dirs in DIRECTION_SETS[k] for p in self.points]

    def num_cells(self, k: int) -> int:
        return math.comb(DIM, k) * self.det

    def index(self, cell: Cell) -> int:
        """Position of ``cell`` in :meth:`cells` order (base must be canonical)."""
        k = len(cell.dirs)
        return DIRECTION_SETS[k].index(cell.dirs) * self.det + self.point_index(cell.base)

    def cell(self, k: int, index: int) -> Cell:
        dirs = DIRECTION_SETS[k][index // self.det]
        return Cell(self.points[index % self.det], dirs)

    def make_cell(self, base, dirs) -> Cell:
        return Cell(self.canonical(base), tuple(sorted(dirs)))

    def boundary(self, c: Cell) -> list[Cell]:
        if c.dim < 1:
            raise LatticeError("boundary requires a cell of dimension >= 1")
        out = []
        for d in c.dirs:
            rest = tuple(x for x in c.dirs if x != d)
            out.append(self.make_cell(c.base, rest))
            out.append(self.make_cell(_add(c.base, _unit(d)), rest))
        return out

    def coboundary(self, c: Cell) -> list[Cell]:
        if c.dim > DIM - 1:
            raise LatticeError("coboundary requires a cell of dimension <= 3")
        out = []
        for d in range(DIM):
            if d in c.dirs:
                continue
            more = tuple(sorted(c.dirs + (d,)))
            out.append(self.make_cell(c.base, more))
            out.append(self.make_cell(_add(c.base, _unit(d, -1)), more))
        return out

    def dual_face(self, c: Cell) -> Cell:
        """Poincare dual cell, shifted back onto the primal lattice.

        ``(D, p) -> (complement of D, p - sum_{d not in D} e_d)``; maps k-cells to
        (4-k)-cells and exchanges boundary with coboundary incidence.
        """
        comp = tuple(d for d in range(DIM) if d not in c.dirs)
        shift = [0] * DIM
        for d in comp:
            shift[d] = -1
        return self.make_cell(_add(c.base, shift), comp)


def enumerate_cells(h: HnfMatrix, k: int) -> list[Cell]:
    return Torus(h).cells(k)


def incident_cells(c: Cell, h: HnfMatrix, delta: int) -> list[Cell]:
    """Boundary (``delta=-1``) or coboundary (``delta=+1``) cells of ``c``, with repeats."""
    t = Torus(h)
    if delta == -1:
        return t.boundary(c)
    if delta == 1:
        return t.coboundary(c)
    raise LatticeError("delta must be +1 or -1")


# Lattices from the code-parameter table (shorthand a11..a44) and the
# simulation set.  Values: (shorthand, reported distance or upper bound).
CODE_TABLE = {
    "Det2": ((1, 0, 0, 1, 1, 0, 1, 1, 0, 2), 2),
    "Det3": ((1, 0, 0, 1, 1, 0, 1, 1, 1, 3), 3),
    "Det5": ((1, 0, 0, 1, 1, 0, 2, 1, 3, 5), 4),
    "Det9": ((1, 0, 0, 5, 1, 0, 6, 1, 7, 9), 6),
    "Hadamard": ((1, 1, 1, 1, 2, 0, 2, 2, 2, 4), 8),
    "Det16": ((1, 0, 0, 3, 1, 0, 5, 1, 7, 16), 8),
    "Det18": ((1, 0, 0, 3, 1, 0, 5, 1, 7, 18), 9),
    "Det45": ((1, 0, 1, 6, 1, 0, 11, 3, 9, 15), 15),
    "Det68": ((1, 0, 0, 21, 1, 1, 24, 2, 30, 34), 18),
    "Det152": ((1, 0, 0, 115, 1, 0, 124, 1, 136, 152), 30),
}

#: code-table rows whose distance is only an upper bound
UPPER_BOUND_ONLY = frozenset({"Det68", "Det152"})

SIMULATION_LATTICES = {
    "Det3": ((1, 0, 0, 1, 1, 0, 1, 1, 1, 3), 3),
    "Det9": ((1, 0, 0, 5, 1, 0, 6, 1, 7, 9), 6),
    "Det9b": ((1, 0, 0, 4, 1, 0, 6, 1, 7, 9), 6),
    "Hadamard": ((1, 1, 1, 1, 2, 0, 2, 2, 2, 4), 8),
    "Det16": ((1, 0, 0, 3, 1, 0, 5, 1, 7, 16), 8),
    "Det45": ((1, 0, 1, 6, 1, 0, 11, 3, 9, 15), 15),
}

HADAMARD_BASIS = ((1, 1, 1, 1), (1, -1, 1, -1), (1, 1, -1, -1), (1, -1, -1, 1))


def named_lattice(name: str) -> HnfMatrix:
    if name in ("identity", "trivial"):
        return HnfMatrix.from_rows(np.eye(DIM, dtype=int).tolist())
    if name.startswith("hypercubic"):
        # hypercubic-l: the l x l x l x l torus
        l = int(name.split("-")[1]) if "-" in name else 2
        return HnfMatrix.from_rows((l * np.eye(DIM, dtype=int)).tolist())
    for table in (CODE_TABLE, SIMULATION_LATTICES):
        if name in table:
            return HnfMatrix.from_shorthand(table[name][0])
    raise LatticeError(f"unknown lattice name {name!r}")


def load_lattice(source: dict | str | Path) -> HnfMatrix:
    """Read ``{"basis": [[...]]}`` or ``{"hnf": [[...]]}`` (dict, JSON text or path)."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        source = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        source = json.loads(source)
    if "hnf" in source:
        return HnfMatrix.from_rows(source["hnf"])
    if "basis" in source:
        return hnf_reduce(source["basis"])
    raise LatticeError('lattice file needs a "basis" or "hnf" key')


def iter_hnfs(det: int) -> Iterator[HnfMatrix]:
    """All HNFs of a given determinant (bounded utility for small ``det``)."""
    for diag in _ordered_factorizations(det, DIM):
        ranges = []
        for i in range(DIM):
            for j in range(i + 1, DIM):
                ranges.append(range(diag[j]))
        for offdiag in itertools.product(*ranges):
            rows = [[0] * DIM for _ in range(DIM)]
            it = iter(offdiag)
            for i in range(DIM):
                rows[i][i] = diag[i]
                for j in range(i + 1, DIM):
                    rows[i][j] = next(it)
            yield HnfMatrix.from_rows(rows)


def _ordered_factorizations(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (n,)
        return
    for d in range(1, n + 1):
        if n % d == 0:
            for rest in _ordered_factorizations(n // d, parts - 1):
                yield (d,) + rest
