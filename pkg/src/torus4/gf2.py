"""Dense linear algebra over F2 on numpy uint8 arrays."""
from __future__ import annotations

import numpy as np


def as_f2(m) -> np.ndarray:
    a = np.asarray(m)
    if a.dtype == np.bool_:
        return a.astype(np.uint8)
    return (a.astype(np.int64) & 1).astype(np.uint8)


def rref(m, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns.

    Only the first ``ncols`` columns are used for pivoting (default: all), which
    lets callers eliminate an augmented matrix.
    """
    a = as_f2(m).copy().astype(bool)
    rows, cols = a.shape
    ncols = cols if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        hits = np.flatnonzero(a[:, c])
        hits = hits[hits != r]
        if hits.size:
            a[hits] ^= a[r]
        pivots.append(c)
        r += 1
    return a.astype(np.uint8), pivots


def rank(m) -> int:
    a = as_f2(m)
    if a.size == 0:
        return 0
    return len(rref(a)[1])


def nullspace(m) -> np.ndarray:
    """Basis (as rows) of {x : m x = 0}."""
    a = as_f2(m)
    n = a.shape[1]
    r, piv = rref(a)
    free = [c for c in range(n) if c not in set(piv)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, pc in enumerate(piv):
            if r[row, f]:
                basis[i, pc] = 1
    return basis


def row_basis(m) -> np.ndarray:
    r, piv = rref(m)
    return r[: len(piv)]


def solve(m, b) -> np.ndarray | None:
    """One solution of ``m x = b`` or None."""
    a = as_f2(m)
    rows, n = a.shape
    aug = np.concatenate([a, as_f2(b).reshape(rows, 1)], axis=1)
    r, piv = rref(aug, ncols=n)
    if r[len(piv):, n].any():
        return None
    x = np.zeros(n, dtype=np.uint8)
    for row, pc in enumerate(piv):
        x[pc] = r[row, n]
    return x


def in_rowspace(basis, v) -> bool:
    """Whether each vector in ``v`` lies in the row span of ``basis`` (all must)."""
    v = np.atleast_2d(as_f2(v))
    if np.size(basis) == 0:
        return not v.any()
    return rank(np.vstack([basis, v])) == rank(basis)


def inverse(m) -> np.ndarray:
    a = as_f2(m)
    n = a.shape[0]
    aug = np.concatenate([a, np.eye(n, dtype=np.uint8)], axis=1)
    r, piv = rref(aug, ncols=n)
    if piv != list(range(n)):
        raise np.linalg.LinAlgError("matrix is singular over F2")
    return r[:, n:]


def matmul(a, b) -> np.ndarray:
    return (as_f2(a).astype(np.int64) @ as_f2(b).astype(np.int64) % 2).astype(np.uint8)


class Echelon:
    """Incrementally maintained echelon basis supporting membership tests."""

    def __init__(self, n: int):
        self.n = n
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []

    def reduce(self, v) -> np.ndarray:
        v = as_f2(v).astype(bool).copy()
        for row, pc in zip(self.rows, self.pivots):
            if v[pc]:
                v ^= row
        return v

    def add(self, v) -> bool:
        """Insert ``v``; returns False if it was already in the span."""
        r = self.reduce(v)
        nz = np.flatnonzero(r)
        if nz.size == 0:
            return False
        pc = int(nz[0])
        for i, row in enumerate(self.rows):
            if row[pc]:
                self.rows[i] = row ^ r
        self.rows.append(r)
        self.pivots.append(pc)
        return True

    def contains(self, v) -> bool:
        return not self.reduce(v).any()

    @property
    def rank(self) -> int:
        return len(self.rows)


def complement_basis(sub, full) -> np.ndarray:
    """Rows of ``full`` that extend a basis of span(sub) to a basis of span(sub + full)."""
    full = as_f2(full)
    ech = Echelon(full.shape[1])
    for row in as_f2(sub):
        ech.add(row)
    out = [row for row in full if ech.add(row)]
    return np.array(out, dtype=np.uint8).reshape(len(out), full.shape[1])


def pack_rows(m) -> np.ndarray:
    """Pack 0/1 rows into uint64 words; bit i of word w holds column 64*w + i."""
    m = as_f2(np.atleast_2d(m))
    rows, cols = m.shape
    words = max(1, (cols + 63) // 64)
    buf = np.zeros((rows, words * 64), dtype=np.uint8)
    buf[:, :cols] = m
    return np.packbits(buf, axis=1, bitorder="little").view("<u8").astype(np.uint64).reshape(rows, words)


def unpack_rows(p, cols: int) -> np.ndarray:
    p = np.atleast_2d(np.asarray(p, dtype=np.uint64))
    bits = np.unpackbits(p.astype("<u8").view(np.uint8), axis=1, bitorder="little")
    return bits[:, :cols]
