"""The F2 chain complex C4 -> C3 -> C2 -> C1 -> C0 of T^4_Lambda and its CSS code.

Qubits sit on 2-cells.  X checks are indexed by 1-cells (rows of the boundary
map from faces to edges), Z checks by 3-cells (transpose of the boundary map
from cubes to faces).  Redundant checks are kept.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import gf2
from .lattice import Cell, HnfMatrix, LatticeError, Torus


def boundary_matrix(h: HnfMatrix | Torus, k: int) -> np.ndarray:
    """Matrix of the boundary map C_k -> C_{k-1} (rows: (k-1)-cells, cols: k-cells).

    Incidences that coincide on small tori cancel mod 2.
    """
    if not 1 <= k <= 4:
        raise LatticeError(f"boundary map index {k} out of range 1..4")
    t = h if isinstance(h, Torus) else Torus(h)
    m = np.zeros((t.num_cells(k - 1), t.num_cells(k)), dtype=np.uint8)
    for j, c in enumerate(t.cells(k)):
        for b in t.boundary(c):
            m[t.index(b), j] ^= 1
    return m


@dataclass
class CssCode:
    """CSS code of the 4D loop-only toric code on T^4_Lambda."""

    lattice: HnfMatrix
    hx: np.ndarray  # rows: 1-cells, cols: 2-cells
    hz: np.ndarray  # rows: 3-cells, cols: 2-cells
    torus: Torus = field(repr=False)

    @property
    def n(self) -> int:
        return self.hx.shape[1]

    @cached_property
    def rank_hx(self) -> int:
        return gf2.rank(self.hx)

    @cached_property
    def rank_hz(self) -> int:
        return gf2.rank(self.hz)

    @property
    def k(self) -> int:
        return self.n - self.rank_hx - self.rank_hz

    @cached_property
    def faces(self) -> list[Cell]:
        return self.torus.cells(2)

    @cached_property
    def edges(self) -> list[Cell]:
        return self.torus.cells(1)

    @cached_property
    def cubes(self) -> list[Cell]:
        return self.torus.cells(3)

    def weight_report(self) -> dict:
        """Row/column weights of both check matrices and whether any collapsed below 6/4."""
        rep = {}
        for name, m in (("hx", self.hx), ("hz", self.hz)):
            rw = m.sum(axis=1)
            cw = m.sum(axis=0)
            rep[name] = {
                "row_weights": sorted(set(int(x) for x in rw)),
                "col_weights": sorted(set(int(x) for x in cw)),
            }
        rep["collapsed"] = any(rep[nm]["row_weights"] != [6] or rep[nm]["col_weights"] != [4] for nm in ("hx", "hz"))
        return rep

    def to_json(self) -> str:
        return json.dumps({
            "hnf": [list(r) for r in self.lattice.a],
            "n": self.n,
            "hx": [np.flatnonzero(r).tolist() for r in self.hx],
            "hz": [np.flatnonzero(r).tolist() for r in self.hz],
        })

    def to_alist(self, which: str = "hx") -> str:
        return to_alist(self.hx if which == "hx" else self.hz)


def css_from_lattice(h: HnfMatrix) -> CssCode:
    t = Torus(h)
    d2 = boundary_matrix(t, 2)
    d3 = boundary_matrix(t, 3)
    return CssCode(lattice=h, hx=d2, hz=np.ascontiguousarray(d3.T), torus=t)


def stabilizer_redundancies(code: CssCode) -> tuple[np.ndarray, np.ndarray]:
    """Relations among check rows: (Z relations from 4-cells, X relations from 0-cells).

    ``z_relations[c]`` marks the eight 3-cells bounding hypercube ``c``;
    ``x_relations[v]`` marks the eight 1-cells meeting vertex ``v``.  Each
    relation sums its check rows to zero.
    """
    t = code.torus
    z_rel = np.ascontiguousarray(boundary_matrix(t, 4).T)  # rows: 4-cells, cols: 3-cells
    x_rel = boundary_matrix(t, 1)  # rows: 0-cells, cols: 1-cells
    if gf2.matmul(z_rel, code.hz).any() or gf2.matmul(x_rel, code.hx).any():
        raise AssertionError("redundancy relations do not annihilate the check matrices")
    return z_rel, x_rel


def to_alist(m: np.ndarray) -> str:
    """MacKay alist text for a binary matrix."""
    m = gf2.as_f2(m)
    rows, cols = m.shape
    col_sup = [np.flatnonzero(m[:, j]) + 1 for j in range(cols)]
    row_sup = [np.flatnonzero(m[i]) + 1 for i in range(rows)]
    max_c = max((len(s) for s in col_sup), default=0)
    max_r = max((len(s) for s in row_sup), default=0)
    lines = [f"{cols} {rows}", f"{max_c} {max_r}",
             " ".join(str(len(s)) for s in col_sup),
             " ".join(str(len(s)) for s in row_sup)]
    lines += [" ".join(map(str, s)) for s in col_sup]
    lines += [" ".join(map(str, s)) for s in row_sup]
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> np.ndarray:
    tok = text.split("\n")
    cols, rows = map(int, tok[0].split())
    m = np.zeros((rows, cols), dtype=np.uint8)
    for j in range(cols):
        for v in tok[4 + j].split():
            m[int(v) - 1, j] = 1
    return m
