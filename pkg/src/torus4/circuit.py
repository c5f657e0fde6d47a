"""Starfish and compact syndrome-extraction circuits for the 4D loop-only toric code.

Qubit ids: data qubits are 2-cells ``0 .. 6*Det-1``; X ancillas are 1-cells at
``6*Det + edge``; Z ancillas are 3-cells at ``10*Det + cube`` (or, with
ancilla reuse in the starfish circuit, the X-ancilla ids ``6*Det + cube``).

CNOT layers are labelled by direction tokens ``+a`` / ``-a`` for axis a.  For
an X ancilla on edge (i, p) and a direction along axis j != i, ``+j`` targets
the face ({i, j}, p) and ``-j`` the face ({i, j}, p - e_j).  For a Z ancilla
on cube (D, p) and axis l in D, ``+l`` uses the face (D \\ l, p + e_l) as
control and ``-l`` the face (D \\ l, p).  Each direction layer is a matching.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .complex import CssCode
from .lattice import DIM, HnfMatrix, Torus

DIRECTIONS = ("+0", "-0", "+1", "-1", "+2", "-2", "+3", "-3")
COMPACT_DIRECTIONS = ("-3", "-2", "-1", "-0", "+0", "+1", "+2", "+3")

PREP_X, PREP_Z, CNOT, MEAS_X, MEAS_Z = "PX", "PZ", "CX", "MX", "MZ"
_ARITY = {PREP_X: 1, PREP_Z: 1, CNOT: 2, MEAS_X: 1, MEAS_Z: 1}


class CircuitError(ValueError):
    pass


class CheckMismatch(AssertionError):
    """A measurement does not implement the stabilizer it is scheduled for."""

    def __init__(self, basis: str, row: int, cell, reason: str):
        self.basis, self.row, self.cell, self.reason = basis, row, cell, reason
        label = cell.label() if hasattr(cell, "label") else str(cell)
        super().__init__(f"{basis}-check {row} on ancilla {label}: {reason}")


class DirectionStep(NamedTuple):
    sign: int
    axis: int

    @classmethod
    def parse(cls, token: str) -> "DirectionStep":
        sign = 1 if token[0] == "+" else -1
        axis = int(token[1:])
        if token[0] not in "+-" or not 0 <= axis < DIM:
            raise CircuitError(f"bad direction token {token!r}")
        return cls(sign, axis)

    def __str__(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}{self.axis}"


class Op(NamedTuple):
    name: str
    targets: tuple[int, ...]


class MeasEvent(NamedTuple):
    basis: str  # "X" (1-cell check, row of hx) or "Z" (3-cell check, row of hz)
    qubit: int
    row: int
    round: int


@dataclass
class Circuit:
    layers: list[tuple[Op, ...]]
    num_qubits: int
    num_data: int
    det: int
    kind: str
    layer_rounds: list[int]
    meas: list[MeasEvent]  # chronological
    noiseless_rounds: frozenset[int] = frozenset()
    ancilla_cells: dict[int, tuple[str, int]] = field(default_factory=dict)  # qubit -> ("X"|"Z", row)

    @property
    def num_rounds(self) -> int:
        return max(self.layer_rounds) + 1 if self.layer_rounds else 0

    def cnot_layers(self) -> list[tuple[Op, ...]]:
        return [ly for ly in self.layers if any(op.name == CNOT for op in ly)]

    @property
    def cnot_depth(self) -> int:
        return len(self.cnot_layers())

    def count(self, name: str) -> int:
        return sum(op.name == name for ly in self.layers for op in ly)

    def check_schedulable(self) -> None:
        for li, ly in enumerate(self.layers):
            seen: set[int] = set()
            for op in ly:
                if len(op.targets) != _ARITY[op.name]:
                    raise CircuitError(f"layer {li}: {op.name} has wrong arity")
                for q in op.targets:
                    if q in seen:
                        raise CircuitError(f"layer {li}: qubit {q} used twice")
                    seen.add(q)

    def digest(self) -> str:
        return hashlib.sha256(to_text(self).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# adjacency


def _shift(p, axis: int, sign: int) -> tuple[int, ...]:
    q = list(p)
    q[axis] += sign
    return tuple(q)


def x_partner(t: Torus, edge, step: DirectionStep):
    """Face targeted by the X ancilla of ``edge`` in layer ``step`` (None if axis is the edge's)."""
    (i,) = edge.dirs
    j = step.axis
    if j == i:
        return None
    base = edge.base if step.sign > 0 else _shift(edge.base, j, -1)
    return t.make_cell(base, (i, j))


def z_partner(t: Torus, cube, step: DirectionStep):
    """Face controlling the Z ancilla of ``cube`` in layer ``step`` (None if axis not in the cube)."""
    l = step.axis
    if l not in cube.dirs:
        return None
    rest = tuple(d for d in cube.dirs if d != l)
    base = _shift(cube.base, l, 1) if step.sign > 0 else cube.base
    return t.make_cell(base, rest)


def _x_layer(t: Torus, step: DirectionStep, xq0: int) -> list[Op]:
    ops = []
    for e_idx, edge in enumerate(t.cells(1)):
        f = x_partner(t, edge, step)
        if f is not None:
            ops.append(Op(CNOT, (xq0 + e_idx, t.index(f))))
    return ops


def _z_layer(t: Torus, step: DirectionStep, zq0: int) -> list[Op]:
    ops = []
    for c_idx, cube in enumerate(t.cells(3)):
        f = z_partner(t, cube, step)
        if f is not None:
            ops.append(Op(CNOT, (t.index(f), zq0 + c_idx)))
    return ops


def _layout(code: CssCode, reuse: bool):
    d = code.torus.det
    xq0 = 6 * d
    zq0 = 6 * d if reuse else 10 * d
    nq = 10 * d if reuse else 14 * d
    return d, xq0, zq0, nq


def _meas_events(code: CssCode, basis: str, q0: int) -> list[MeasEvent]:
    rows = code.hx.shape[0] if basis == "X" else code.hz.shape[0]
    return [MeasEvent(basis, q0 + r, r, 0) for r in range(rows)]


def _ancilla_map(code: CssCode, xq0: int, zq0: int, reuse: bool) -> dict[int, tuple[str, int]]:
    out = {xq0 + e: ("X", e) for e in range(code.hx.shape[0])}
    if not reuse:
        out.update({zq0 + c: ("Z", c) for c in range(code.hz.shape[0])})
    return out


def starfish_round(h: HnfMatrix, code: CssCode, reversed_z: bool = False,
                   reuse_ancillas: bool = False) -> Circuit:
    """One round of the starfish circuit: the X half, then the Z half (CNOT depth 16).

    ``reversed_z`` runs the Z half in the reverse direction order;
    ``reuse_ancillas`` measures the Z checks on the X-ancilla qubits.
    """
    t = code.torus
    d, xq0, zq0, nq = _layout(code, reuse_ancillas)
    steps = [DirectionStep.parse(s) for s in DIRECTIONS]
    n_e, n_c = code.hx.shape[0], code.hz.shape[0]
    layers: list[tuple[Op, ...]] = [tuple(Op(PREP_X, (xq0 + e,)) for e in range(n_e))]
    layers += [tuple(_x_layer(t, s, xq0)) for s in steps]
    layers.append(tuple(Op(MEAS_X, (xq0 + e,)) for e in range(n_e)))
    layers.append(tuple(Op(PREP_Z, (zq0 + c,)) for c in range(n_c)))
    layers += [tuple(_z_layer(t, s, zq0)) for s in (steps[::-1] if reversed_z else steps)]
    layers.append(tuple(Op(MEAS_Z, (zq0 + c,)) for c in range(n_c)))
    layers = [ly for ly in layers if ly]
    meas = _meas_events(code, "X", xq0) + _meas_events(code, "Z", zq0)
    c = Circuit(layers, nq, code.n, d, "starfish", [0] * len(layers), meas,
                ancilla_cells=_ancilla_map(code, xq0, zq0, reuse_ancillas))
    c.check_schedulable()
    return c


def compact_round(h: HnfMatrix, code: CssCode) -> Circuit:
    """One round of the compact circuit: both halves interleaved (CNOT depth 8)."""
    t = code.torus
    d, xq0, zq0, nq = _layout(code, False)
    n_e, n_c = code.hx.shape[0], code.hz.shape[0]
    layers: list[tuple[Op, ...]] = [
        tuple(Op(PREP_X, (xq0 + e,)) for e in range(n_e)) + tuple(Op(PREP_Z, (zq0 + c,)) for c in range(n_c))
    ]
    for s in map(DirectionStep.parse, COMPACT_DIRECTIONS):
        layers.append(tuple(_x_layer(t, s, xq0) + _z_layer(t, s, zq0)))
    layers.append(tuple(Op(MEAS_X, (xq0 + e,)) for e in range(n_e)) + tuple(Op(MEAS_Z, (zq0 + c,)) for c in range(n_c)))
    meas = _meas_events(code, "X", xq0) + _meas_events(code, "Z", zq0)
    c = Circuit(layers, nq, code.n, d, "compact", [0] * len(layers), meas,
                ancilla_cells=_ancilla_map(code, xq0, zq0, False))
    c.check_schedulable()
    return c


def build_round(kind: str, h: HnfMatrix, code: CssCode, **kw) -> Circuit:
    if kind == "starfish":
        return starfish_round(h, code, **kw)
    if kind == "compact":
        return compact_round(h, code, **kw)
    raise CircuitError(f"unknown circuit kind {kind!r}")


def repeat_rounds(c: Circuit, rounds: int, final_noiseless: bool = True) -> Circuit:
    """``rounds`` copies of a single-round circuit, plus one noiseless round if requested."""
    if rounds < 1:
        raise CircuitError("rounds must be >= 1")
    total = rounds + (1 if final_noiseless else 0)
    layers, layer_rounds, meas = [], [], []
    for r in range(total):
        layers += c.layers
        layer_rounds += [r] * len(c.layers)
        meas += [m._replace(round=r) for m in c.meas]
    noiseless = frozenset({rounds}) if final_noiseless else frozenset()
    return Circuit(layers, c.num_qubits, c.num_data, c.det, c.kind, layer_rounds, meas,
                   noiseless, dict(c.ancilla_cells))


# ---------------------------------------------------------------------------
# verification


@dataclass
class CheckReport:
    matched: int
    x_checks: int
    z_checks: int


def effective_checks(c: Circuit, code: CssCode) -> CheckReport:
    """Prove by backward Pauli propagation that each measurement reads its stabilizer.

    Every measured observable is conjugated back to the start of its round.  It
    must commute with every preparation and earlier measurement it meets, and
    must end up as exactly the scheduled ``hx`` (MeasX) or ``hz`` (MeasZ) row on
    the data qubits.  Raises :class:`CheckMismatch` naming the ancilla cell.
    """
    t = code.torus
    nm = len(c.meas)
    x = np.zeros((c.num_qubits, nm), dtype=bool)
    z = np.zeros((c.num_qubits, nm), dtype=bool)
    # locate each measurement's layer
    meas_pos: dict[tuple[int, int], int] = {}
    pos = 0
    starts: dict[int, list[int]] = {}
    for li, ly in enumerate(c.layers):
        for op in ly:
            if op.name in (MEAS_X, MEAS_Z):
                meas_pos[(li, op.targets[0])] = pos
                starts.setdefault(li, []).append(pos)
                pos += 1
    if pos != nm:
        raise CircuitError("measurement schedule does not match the circuit")
    bad: dict[int, str] = {}
    round_start = {r: min(i for i, rr in enumerate(c.layer_rounds) if rr == r) for r in set(c.layer_rounds)}

    def finish(cols: list[int]) -> None:
        for j in cols:
            if j in bad:
                continue
            m = c.meas[j]
            anc_x = x[c.num_data:, j].any()
            anc_z = z[c.num_data:, j].any()
            want = (code.hx if m.basis == "X" else code.hz)[m.row].astype(bool)
            got_same = x[: c.num_data, j] if m.basis == "X" else z[: c.num_data, j]
            got_other = z[: c.num_data, j] if m.basis == "X" else x[: c.num_data, j]
            if anc_x or anc_z:
                bad[j] = "observable leaks onto an ancilla"
            elif got_other.any() or not np.array_equal(got_same, want):
                bad[j] = "data support differs from the stabilizer row"

    for li in range(len(c.layers) - 1, -1, -1):
        ly = c.layers[li]
        for op in ly:
            if op.name == CNOT:
                continue
            q = op.targets[0]
            if op.name in (MEAS_X, MEAS_Z):
                j = meas_pos[(li, q)]
                # check that no already-propagating observable anticommutes
                hit = (z[q] if op.name == MEAS_X else x[q]).copy()
                hit[j] = False
                for k in np.flatnonzero(hit):
                    bad.setdefault(int(k), "anticommutes with a later measurement's qubit")
                if op.name == MEAS_X:
                    x[q, j] = True
                else:
                    z[q, j] = True
            elif op.name == PREP_X:
                for k in np.flatnonzero(z[q]):
                    bad.setdefault(int(k), "anticommutes with an X preparation")
                x[q] = False
                z[q] = False
            elif op.name == PREP_Z:
                for k in np.flatnonzero(x[q]):
                    bad.setdefault(int(k), "anticommutes with a Z preparation")
                x[q] = False
                z[q] = False
        cn = np.array([op.targets for op in ly if op.name == CNOT], dtype=np.int64).reshape(-1, 2)
        if len(cn):
            ctl, tgt = cn[:, 0], cn[:, 1]
            x[tgt] ^= x[ctl]
            z[ctl] ^= z[tgt]
        r = c.layer_rounds[li]
        if round_start[r] == li:
            cols = [j for j, m in enumerate(c.meas) if m.round == r]
            finish(cols)
            x[:, cols] = False
            z[:, cols] = False
    if bad:
        j = min(bad)
        m = c.meas[j]
        cell = t.cell(1 if m.basis == "X" else 3, m.row)
        raise CheckMismatch(m.basis, m.row, cell, bad[j])
    nx = sum(m.basis == "X" for m in c.meas)
    return CheckReport(matched=nm, x_checks=nx, z_checks=nm - nx)


# ---------------------------------------------------------------------------
# text format


def qubit_labels(c: Circuit, code: CssCode) -> list[str]:
    t = code.torus
    labels = [f"D {t.cell(2, f).label()}" for f in range(c.num_data)]
    for q in range(c.num_data, c.num_qubits):
        if q in c.ancilla_cells:
            basis, row = c.ancilla_cells[q]
            labels.append(f"A{basis} {t.cell(1 if basis == 'X' else 3, row).label()}")
        else:
            labels.append("A")
    return labels


def to_text(c: Circuit, labels: list[str] | None = None) -> str:
    """One layer per line, ``TICK`` between layers, ``#`` header lines."""
    lines = [f"# torus4 circuit kind={c.kind} det={c.det} qubits={c.num_qubits} rounds={c.num_rounds}"]
    if c.noiseless_rounds:
        lines.append(f"# noiseless_rounds={','.join(map(str, sorted(c.noiseless_rounds)))}")
    if labels:
        lines += [f"# q{q} {lab}" for q, lab in enumerate(labels)]
    prev_round = None
    for li, ly in enumerate(c.layers):
        r = c.layer_rounds[li]
        if li:
            lines.append("TICK")
        if r != prev_round:
            lines.append(f"# round {r}")
            prev_round = r
        lines.append(" ".join(f"{op.name} {' '.join(map(str, op.targets))}" for op in ly))
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> list[tuple[Op, ...]]:
    """Layers of a circuit in the text format (header and round comments ignored)."""
    layers: list[tuple[Op, ...]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#") or line == "TICK":
            continue
        tok = line.split()
        ops, i = [], 0
        while i < len(tok):
            name = tok[i]
            if name not in _ARITY:
                raise CircuitError(f"unknown operation {name!r}")
            k = _ARITY[name]
            ops.append(Op(name, tuple(int(v) for v in tok[i + 1:i + 1 + k])))
            i += 1 + k
        layers.append(tuple(ops))
    return layers


def metadata(c: Circuit, code: CssCode) -> dict:
    return {
        "kind": c.kind,
        "det": c.det,
        "hnf": [list(r) for r in code.lattice.a],
        "num_qubits": c.num_qubits,
        "num_data": c.num_data,
        "cnot_depth_per_round": c.cnot_depth // max(c.num_rounds, 1),
        "noiseless_rounds": sorted(c.noiseless_rounds),
        "qubits": qubit_labels(c, code),
        "meas_schedule": [m._asdict() for m in c.meas],
        "digest": c.digest(),
    }


def metadata_json(c: Circuit, code: CssCode) -> str:
    return json.dumps(metadata(c, code), indent=1)
