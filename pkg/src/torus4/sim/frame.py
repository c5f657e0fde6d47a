"""Batched Pauli-frame propagation through CSS circuits.

X and Z frames are kept in separate boolean arrays of shape (qubits, batch).
A CNOT copies X from control to target and Z from target to control; a
preparation clears the frame of its qubit; MeasX reports the Z frame and
MeasZ the X frame.  The X frame is never read when updating the Z frame and
vice versa, so the two error sectors evolve independently.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import CNOT, MEAS_X, MEAS_Z, PREP_X, PREP_Z, Circuit

SECTORS = ("X", "Z")  # error type; X errors are seen by MeasZ, Z errors by MeasX


@dataclass
class FrameResult:
    meas: np.ndarray  # (num_meas, batch) outcome flips, chronological
    x: np.ndarray  # (num_data, batch) final X frame on data
    z: np.ndarray  # (num_data, batch) final Z frame on data


@dataclass
class _CompiledLayer:
    prep: np.ndarray
    ctl: np.ndarray
    tgt: np.ndarray
    meas_pos: np.ndarray  # chronological measurement indices of this layer
    meas_q: np.ndarray
    meas_is_x: np.ndarray


def compile_layers(c: Circuit) -> list[_CompiledLayer]:
    out = []
    pos = 0
    for ly in c.layers:
        prep = [op.targets[0] for op in ly if op.name in (PREP_X, PREP_Z)]
        cn = np.array([op.targets for op in ly if op.name == CNOT], dtype=np.int64).reshape(-1, 2)
        mq, mx = [], []
        for op in ly:
            if op.name in (MEAS_X, MEAS_Z):
                mq.append(op.targets[0])
                mx.append(op.name == MEAS_X)
        mpos = np.arange(pos, pos + len(mq))
        pos += len(mq)
        out.append(_CompiledLayer(np.array(prep, dtype=np.int64), cn[:, 0], cn[:, 1], mpos, np.array(mq, dtype=np.int64), np.array(mx, dtype=bool)))
    return out


Injection = dict  # (layer, "before"|"after") -> (qubits, columns, xbits, zbits)


def propagate(c: Circuit, batch: int, inject: Injection, compiled=None) -> FrameResult:
    """Run ``batch`` frames through ``c``, flipping frame bits at the given injection points."""
    compiled = compiled or compile_layers(c)
    nq = c.num_qubits
    x = np.zeros((nq, batch), dtype=bool)
    z = np.zeros((nq, batch), dtype=bool)
    meas = np.zeros((len(c.meas), batch), dtype=bool)

    def apply(key):
        item = inject.get(key)
        if item is None:
            return
        qs, cols, xb, zb = item
        np.logical_xor.at(x, (qs[xb], cols[xb]), True)
        np.logical_xor.at(z, (qs[zb], cols[zb]), True)

    for li, cl in enumerate(compiled):
        apply((li, "before"))
        if cl.prep.size:
            x[cl.prep] = False
            z[cl.prep] = False
        if cl.ctl.size:
            x[cl.tgt] ^= x[cl.ctl]
            z[cl.ctl] ^= z[cl.tgt]
        if cl.meas_q.size:
            mxq = cl.meas_q[cl.meas_is_x]
            mzq = cl.meas_q[~cl.meas_is_x]
            meas[cl.meas_pos[cl.meas_is_x]] = z[mxq]
            meas[cl.meas_pos[~cl.meas_is_x]] = x[mzq]
        apply((li, "after"))
    nd = c.num_data
    return FrameResult(meas, x[:nd].copy(), z[:nd].copy())


class SectorLayout:
    """Map chronological measurements to per-sector (round, check row) grids."""

    def __init__(self, c: Circuit):
        self.rounds = c.num_rounds
        self.index: dict[str, np.ndarray] = {}
        for sector, basis in (("X", "Z"), ("Z", "X")):
            rows = 1 + max((m.row for m in c.meas if m.basis == basis), default=-1)
            idx = np.full((self.rounds, rows), -1, dtype=np.int64)
            for j, m in enumerate(c.meas):
                if m.basis == basis:
                    idx[m.round, m.row] = j
            if (idx < 0).any():
                raise ValueError("every check must be measured once per round")
            self.index[sector] = idx

    def rows(self, sector: str) -> int:
        return self.index[sector].shape[1]

    def num_detectors(self, sector: str) -> int:
        return self.index[sector].size

    def raw(self, meas: np.ndarray, sector: str) -> np.ndarray:
        """(rounds, rows, batch) outcome flips of one sector."""
        return meas[self.index[sector]]

    def detectors(self, meas: np.ndarray, sector: str) -> np.ndarray:
        """(rounds*rows, batch): round 0 raw, later rounds XOR the previous round."""
        m = self.raw(meas, sector)
        d = m.copy()
        d[1:] ^= m[:-1]
        return d.reshape(-1, m.shape[-1])


def detectors_to_rounds(dets: np.ndarray, rows: int) -> np.ndarray:
    """Invert the detector XOR: (..., rounds*rows) bits -> (..., rounds, rows) raw outcome flips."""
    d = dets.reshape(*dets.shape[:-1], -1, rows)
    return np.bitwise_xor.accumulate(d, axis=-2)
