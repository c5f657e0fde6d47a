"""Detector-error-model construction and joint BP+OSD decoding."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import gf2
from .._kernels import bposd_batch
from ..sim.faults import FaultDictionary


@dataclass
class DecodingGraphModel:
    """Fault mechanisms of one sector merged by (detectors, logical action)."""

    sector: str
    H: np.ndarray  # (detectors, columns) 0/1
    priors: np.ndarray
    logicals: np.ndarray  # uint8 mask per column
    members: list[list[int]]  # fault indices merged into each column
    undetectable: float  # total probability of faults flipping a logical with no detector

    @property
    def num_detectors(self) -> int:
        return self.H.shape[0]

    @property
    def num_columns(self) -> int:
        return self.H.shape[1]

    def to_dem(self) -> str:
        """Detector-error-model style text: ``error(p) D.. L..`` per column."""
        lines = [f"# sector {self.sector} detectors={self.num_detectors} columns={self.num_columns}"]
        for j in range(self.num_columns):
            dets = " ".join(f"D{r}" for r in np.flatnonzero(self.H[:, j]))
            logs = " ".join(f"L{i}" for i in range(6) if self.logicals[j] >> i & 1)
            lines.append(f"error({self.priors[j]:.6g}) {dets} {logs}".rstrip())
        return "\n".join(lines) + "\n"


def build_joint_model(fd: FaultDictionary, sector: str) -> DecodingGraphModel:
    eff = fd.sectors[sector]
    probs = np.array([f.prob for f in fd.faults])
    groups: dict[tuple[bytes, int], list[int]] = {}
    undetectable = 1.0
    for i in range(len(fd)):
        if probs[i] <= 0:
            continue
        has_det = eff.det[i].any()
        if not has_det:
            if eff.log[i]:
                undetectable *= 1 - probs[i]
            continue
        groups.setdefault((eff.det[i].tobytes(), int(eff.log[i])), []).append(i)
    members = list(groups.values())
    first = [m[0] for m in members]
    H = eff.det_bits()[first].T.copy() if first else np.zeros((eff.num_detectors, 0), dtype=np.uint8)
    priors = np.array([1 - np.prod(1 - probs[m]) for m in members])
    logicals = np.array([eff.log[m[0]] for m in members], dtype=np.uint8)
    return DecodingGraphModel(sector, H, priors, logicals, members, 1 - undetectable)


class BpOsdDecoder:
    def __init__(self, model: DecodingGraphModel, max_iter: int = 30, scale: float = 0.625,
                 osd_always: bool = True):
        self.model = model
        self.max_iter = max_iter
        self.scale = scale
        self.osd_always = osd_always
        H = model.H.astype(bool)
        rows, cols = np.nonzero(H)  # row-major order: edges grouped by row
        self.row_ptr = np.searchsorted(rows, np.arange(H.shape[0] + 1)).astype(np.int64)
        self.edge_col = cols.astype(np.int64)
        order = np.argsort(cols, kind="stable")
        self.col_edges = order.astype(np.int64)
        self.col_ptr = np.searchsorted(cols[order], np.arange(H.shape[1] + 1)).astype(np.int64)
        words = (H.shape[0] + 63) // 64
        self.col_packed = (gf2.pack_rows(H.T.astype(np.uint8)).reshape(H.shape[1], words) if H.shape[1]
                           else np.zeros((0, words), dtype=np.uint64))
        p = np.clip(model.priors, 1e-15, 1 - 1e-15)
        self.llr0 = np.log((1 - p) / p)

    def decode_packed(self, dets: np.ndarray, log: np.ndarray):
        """Returns (fail, weight, osd_flag, predicted_logical) arrays for packed detector rows."""
        n = len(dets)
        fail = np.zeros(n, dtype=np.bool_)
        weight = np.zeros(n, dtype=np.int64)
        osd = np.zeros(n, dtype=np.int64)
        pred = np.zeros(n, dtype=np.uint8)
        bposd_batch(np.ascontiguousarray(dets), np.ascontiguousarray(log), self.model.num_detectors,
                    self.row_ptr, self.edge_col, self.col_ptr, self.col_edges, self.col_packed,
                    self.model.logicals, self.llr0, self.max_iter, self.scale, self.osd_always,
                    fail, weight, osd, pred)
        return fail, weight, osd, pred

    def decode(self, syndrome) -> np.ndarray:
        """Correction indicator over model columns for one 0/1 syndrome."""
        from .._kernels import min_sum, osd0

        syn = gf2.as_f2(syndrome).astype(np.int64)
        m = self.model
        E = len(self.edge_col)
        N = m.num_columns
        v2c, c2v, post = np.zeros(E), np.zeros(E), np.zeros(N)
        hard = np.zeros(N, dtype=np.int64)
        if not syn.any():
            return np.zeros(N, dtype=np.uint8)
        converged = min_sum(syn, self.llr0, self.row_ptr, self.edge_col, self.col_ptr, self.col_edges,
                            self.max_iter, self.scale, v2c, c2v, post, hard)
        if converged and not self.osd_always:
            return hard.astype(np.uint8)
        x = np.zeros(N, dtype=np.int64)
        nd = m.num_detectors
        ok = osd0(gf2.pack_rows(syn)[0], np.argsort(post), self.col_packed,
                  np.zeros((nd, self.col_packed.shape[1]), dtype=np.uint64),
                  np.zeros((nd, (nd + 63) // 64), dtype=np.uint64), np.zeros(nd, dtype=np.int64), x)
        if not ok:
            if converged:
                return hard.astype(np.uint8)
            raise ValueError("unmatchable syndrome")
        if converged and self.llr0 @ hard <= self.llr0 @ x:
            return hard.astype(np.uint8)
        return x.astype(np.uint8)


def bp_osd_decode(model: DecodingGraphModel, syndrome, max_iter: int = 30, scale: float = 0.625,
                  osd_always: bool = True) -> np.ndarray:
    return BpOsdDecoder(model, max_iter, scale, osd_always).decode(syndrome)
