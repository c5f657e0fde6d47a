"""Power decoder: subset search over known single-fault syndromes with a lookup table."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import gf2
from .._kernels import build_syndrome_table, power_search
from ..complex import CssCode
from ..sim.faults import FaultDictionary
from ..sim.frame import detectors_to_rounds

CLASS_RANK = {"qubit": 0, "measurement_flip": 1, "ancillary": 2, "partial": 3}
DEFAULT_BUDGET = 2_000_000


@dataclass
class PowerDecoderModel:
    sector: str
    S: np.ndarray  # packed candidate syndromes (n, words)
    E: np.ndarray  # packed recoveries on data (n, words)
    Esyn: np.ndarray  # packed check syndromes of the recoveries
    classes: list[str]
    sources: list[int]  # fault indices (or qubit indices for the qubit-only model)
    table_depth: int
    k_max: int
    rows: int
    num_data: int
    keys: np.ndarray = field(repr=False)
    vals: np.ndarray = field(repr=False)
    used: np.ndarray = field(repr=False)
    table_size: int = 0
    duplicates: int = 0  # syndromes shared by faults with distinct residuals
    budget: int = DEFAULT_BUDGET

    @property
    def n(self) -> int:
        return len(self.S)

    @property
    def w_per(self) -> int:
        return int(gf2.unpack_rows(self.S, self.rows).sum(axis=1).max()) if self.n else 0

    @property
    def w_table(self) -> int:
        k = gf2.unpack_rows(self.keys[self.used], self.rows)
        return int(k.sum(axis=1).max()) if len(k) else 0

    def table_entries(self) -> dict[bytes, tuple[int, ...]]:
        out = {}
        for slot in np.flatnonzero(self.used):
            out[self.keys[slot].tobytes()] = tuple(int(v) for v in self.vals[slot] if v >= 0)
        return out

    def as_tuple(self):
        return (self.S, self.E, self.Esyn, self.keys, self.vals, self.used, self.k_max, self.w_per, self.w_table)


@dataclass
class Correction:
    sector: str
    pauli: np.ndarray  # 0/1 over data qubits
    subset: tuple[int, ...]
    table: tuple[int, ...]
    fallback: bool
    residual_weight: int  # weight of the unexplained part of the target

    @property
    def cardinality(self) -> int:
        return len(self.subset) + len(self.table)


def _check_matrix(code: CssCode, sector: str) -> np.ndarray:
    return code.hz if sector == "X" else code.hx


def assemble_model(sector: str, syn: np.ndarray, rec: np.ndarray, classes: list[str], check: np.ndarray,
                   table_depth: int = 2, k_max: int = 4, budget: int = DEFAULT_BUDGET) -> PowerDecoderModel:
    """Dedup candidates by syndrome (preferred class, then lightest recovery, then index) and build the table."""
    if table_depth < 0 or k_max < 0:
        raise ValueError("table depth and k_max must be non-negative")
    rows = syn.shape[1]
    rw = rec.sum(axis=1)
    best: dict[bytes, int] = {}
    recs: dict[bytes, set[bytes]] = {}
    for i in range(len(syn)):
        if not syn[i].any():
            continue
        key = np.packbits(syn[i]).tobytes()
        recs.setdefault(key, set()).add(np.packbits(rec[i]).tobytes() if classes[i] != "partial" else b"")
        j = best.get(key)
        if j is None or (CLASS_RANK[classes[i]], rw[i], i) < (CLASS_RANK[classes[j]], rw[j], j):
            best[key] = i
    chosen = sorted(best.values(), key=lambda i: (CLASS_RANK[classes[i]], rw[i], i))
    S = syn[chosen].astype(np.uint8)
    E = rec[chosen].astype(np.uint8)
    E[[classes[i] == "partial" for i in chosen]] = 0
    Esyn = gf2.matmul(E, check.T) if len(E) else np.zeros((0, rows), dtype=np.uint8)
    Sp = gf2.pack_rows(S).reshape(len(S), -1) if len(S) else np.zeros((0, (rows + 63) // 64), np.uint64)
    n = len(S)
    combos = sum(_comb(n, j) for j in range(table_depth + 1))
    cap = 1 << max(4, int(np.ceil(np.log2(2 * combos + 1))))
    keys, vals, used, count = build_syndrome_table(Sp, table_depth, cap)
    return PowerDecoderModel(sector, Sp, gf2.pack_rows(E).reshape(n, -1) if n else np.zeros((0, 1), np.uint64),
                             gf2.pack_rows(Esyn).reshape(n, -1) if n else np.zeros((0, 1), np.uint64),
                             [classes[i] for i in chosen], chosen, table_depth, k_max, rows, rec.shape[1],
                             keys, vals, used, int(count), sum(len(v) > 1 for v in recs.values()), budget)


def _comb(n: int, k: int) -> int:
    from math import comb
    return comb(n, k) if 0 <= k <= n else 0


def build_power_model(fd: FaultDictionary, code: CssCode, sector: str, table_depth: int = 2, k_max: int = 4,
                      round_index: int = 0, budget: int = DEFAULT_BUDGET) -> PowerDecoderModel:
    """Candidates from the faults of one round: syndrome = that round's check outcomes, recovery = residual."""
    eff = fd.sectors[sector]
    rows = _check_matrix(code, sector).shape[0]
    syn = detectors_to_rounds(eff.det_bits(), rows)[:, round_index]
    return assemble_model(sector, syn, eff.res_bits(), [f.cls for f in fd.faults],
                          _check_matrix(code, sector), table_depth, k_max, budget)


def qubit_model(code: CssCode, sector: str, table_depth: int = 2, k_max: int = 4,
                budget: int = DEFAULT_BUDGET) -> PowerDecoderModel:
    """Model whose candidates are the single data-qubit errors only (used for the noiseless last round)."""
    h = _check_matrix(code, sector)
    return assemble_model(sector, np.ascontiguousarray(h.T), np.eye(code.n, dtype=np.uint8),
                          ["qubit"] * code.n, h, table_depth, k_max, budget)


def power_decode(model: PowerDecoderModel, t) -> Correction:
    """Decode one target syndrome (0/1 vector over ``model.rows`` checks)."""
    t = gf2.as_f2(t)
    if t.shape != (model.rows,):
        raise ValueError(f"target has shape {t.shape}, expected ({model.rows},)")
    tp = gf2.pack_rows(t)[0]
    out_idx = np.zeros(model.k_max + 1, dtype=np.int64)
    best_idx = np.zeros(model.k_max + 1, dtype=np.int64)
    hit, k, slot, best_k, _ = power_search(tp, model.S, model.keys, model.vals, model.used, model.k_max,
                                           model.w_per, model.w_table, model.budget, out_idx, best_idx)
    if hit:
        subset = tuple(int(i) for i in out_idx[:k])
        table = tuple(int(v) for v in model.vals[slot] if v >= 0)
    else:
        subset = tuple(int(i) for i in best_idx[:best_k])
        table = ()
    chosen = list(subset) + list(table)
    pauli = np.zeros(model.num_data, dtype=np.uint8)
    rem = t.copy()
    S = gf2.unpack_rows(model.S, model.rows)
    E = gf2.unpack_rows(model.E, model.num_data)
    for i in chosen:
        pauli ^= E[i]
        rem ^= S[i]
    return Correction(model.sector, pauli, subset, table, not hit, int(rem.sum()))
