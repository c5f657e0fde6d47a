"""Single-fault enumeration.

Every fault is a Pauli at one noise location.  Its effect on the detectors
and on the final data frame is linear in the Pauli, so effects are first
computed for the elementary components (an X or a Z on one qubit at one
location) by a single batched frame propagation, and each fault's effect is
the XOR of its components' effects.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .. import gf2
from ..homology import LogicalBasis
from .frame import SECTORS, SectorLayout, compile_layers, propagate
from .noise import NoisyCircuit

FAULT_CLASSES = ("qubit", "measurement_flip", "ancillary", "partial")
_CHUNK = 8192


@dataclass
class SectorEffects:
    """Packed effects of the components (or faults) of one sector."""

    det: np.ndarray  # (K, words) detector bits
    res: np.ndarray  # (K, words) residual Pauli on data
    log: np.ndarray  # (K,) uint8, bit i = logical i flipped
    num_detectors: int
    num_data: int

    def det_bits(self) -> np.ndarray:
        return gf2.unpack_rows(self.det, self.num_detectors)

    def res_bits(self) -> np.ndarray:
        return gf2.unpack_rows(self.res, self.num_data)


@dataclass
class EffectTable:
    """Elementary components and the channel -> outcome -> component structure."""

    comp_keys: list[tuple[int, str, int, int]]  # (layer, when, qubit, is_z)
    comp_sector: np.ndarray  # 0 -> X sector, 1 -> Z sector
    comp_local: np.ndarray
    chan_prob: np.ndarray
    chan_nout: np.ndarray
    chan_comp: np.ndarray  # (C, 15, 4) global component ids, -1 padded
    sectors: dict[str, SectorEffects]
    layout: SectorLayout


def logical_mask(res_bits: np.ndarray, dual: np.ndarray) -> np.ndarray:
    """uint8 mask of logical flips: bit i is the parity of the overlap with ``dual[i]``."""
    par = gf2.matmul(res_bits, dual.T)
    return (par.astype(np.uint8) << np.arange(par.shape[1], dtype=np.uint8)).sum(axis=1).astype(np.uint8)


def build_effect_table(nc: NoisyCircuit, basis: LogicalBasis) -> EffectTable:
    c = nc.circuit
    keys: dict[tuple[int, str, int, int], int] = {}
    chan_comp = np.full((len(nc.channels), 15, 4), -1, dtype=np.int64)
    nout = np.zeros(len(nc.channels), dtype=np.int64)
    for ci, ch in enumerate(nc.channels):
        nout[ci] = len(ch.outcomes)
        for o, paulis in enumerate(ch.outcomes):
            slot = 0
            for q, x, z in paulis:
                for is_z, bit in ((0, x), (1, z)):
                    if bit:
                        chan_comp[ci, o, slot] = keys.setdefault((ch.layer, ch.when, q, is_z), len(keys))
                        slot += 1
    comp_keys = list(keys)
    comp_sector = np.array([k[3] for k in comp_keys], dtype=np.int64)
    comp_local = np.zeros(len(comp_keys), dtype=np.int64)
    for s in (0, 1):
        sel = np.flatnonzero(comp_sector == s)
        comp_local[sel] = np.arange(sel.size)

    layout = SectorLayout(c)
    compiled = compile_layers(c)
    det_chunks = {s: [] for s in SECTORS}
    res_chunks = {s: [] for s in SECTORS}
    for s_idx, sector in enumerate(SECTORS):
        sel = np.flatnonzero(comp_sector == s_idx)
        for start in range(0, max(sel.size, 1), _CHUNK):
            part = sel[start:start + _CHUNK]
            if part.size == 0:
                continue
            inject: dict = {}
            for col, gid in enumerate(part):
                layer, when, q, is_z = comp_keys[gid]
                inject.setdefault((layer, when), []).append((q, col, not is_z, bool(is_z)))
            inject = {k: tuple(np.array(v) for v in zip(*items)) for k, items in inject.items()}
            inject = {k: (v[0].astype(np.int64), v[1].astype(np.int64), v[2].astype(bool), v[3].astype(bool))
                      for k, v in inject.items()}
            fr = propagate(c, part.size, inject, compiled)
            det_chunks[sector].append(layout.detectors(fr.meas, sector).T)
            res_chunks[sector].append((fr.x if sector == "X" else fr.z).T)
    sectors = {}
    for sector in SECTORS:
        nd = layout.num_detectors(sector)
        det = np.vstack(det_chunks[sector]) if det_chunks[sector] else np.zeros((0, nd), dtype=bool)
        res = np.vstack(res_chunks[sector]) if res_chunks[sector] else np.zeros((0, c.num_data), dtype=bool)
        dual = basis.lz if sector == "X" else basis.lx
        sectors[sector] = SectorEffects(gf2.pack_rows(det).reshape(len(det), -1),
                                        gf2.pack_rows(res).reshape(len(res), -1),
                                        logical_mask(res.astype(np.uint8), dual), nd, c.num_data)
    chan_prob = np.array([ch.prob for ch in nc.channels], dtype=np.float64)
    return EffectTable(comp_keys, comp_sector, comp_local, chan_prob, nout, chan_comp, sectors, layout)


class Fault(NamedTuple):
    channel: int
    outcome: int
    kind: str  # channel kind
    layer: int
    round: int
    pauli: str
    prob: float
    cls: str


@dataclass
class FaultDictionary:
    faults: list[Fault]
    sectors: dict[str, SectorEffects]  # per-fault effects, same order as ``faults``
    table: EffectTable = field(repr=False)
    num_data: int = 0

    def __len__(self) -> int:
        return len(self.faults)

    def syndrome(self, i: int) -> np.ndarray:
        """Concatenated X-sector then Z-sector detector bits of fault ``i``."""
        return np.concatenate([self.sectors[s].det_bits()[i] for s in SECTORS])

    def classes(self) -> np.ndarray:
        return np.array([f.cls for f in self.faults])

    def by_syndrome(self) -> dict[bytes, list[int]]:
        key = np.hstack([self.sectors[s].det for s in SECTORS])
        out: dict[bytes, list[int]] = {}
        for i, row in enumerate(key):
            out.setdefault(row.tobytes(), []).append(i)
        return out

    def nontrivial(self) -> np.ndarray:
        m = np.zeros(len(self), dtype=bool)
        for s in SECTORS:
            e = self.sectors[s]
            m |= e.det.any(axis=1) | e.res.any(axis=1) | (e.log != 0)
        return m


def _combine(comp: SectorEffects, ids: np.ndarray, mask: np.ndarray) -> SectorEffects:
    """XOR component effects: ``ids`` (F, 4) local ids, ``mask`` marks valid entries."""
    F = ids.shape[0]
    det = np.zeros((F, comp.det.shape[1]), dtype=np.uint64)
    res = np.zeros((F, comp.res.shape[1]), dtype=np.uint64)
    log = np.zeros(F, dtype=np.uint8)
    for slot in range(ids.shape[1]):
        m = mask[:, slot]
        det[m] ^= comp.det[ids[m, slot]]
        res[m] ^= comp.res[ids[m, slot]]
        log[m] ^= comp.log[ids[m, slot]]
    return SectorEffects(det, res, log, comp.num_detectors, comp.num_data)


def enumerate_single_faults(nc: NoisyCircuit, basis: LogicalBasis, include_qubit: bool = True,
                            table: EffectTable | None = None) -> FaultDictionary:
    """All single-location single-Pauli faults with their detector and residual effects."""
    table = table or build_effect_table(nc, basis)
    nd = nc.circuit.num_data
    faults, gids = [], []
    for ci, ch in enumerate(nc.channels):
        if ch.kind == "data" and not include_qubit:
            continue
        for o, paulis in enumerate(ch.outcomes):
            faults.append((ci, o, ch, paulis))
            gids.append(table.chan_comp[ci, o])
    gids = np.array(gids, dtype=np.int64).reshape(-1, 4)
    valid = gids >= 0
    sectors = {}
    for s_idx, sector in enumerate(SECTORS):
        m = valid & (table.comp_sector[np.where(valid, gids, 0)] == s_idx)
        local = table.comp_local[np.where(m, gids, 0)]
        sectors[sector] = _combine(table.sectors[sector], local, m)
    res_any = sectors["X"].res.any(axis=1) | sectors["Z"].res.any(axis=1)
    det_any = sectors["X"].det.any(axis=1) | sectors["Z"].det.any(axis=1)
    out = []
    for i, (ci, o, ch, paulis) in enumerate(faults):
        if ch.kind == "data":
            cls = "qubit"
        elif not res_any[i] and det_any[i]:
            cls = "measurement_flip"
        elif all(q >= nd for q, _, _ in paulis):
            cls = "ancillary"
        else:
            cls = "partial"
        out.append(Fault(ci, o, ch.kind, ch.layer, ch.round, ch.pauli_label(o),
                         ch.prob / len(ch.outcomes), cls))
    return FaultDictionary(out, sectors, table, nd)


def inject_faults(fd: FaultDictionary, combos, seed: int = -1):
    """ShotBatch whose shot ``i`` carries exactly the faults ``combos[i]`` (XOR of their effects)."""
    from .sampling import ShotBatch

    combos = [tuple(c) for c in combos]
    width = max((len(c) for c in combos), default=0)
    idx = np.full((len(combos), max(width, 1)), -1, dtype=np.int64)
    for i, c in enumerate(combos):
        idx[i, :len(c)] = c
    mask = idx >= 0
    det, res, log, nd = {}, {}, {}, {}
    for sector, eff in fd.sectors.items():
        comb = _combine(eff, np.where(mask, idx, 0), mask)
        det[sector], res[sector], log[sector] = comb.det, comb.res, comb.log
        nd[sector] = eff.num_detectors
    return ShotBatch(det, res, log, nd, fd.num_data, seed, (), mask.sum(axis=1))
