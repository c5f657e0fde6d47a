"""Decoders: single-shot power decoding and joint multi-round BP+OSD."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import gf2
from .._kernels import single_shot_batch
from ..circuit import build_round, repeat_rounds
from ..complex import CssCode
from ..homology import LogicalBasis
from ..lattice import HnfMatrix
from ..sim import SECTORS, NoiseModel, NoisyCircuit, ShotBatch, enumerate_single_faults, insert_noise
from ..sim.faults import FaultDictionary
from ..sim.frame import detectors_to_rounds
from .bposd import BpOsdDecoder, DecodingGraphModel, bp_osd_decode, build_joint_model
from .power import (DEFAULT_BUDGET, Correction, PowerDecoderModel, assemble_model, build_power_model,
                    power_decode, qubit_model)

DECODER_MODES = ("single_shot_power", "joint_bposd")


@dataclass
class DecodeOutcome:
    fail: dict[str, np.ndarray]  # per sector, bool per shot
    weight: np.ndarray  # number of fault mechanisms in the correction, summed over sectors
    fallback: np.ndarray  # power: rounds decoded by the best-effort path; bposd: shots needing OSD

    @property
    def any_fail(self) -> np.ndarray:
        return self.fail["X"] | self.fail["Z"]


class SingleShotPowerDecoder:
    """Decode each round separately, carrying the accumulated correction into the next round."""

    mode = "single_shot_power"

    def __init__(self, h: HnfMatrix, code: CssCode, kind: str, basis: LogicalBasis, table_depth: int = 2,
                 k_max: int = 4, budget: int = DEFAULT_BUDGET, noise: NoiseModel | None = None,
                 final_table_depth: int = 2, final_k_max: int = 4):
        one = repeat_rounds(build_round(kind, h, code), 1)
        nm = noise or NoiseModel(0.0)
        self.fd = enumerate_single_faults(insert_noise(one, nm), basis)
        self.code = code
        self.budget = budget
        self.models = {s: build_power_model(self.fd, code, s, table_depth, k_max, 0, budget) for s in SECTORS}
        self.final = {s: qubit_model(code, s, final_table_depth, final_k_max, budget) for s in SECTORS}
        self.check_cols, self.dual = {}, {}
        for s in SECTORS:
            hmat = code.hz if s == "X" else code.hx
            self.check_cols[s] = gf2.pack_rows(hmat.T).reshape(code.n, -1)
            self.dual[s] = gf2.pack_rows(basis.lz if s == "X" else basis.lx).reshape(6, -1)

    def decode_batch(self, batch: ShotBatch) -> DecodeOutcome:
        fail, weight, fallback = {}, np.zeros(batch.shots, dtype=np.int64), np.zeros(batch.shots, dtype=np.int64)
        for s in SECTORS:
            rows = self.models[s].rows
            raw = detectors_to_rounds(batch.det_bits(s), rows)
            shots, r1, _ = raw.shape
            rawp = gf2.pack_rows(raw.reshape(shots * r1, rows)).reshape(shots, r1, -1)
            f = np.zeros(shots, dtype=np.bool_)
            w = np.zeros(shots, dtype=np.int64)
            fb = np.zeros(shots, dtype=np.int64)
            single_shot_batch(rawp, np.ascontiguousarray(batch.res[s]), np.ascontiguousarray(batch.log[s]),
                              self.models[s].as_tuple(), self.final[s].as_tuple(), self.check_cols[s],
                              self.dual[s], self.budget, f, w, fb)
            fail[s] = f
            weight += w
            fallback += fb
        return DecodeOutcome(fail, weight, fallback)


class JointBpOsdDecoder:
    """Decode the whole multi-round window at once with BP+OSD on the detector error model."""

    mode = "joint_bposd"

    def __init__(self, nc: NoisyCircuit, basis: LogicalBasis, fd: FaultDictionary | None = None,
                 max_iter: int = 30, scale: float = 0.625, osd_always: bool = True):
        self.fd = fd or enumerate_single_faults(nc, basis, include_qubit=False)
        self.models = {s: build_joint_model(self.fd, s) for s in SECTORS}
        self.decoders = {s: BpOsdDecoder(self.models[s], max_iter, scale, osd_always) for s in SECTORS}

    def decode_batch(self, batch: ShotBatch) -> DecodeOutcome:
        fail, weight, osd = {}, np.zeros(batch.shots, dtype=np.int64), np.zeros(batch.shots, dtype=np.int64)
        for s in SECTORS:
            f, w, o, _ = self.decoders[s].decode_packed(batch.det[s], batch.log[s])
            if (o == 2).any():
                raise ValueError("unmatchable syndrome")
            fail[s] = f
            weight += w
            osd += o
        return DecodeOutcome(fail, weight, osd)


def decode_shot(decoder, shot: ShotBatch) -> dict[str, bool]:
    """Pass/fail per sector for a single shot (``True`` = decoded without logical error)."""
    out = decoder.decode_batch(shot)
    return {s: not bool(out.fail[s][0]) for s in SECTORS}


__all__ = [
    "DECODER_MODES", "DecodeOutcome", "SingleShotPowerDecoder", "JointBpOsdDecoder", "decode_shot",
    "BpOsdDecoder", "DecodingGraphModel", "bp_osd_decode", "build_joint_model",
    "Correction", "PowerDecoderModel", "assemble_model", "build_power_model", "power_decode", "qubit_model",
]
