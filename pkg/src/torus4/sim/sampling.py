"""Monte Carlo shot sampling.

Shots are produced in blocks; block ``b`` of a run with master seed ``s``
draws from its own stream keyed by ``(s, b)``, so results do not depend on
how blocks are spread over threads.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import gf2
from .._kernels import sample_faults
from .faults import EffectTable, logical_mask
from .frame import SECTORS, compile_layers, propagate
from .noise import NoisyCircuit

DEFAULT_BLOCK = 4096


@dataclass
class ShotBatch:
    """Packed detector bits, residual data Paulis and logical flips for a block of shots.

    Sector ``X`` holds X errors (seen by Z checks); sector ``Z`` holds Z errors.
    """

    det: dict[str, np.ndarray]  # packed (shots, words)
    res: dict[str, np.ndarray]  # packed (shots, words)
    log: dict[str, np.ndarray]  # uint8 (shots,)
    num_detectors: dict[str, int]
    num_data: int
    seed: int
    blocks: tuple[int, ...]
    nfaults: np.ndarray | None = None

    @property
    def shots(self) -> int:
        return len(self.log["X"])

    def det_bits(self, sector: str) -> np.ndarray:
        return gf2.unpack_rows(self.det[sector], self.num_detectors[sector])

    def res_bits(self, sector: str) -> np.ndarray:
        return gf2.unpack_rows(self.res[sector], self.num_data)

    def logical_bits(self, sector: str) -> np.ndarray:
        return ((self.log[sector][:, None] >> np.arange(6)) & 1).astype(np.uint8)

    @staticmethod
    def concat(parts: list["ShotBatch"]) -> "ShotBatch":
        f = parts[0]
        nfa = [p.nfaults for p in parts]
        return ShotBatch({s: np.vstack([p.det[s] for p in parts]) for s in SECTORS},
                         {s: np.vstack([p.res[s] for p in parts]) for s in SECTORS},
                         {s: np.concatenate([p.log[s] for p in parts]) for s in SECTORS},
                         f.num_detectors, f.num_data, f.seed, tuple(b for p in parts for b in p.blocks),
                         None if any(x is None for x in nfa) else np.concatenate(nfa))

    def save(self, path: str | Path) -> None:
        """Binary file: one JSON header line, then the packed arrays in header order."""
        arrays = [("det_X", self.det["X"]), ("det_Z", self.det["Z"]), ("res_X", self.res["X"]),
                  ("res_Z", self.res["Z"]), ("log_X", self.log["X"]), ("log_Z", self.log["Z"])]
        header = {"shots": self.shots, "num_detectors": self.num_detectors, "num_data": self.num_data,
                  "seed": self.seed, "blocks": list(self.blocks),
                  "arrays": [[n, str(a.dtype), list(a.shape)] for n, a in arrays]}
        with open(path, "wb") as fh:
            fh.write((json.dumps(header) + "\n").encode())
            for _, a in arrays:
                fh.write(np.ascontiguousarray(a).tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "ShotBatch":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
            arr = {}
            for name, dtype, shape in header["arrays"]:
                n = int(np.prod(shape)) * np.dtype(dtype).itemsize
                arr[name] = np.frombuffer(fh.read(n), dtype=dtype).reshape(shape).copy()
        return cls({s: arr[f"det_{s}"] for s in SECTORS}, {s: arr[f"res_{s}"] for s in SECTORS},
                   {s: arr[f"log_{s}"] for s in SECTORS}, header["num_detectors"], header["num_data"],
                   header["seed"], tuple(header["blocks"]))


def block_seed(seed: int, block: int) -> int:
    return int(np.random.SeedSequence([seed, block]).generate_state(1)[0])


class TableSampler:
    """Fast sampler driven by the precomputed component-effect table."""

    def __init__(self, table: EffectTable):
        self.table = table
        probs = table.chan_prob
        groups = sorted({float(p) for p in probs if p > 0})
        chans = [np.flatnonzero(probs == p) for p in groups]
        self.grp_p = np.array(groups, dtype=np.float64)
        self.grp_ptr = np.concatenate([[0], np.cumsum([len(c) for c in chans])]).astype(np.int64)
        self.grp_chan = (np.concatenate(chans) if chans else np.zeros(0)).astype(np.int64)

    def sample_block(self, shots: int, seed: int, block: int) -> ShotBatch:
        t = self.table
        sx, sz = t.sectors["X"], t.sectors["Z"]
        out = {
            "dx": np.zeros((shots, sx.det.shape[1]), dtype=np.uint64),
            "rx": np.zeros((shots, sx.res.shape[1]), dtype=np.uint64),
            "lx": np.zeros(shots, dtype=np.uint8),
            "dz": np.zeros((shots, sz.det.shape[1]), dtype=np.uint64),
            "rz": np.zeros((shots, sz.res.shape[1]), dtype=np.uint64),
            "lz": np.zeros(shots, dtype=np.uint8),
            "nf": np.zeros(shots, dtype=np.int64),
        }
        sample_faults(shots, block_seed(seed, block), self.grp_p, self.grp_ptr, self.grp_chan,
                      t.chan_nout, t.chan_comp, t.comp_sector, t.comp_local,
                      sx.det, sx.res, sx.log, sz.det, sz.res, sz.log,
                      out["dx"], out["rx"], out["lx"], out["dz"], out["rz"], out["lz"], out["nf"])
        return ShotBatch({"X": out["dx"], "Z": out["dz"]}, {"X": out["rx"], "Z": out["rz"]},
                         {"X": out["lx"], "Z": out["lz"]},
                         {"X": sx.num_detectors, "Z": sz.num_detectors}, sx.num_data, seed, (block,), out["nf"])


def frame_sample_block(nc: NoisyCircuit, dual: dict[str, np.ndarray], shots: int, seed: int,
                       block: int) -> ShotBatch:
    """Reference sampler: draws every channel directly and propagates frames with numpy."""
    from .frame import SectorLayout

    rng = np.random.Generator(np.random.Philox(key=block_seed(seed, block)))
    c = nc.circuit
    inject: dict = {}
    nfault = np.zeros(shots, dtype=np.int64)
    for ch in nc.channels:
        if ch.prob <= 0:
            continue
        fired = np.flatnonzero(rng.random(shots) < ch.prob)
        if fired.size == 0:
            continue
        nfault[fired] += 1
        outs = rng.integers(0, len(ch.outcomes), size=fired.size)
        lst = inject.setdefault((ch.layer, ch.when), [])
        for col, o in zip(fired, outs):
            for q, x, z in ch.outcomes[o]:
                lst.append((q, col, bool(x), bool(z)))
    inj = {k: (np.array([a[0] for a in v], dtype=np.int64), np.array([a[1] for a in v], dtype=np.int64),
               np.array([a[2] for a in v], dtype=bool), np.array([a[3] for a in v], dtype=bool))
           for k, v in inject.items()}
    fr = propagate(c, shots, inj, compile_layers(c))
    layout = SectorLayout(c)
    det, res, log, nd = {}, {}, {}, {}
    for sector in SECTORS:
        d = layout.detectors(fr.meas, sector).T
        r = (fr.x if sector == "X" else fr.z).T.astype(np.uint8)
        det[sector] = gf2.pack_rows(d).reshape(shots, -1)
        res[sector] = gf2.pack_rows(r).reshape(shots, -1)
        log[sector] = logical_mask(r, dual[sector])
        nd[sector] = layout.num_detectors(sector)
    return ShotBatch(det, res, log, nd, c.num_data, seed, (block,), nfault)


def iter_shot_blocks(sampler: TableSampler, shots: int, seed: int, block_size: int = DEFAULT_BLOCK,
                     threads: int = 1, first_block: int = 0):
    """Yield ShotBatch objects in block order (blocks may be computed concurrently)."""
    sizes = [min(block_size, shots - s) for s in range(0, shots, block_size)]
    jobs = [(n, first_block + i) for i, n in enumerate(sizes)]
    if threads <= 1:
        for n, b in jobs:
            yield sampler.sample_block(n, seed, b)
        return
    with ThreadPoolExecutor(threads) as pool:
        yield from pool.map(lambda job: sampler.sample_block(job[0], seed, job[1]), jobs)


def sample_shots(sampler: TableSampler, shots: int, seed: int, block_size: int = DEFAULT_BLOCK,
                 threads: int = 1) -> ShotBatch:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return ShotBatch.concat(list(iter_shot_blocks(sampler, shots, seed, block_size, threads)))
