"""Memory-experiment protocol, rate statistics and machine-spec arithmetic."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from .circuit import build_round, repeat_rounds
from .complex import CssCode, css_from_lattice
from .homology import distance_exact, distance_upper_bound, logical_basis_linear
from .lattice import SIMULATION_LATTICES, CODE_TABLE, HnfMatrix, LatticeError, load_lattice, named_lattice
from .sim import NoiseModel, TableSampler, enumerate_single_faults, insert_noise, iter_shot_blocks

log = logging.getLogger(__name__)

K_LOGICAL = 6
DEFAULT_P_GRID = (1e-2, 5e-3, 3e-3, 2e-3, 1e-3)
STARFISH_DEPTH, COMPACT_DEPTH = 16, 8


class NoiseToggles(BaseModel):
    model_config = ConfigDict(extra="forbid")
    after_prep: bool = True
    after_1q: bool = False
    after_2q: bool = True
    before_meas: bool = True
    data_before_round: bool = False


class DecoderConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")
    table_depth: int = Field(2, ge=0)
    k_max: int = Field(4, ge=0)
    budget: int = Field(2_000_000, ge=1)
    bp_iters: int = Field(30, ge=1)
    bp_scale: float = Field(0.625, gt=0)
    osd_always: bool = True


class MemoryExperimentConfig(BaseModel):
    """One sweep of the memory benchmark: ``rounds`` noisy rounds plus a noiseless one."""

    model_config = ConfigDict(extra="forbid")
    lattice: str | list[int] | list[list[int]] = "Det3"
    circuit: Literal["starfish", "compact"] = "compact"
    rounds: int | None = Field(None, ge=1)
    p: list[float] = Field(default_factory=lambda: list(DEFAULT_P_GRID))
    shots: int = Field(100_000, ge=1)
    decoder: Literal["power", "bposd"] = "bposd"
    seed: int = 0
    postselect_weight: int | None = Field(None, ge=0)
    target_rel_ci: float | None = Field(0.3, gt=0)
    min_shots: int = Field(1000, ge=1)
    block_size: int = Field(4096, ge=1)
    threads: int = Field(1, ge=1)
    noise: NoiseToggles = Field(default_factory=NoiseToggles)
    decoder_options: DecoderConfig = Field(default_factory=DecoderConfig)


def resolve_lattice(spec) -> HnfMatrix:
    """Lattice from a table name, a 10-entry shorthand, a 4x4 HNF, a path or a JSON string."""
    if isinstance(spec, HnfMatrix):
        return spec
    if isinstance(spec, str):
        if "," in spec and not spec.lstrip().startswith("{"):
            return HnfMatrix.from_shorthand(spec)
        try:
            return named_lattice(spec)
        except LatticeError:
            return load_lattice(spec)
    if isinstance(spec, (list, tuple)) and len(spec) == 10:
        return HnfMatrix.from_shorthand(spec)
    if isinstance(spec, (list, tuple)) and len(spec) == 4:
        return HnfMatrix.from_rows(spec)
    raise LatticeError(f"cannot interpret lattice {spec!r}")


def code_distance(h: HnfMatrix, code: CssCode | None = None, exact_limit: int = 60, seed: int = 0) -> int:
    """Tabulated distance when known, else exact (small n) or the probabilistic upper bound."""
    for table in (CODE_TABLE, SIMULATION_LATTICES):
        for short, d in table.values():
            if tuple(short) == h.shorthand:
                return d
    code = code or css_from_lattice(h)
    basis = logical_basis_linear(code)
    if code.n <= exact_limit:
        rep = distance_exact(code, basis, w_max=8)
        if rep.d is not None:
            return rep.d
    return distance_upper_bound(code, basis, trials=2000, seed=seed).d


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def per_round(p_block: float, rounds: int) -> float:
    return p_block / rounds


@dataclass
class SweepPoint:
    p: float
    shots: int
    discarded: int
    failures: int
    failures_x: int
    failures_z: int
    p_fail: float
    ci_low: float
    ci_high: float
    per_round: float
    per_round_low: float
    per_round_high: float
    per_qubit: float
    seed: int
    runtime: float

    @property
    def discard_fraction(self) -> float:
        tot = self.shots + self.discarded
        return self.discarded / tot if tot else 0.0


@dataclass
class SweepResult:
    config: dict
    rounds: int
    distance: int
    points: list[SweepPoint] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"config": self.config, "rounds": self.rounds, "distance": self.distance,
                           "points": [asdict(p) for p in self.points]}, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(SweepPoint.__dataclass_fields__)
        w = csv.writer(buf)
        w.writerow(names)
        for pt in self.points:
            w.writerow([getattr(pt, n) for n in names])
        return buf.getvalue()

    def plot_data(self) -> str:
        """Columns p, per-round rate and its interval, plus the unencoded reference k*p."""
        lines = ["p,per_round,low,high,unencoded"]
        for pt in self.points:
            lines.append(f"{pt.p:g},{pt.per_round:.6g},{pt.per_round_low:.6g},{pt.per_round_high:.6g},"
                         f"{K_LOGICAL * pt.p:.6g}")
        return "\n".join(lines) + "\n"


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index, 0x7E57]).generate_state(1)[0])


def build_decoder(cfg: MemoryExperimentConfig, h: HnfMatrix, code: CssCode, basis, nc, fd=None):
    from .decoders import JointBpOsdDecoder, SingleShotPowerDecoder

    opt = cfg.decoder_options
    if cfg.decoder == "power":
        return SingleShotPowerDecoder(h, code, cfg.circuit, basis, opt.table_depth, opt.k_max, opt.budget,
                                      NoiseModel(0.0, **cfg.noise.model_dump()))
    return JointBpOsdDecoder(nc, basis, fd, opt.bp_iters, opt.bp_scale, opt.osd_always)


def run_memory_experiment(cfg: MemoryExperimentConfig, progress=None) -> SweepResult:
    """Sample and decode each p point; deterministic for a fixed master seed."""
    h = resolve_lattice(cfg.lattice)
    code = css_from_lattice(h)
    basis = logical_basis_linear(code)
    d = code_distance(h, code)
    rounds = cfg.rounds or d
    circuit = repeat_rounds(build_round(cfg.circuit, h, code), rounds)
    result = SweepResult(cfg.model_dump(), rounds, d)
    power_decoder = None
    for i, p in enumerate(cfg.p):
        t0 = time.perf_counter()
        nm = NoiseModel(p, **cfg.noise.model_dump())
        nc = insert_noise(circuit, nm)
        if cfg.decoder == "power":
            fd = None
            from .sim import build_effect_table
            table = build_effect_table(nc, basis)
            power_decoder = power_decoder or build_decoder(cfg, h, code, basis, nc)
            decoder = power_decoder
        else:
            fd = enumerate_single_faults(nc, basis, include_qubit=False)
            table = fd.table
            decoder = build_decoder(cfg, h, code, basis, nc, fd)
        sampler = TableSampler(table)
        seed = _point_seed(cfg.seed, i)
        shots = discarded = fails = fx = fz = 0
        for batch in iter_shot_blocks(sampler, cfg.shots, seed, cfg.block_size, cfg.threads):
            out = decoder.decode_batch(batch)
            keep = np.ones(batch.shots, dtype=bool)
            if cfg.postselect_weight is not None:
                keep = out.weight <= cfg.postselect_weight
            discarded += int((~keep).sum())
            shots += int(keep.sum())
            fails += int((out.any_fail & keep).sum())
            fx += int((out.fail["X"] & keep).sum())
            fz += int((out.fail["Z"] & keep).sum())
            if progress:
                progress(p, shots, fails)
            if cfg.target_rel_ci and shots >= cfg.min_shots and fails > 0:
                lo, hi = wilson_interval(fails, shots)
                if (hi - lo) / 2 <= cfg.target_rel_ci * fails / shots:
                    break
        rate = fails / shots if shots else 0.0
        lo, hi = wilson_interval(fails, shots)
        result.points.append(SweepPoint(p, shots, discarded, fails, fx, fz, rate, lo, hi,
                                        rate / rounds, lo / rounds, hi / rounds, rate / rounds / K_LOGICAL,
                                        seed, time.perf_counter() - t0))
        log.info("p=%g shots=%d failures=%d per-round=%.3g", p, shots, fails, rate / rounds)
    return result


@dataclass
class PseudoThreshold:
    p_star: float
    low: float | None
    high: float | None


def _crossing(ps: np.ndarray, ys: np.ndarray, k: int) -> float | None:
    with np.errstate(divide="ignore"):
        f = np.log(ys) - np.log(k * ps)
    for a in range(len(ps) - 1):
        if not (np.isfinite(f[a]) and np.isfinite(f[a + 1])):
            continue
        if f[a] == 0:
            return float(ps[a])
        if f[a] * f[a + 1] < 0:
            la, lb = np.log(ps[a]), np.log(ps[a + 1])
            return float(np.exp(la + (lb - la) * f[a] / (f[a] - f[a + 1])))
    if len(f) and f[-1] == 0:
        return float(ps[-1])
    return None


def pseudo_threshold(curve, k: int = K_LOGICAL) -> PseudoThreshold:
    """Crossing of the per-round block rate P_L(p) with k*p, interpolated in log-log.

    ``curve`` is a SweepResult or a sequence of (p, P_L) pairs.  The interval
    comes from crossing the upper and lower confidence curves.
    """
    if isinstance(curve, SweepResult):
        pts = sorted(curve.points, key=lambda q: q.p)
        ps = np.array([q.p for q in pts])
        ys = np.array([q.per_round for q in pts])
        hi = np.array([q.per_round_high for q in pts])
        lo = np.array([q.per_round_low for q in pts])
    else:
        arr = np.array(sorted(curve), dtype=float)
        ps, ys = arr[:, 0], arr[:, 1]
        hi = lo = None
    if len(ps) < 2:
        raise ValueError("crossing not bracketed")
    star = _crossing(ps, ys, k)
    if star is None:
        raise ValueError("crossing not bracketed")
    # an upper rate curve crosses earlier, a lower one later
    low = _crossing(ps, hi, k) if hi is not None else None
    high = _crossing(ps, lo, k) if lo is not None else None
    return PseudoThreshold(star, low, high)


@dataclass
class SlopeFit:
    slope: float
    stderr: float
    intercept: float
    points: int


def fit_slope(curve, k: int = K_LOGICAL, below_threshold: bool = True) -> SlopeFit:
    """Least-squares slope of log P_L against log p over points with failures (sub-threshold by default)."""
    if isinstance(curve, SweepResult):
        pairs = [(q.p, q.per_round) for q in curve.points]
    else:
        pairs = list(curve)
    pairs = [(p, y) for p, y in pairs if y > 0 and (not below_threshold or y < k * p)]
    if len(pairs) < 3:
        raise ValueError("insufficient points for a slope fit (need >= 3)")
    x = np.log([p for p, _ in pairs])
    y = np.log([v for _, v in pairs])
    r = stats.linregress(x, y)
    return SlopeFit(float(r.slope), float(r.stderr), float(r.intercept), len(pairs))


@dataclass(frozen=True)
class SpecsRow:
    det: int
    d: int
    blocks: int
    logical_qubits: int
    data_qubits: int
    measurements_per_cycle: int
    depth_starfish: int = STARFISH_DEPTH
    depth_compact: int = COMPACT_DEPTH


def specs_table(entries) -> list[SpecsRow]:
    """Machine-spec arithmetic per (det, d, blocks): 6b logicals, 6b*Det data qubits, 8b*Det measurements."""
    rows = []
    for det, d, b in entries:
        if det < 1 or b < 1:
            raise ValueError("det and blocks must be positive")
        rows.append(SpecsRow(det, d, b, K_LOGICAL * b, 6 * b * det, 8 * b * det))
    return rows


def specs_text(rows: list[SpecsRow]) -> str:
    hdr = ["Det", "d", "blocks", "logical qubits", "data qubits", "measurements/cycle",
           "starfish depth", "compact depth"]
    lines = ["\t".join(hdr)]
    for r in rows:
        lines.append("\t".join(str(v) for v in (r.det, r.d, r.blocks, r.logical_qubits, r.data_qubits,
                                                r.measurements_per_cycle, r.depth_starfish, r.depth_compact)))
    return "\n".join(lines) + "\n"


def unencoded_rate(p: float, k: int = K_LOGICAL) -> float:
    return k * p


def relative_ci(fails: int, shots: int) -> float:
    if fails == 0:
        return math.inf
    lo, hi = wilson_interval(fails, shots)
    return (hi - lo) / 2 / (fails / shots)
