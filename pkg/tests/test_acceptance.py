"""Acceptance criteria; each test records one PASS/FAIL line (see the terminal summary)."""
import itertools
import json
import time
import warnings

import numpy as np
import pytest

from torus4 import gf2
from torus4.bench import MemoryExperimentConfig, fit_slope, pseudo_threshold, run_memory_experiment, specs_table
from torus4.circuit import build_round, effective_checks, repeat_rounds
from torus4.complex import boundary_matrix, css_from_lattice, stabilizer_redundancies
from torus4.decoders import JointBpOsdDecoder, SingleShotPowerDecoder
from torus4.homology import (cup_logical_basis, distance_exact, distance_upper_bound, logical_basis_linear,
                             same_logical_span)
from torus4.lattice import SIMULATION_LATTICES, CODE_TABLE, Torus, named_lattice
from torus4.sim import NoiseModel, TableSampler, build_effect_table, enumerate_single_faults, insert_noise, sample_shots
from torus4.sim.faults import inject_faults
from torus4.symmetry import (StabilizerGroup, automorphism_logical_actions, group_order, lattice_automorphisms,
                             lattice_isometries, logical_action, preserves_stabilizers, symmetry_catalog)
from conftest import lattice_code, report
from stim_oracle import to_stim

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


# 1 ---------------------------------------------------------------------------

EXACT = {"Det2": 2, "Det3": 3, "Det5": 4, "Det9": 6}
UPPER = {"Hadamard": 8, "Det16": 8, "Det18": 9, "Det45": 15}
UPPER_AT_MOST = {"Det68": 18, "Det152": 30}


def test_criterion_1_code_parameters():
    t0 = time.perf_counter()
    problems, found = [], {}
    for name in CODE_TABLE:
        h = named_lattice(name)
        code = css_from_lattice(h)
        if code.n != 6 * h.det or code.k != 6:
            problems.append(f"{name} n={code.n} k={code.k}")
        basis = logical_basis_linear(code)
        if name in EXACT:
            d = distance_exact(code, basis, w_max=EXACT[name] + 1).d
            found[name] = d
            if d != EXACT[name]:
                problems.append(f"{name} exact d={d}")
        else:
            d = distance_upper_bound(code, basis, trials=10_000, seed=0).d
            found[name] = d
            if name in UPPER and d != UPPER[name]:
                problems.append(f"{name} upper bound {d} != {UPPER[name]}")
            if name in UPPER_AT_MOST and d > UPPER_AT_MOST[name]:
                problems.append(f"{name} upper bound {d} > {UPPER_AT_MOST[name]}")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 600
    detail = ", ".join(f"{k}={v}" for k, v in found.items()) + f"; {elapsed:.0f} s"
    assert report("1 (code parameters)", ok, detail + ("; " + "; ".join(problems) if problems else "")), problems


# 2 ---------------------------------------------------------------------------

def test_criterion_2_structure():
    problems = []
    for name in SIMULATION_LATTICES:
        h = named_lattice(name)
        t = Torus(h)
        for k in range(2, 5):
            if gf2.matmul(boundary_matrix(t, k - 1), boundary_matrix(t, k)).any():
                problems.append(f"{name} boundary of boundary != 0 at {k}")
        code = css_from_lattice(h)
        det = h.det
        if gf2.matmul(code.hx, code.hz.T).any():
            problems.append(f"{name} hx hz^T != 0")
        for m, label in ((code.hx, "hx"), (code.hz, "hz")):
            if set(m.sum(axis=1).tolist()) != {6} or set(m.sum(axis=0).tolist()) != {4}:
                problems.append(f"{name} {label} weights")
            if gf2.rank(m) != 3 * det - 3:
                problems.append(f"{name} rank {label}")
        rz, rx = stabilizer_redundancies(code)
        if gf2.rank(rx) != det - 1 or gf2.rank(rz) != det - 1:
            problems.append(f"{name} redundancy rank")
        if gf2.matmul(rx, code.hx).any() or gf2.matmul(rz, code.hz).any():
            problems.append(f"{name} redundancy relation")
    ok = not problems
    assert report("2 (structural invariants)", ok,
                  f"{len(SIMULATION_LATTICES)} lattices" + ("; " + "; ".join(problems) if problems else "")), problems


# 3 ---------------------------------------------------------------------------

def test_criterion_3_circuits():
    problems, depths = [], {}
    for name in ("Det3", "Det9", "Hadamard"):
        h, code, basis = lattice_code(name)
        d = SIMULATION_LATTICES[name][1]
        for kind, depth in (("compact", 8), ("starfish", 16)):
            c = build_round(kind, h, code)
            depths[kind] = c.cnot_depth
            if c.cnot_depth != depth:
                problems.append(f"{name} {kind} depth {c.cnot_depth}")
            try:
                effective_checks(c, code)
            except AssertionError as e:
                problems.append(f"{name} {kind}: {e}")
            full = repeat_rounds(c, d)
            try:
                # independent check: stim's detector analysis rejects non-deterministic detectors
                to_stim(full)[0].detector_error_model()
            except ValueError as e:
                problems.append(f"{name} {kind}: stim: {str(e).splitlines()[0]}")
            nc = insert_noise(full, NoiseModel(0.0))
            batch = sample_shots(TableSampler(build_effect_table(nc, basis)), 100_000, seed=0)
            if batch.det["X"].any() or batch.det["Z"].any():
                problems.append(f"{name} {kind} noiseless detectors fired")
    ok = not problems
    assert report("3 (circuits)", ok, f"CNOT depth compact={depths['compact']} starfish={depths['starfish']}; "
                  "checks verified, d-round detectors deterministic (stim) and 1e5 noiseless shots trivial on Det3, Det9, Hadamard"
                  + ("; " + "; ".join(problems) if problems else "")), problems


# 4 ---------------------------------------------------------------------------

def test_criterion_4_single_fault_oracle():
    t0 = time.perf_counter()
    h, code, basis = lattice_code("Det9")
    nc = insert_noise(repeat_rounds(build_round("starfish", h, code), 6), NoiseModel(1e-3))
    fd = enumerate_single_faults(nc, basis)
    power = SingleShotPowerDecoder(h, code, "starfish", basis)
    fail9 = int(power.decode_batch(inject_faults(fd, [(i,) for i in range(len(fd))])).any_fail.sum())
    qubit = [i for i, f in enumerate(fd.faults) if f.cls == "qubit"]
    pairs = list(itertools.combinations(qubit, 2))
    fail_pairs = 0
    for start in range(0, len(pairs), 50_000):
        out = power.decode_batch(inject_faults(fd, pairs[start:start + 50_000]))
        fail_pairs += int(out.any_fail.sum())

    h3, code3, basis3 = lattice_code("Det3")
    nc3 = insert_noise(repeat_rounds(build_round("compact", h3, code3), 3), NoiseModel(1e-3))
    fd3 = enumerate_single_faults(nc3, basis3, include_qubit=False)
    bposd = JointBpOsdDecoder(nc3, basis3, fd3)
    fail3 = int(bposd.decode_batch(inject_faults(fd3, [(i,) for i in range(len(fd3))])).any_fail.sum())
    ok = fail9 == fail3 == fail_pairs == 0
    assert report("4 (single-fault oracle)", ok,
                  f"Det9 starfish power: {fail9}/{len(fd)} single faults failed, {fail_pairs}/{len(pairs)} "
                  f"qubit-fault pairs failed; Det3 compact BP+OSD: {fail3}/{len(fd3)} failed; "
                  f"{time.perf_counter() - t0:.0f} s")


# 6 ---------------------------------------------------------------------------

def test_criterion_6_specs_table():
    rows = specs_table([(16, 8, 9), (45, 15, 16), (45, 15, 250)])
    got = [(r.logical_qubits, r.data_qubits, r.measurements_per_cycle) for r in rows]
    want = [(54, 864, 1152), (96, 4320, 5760), (1500, 67500, 90000)]
    assert report("6 (specs arithmetic)", got == want, f"{got}"), got


# 7 ---------------------------------------------------------------------------

def test_criterion_7_symmetries():
    h, code, basis = lattice_code("Hadamard")
    iso = len(lattice_isometries(h))
    cells = len(lattice_automorphisms(h))
    acts = automorphism_logical_actions(h, code, basis)
    distinct = len({a.key() for a in acts})
    cat = symmetry_catalog(h, code, basis)
    group = StabilizerGroup(code)
    bad_folds = sum(not preserves_stabilizers(g.clifford, code, group) for g in cat.gates)
    rng = np.random.default_rng(2024)
    hom_fail = 0
    for _ in range(100):
        i, j = rng.integers(0, len(cat.gates), 2)
        both = logical_action([cat.gates[i], cat.gates[j]], basis, code, group)
        hom_fail += both != cat.actions[i].then(cat.actions[j])
    ok = iso == 384 and distinct == 24 and bad_folds == 0 and hom_fail == 0
    kinds = {k: sum(g.kind == k for g in cat.gates) for k in ("permutation", "hadamard_type", "phase_type")}
    assert report("7 (symmetry suite)", ok,
                  f"{iso} lattice automorphisms (isometries; {cells} preserve the cube cells), {distinct} distinct "
                  f"qubit permutations by logical action, {len(cat.dualities)} ZX dualities, gates {kinds}, "
                  f"{bad_folds} fold gates fail stabilizer check, {hom_fail}/100 homomorphism failures")

    target = 2 ** 7 * 3 ** 2 * 5 * 7 * 13 * 19 * 31
    order = group_order(cat.actions).order
    signed = group_order(cat.actions, phases=True).order
    report("7-stretch (non-gating)", target in (order, signed),
           f"generated logical group order {order} (symplectic) and {signed} (with phases) vs target {target}; "
           "19 does not divide |Sp(12,2)|, so the target is not attainable")


# 8 ---------------------------------------------------------------------------

def test_criterion_8_cup_span():
    res = {}
    for name in ("Det3", "Det9", "Hadamard"):
        h, code, basis = lattice_code(name)
        res[name] = same_logical_span(code, cup_logical_basis(h, code), basis)
    assert report("8 (cup-product span)", all(res.values()), f"{res}"), res


# 5 ---------------------------------------------------------------------------

def sweep(**kw):
    return run_memory_experiment(MemoryExperimentConfig(**kw))


def _points(res):
    return ", ".join(f"p={q.p:g}: {q.per_round:.2e} ({q.failures}/{q.shots})" for q in res.points)


def test_criterion_5a_det3_bposd_pseudo_threshold():
    res = sweep(lattice="Det3", circuit="compact", decoder="bposd", rounds=3, p=[1e-3, 1.5e-3, 2.5e-3, 3.5e-3],
                shots=1_000_000, seed=1, target_rel_ci=None, block_size=8192)
    pt = pseudo_threshold(res)
    enough = all(q.shots >= 1_000_000 for q in res.points)
    ok = enough and 1e-3 <= pt.p_star <= 4e-3
    assert report("5a (Det3 BP+OSD pseudo-threshold)", ok,
                  f"p* = {pt.p_star:.2e} [{pt.low:.2e}, {pt.high:.2e}], target [1e-3, 4e-3]; {_points(res)}")


@pytest.fixture(scope="module")
def det9_single_shot():
    return sweep(lattice="Det9", circuit="starfish", decoder="power", rounds=6, p=[1e-3, 1.5e-3, 2e-3, 2.5e-3],
                 shots=300_000, seed=5, target_rel_ci=0.1, min_shots=5000, block_size=4096)


def test_criterion_5b_slopes(det9_single_shot):
    fit9 = fit_slope(det9_single_shot)
    det3 = sweep(lattice="Det3", circuit="starfish", decoder="power", rounds=3, p=[2e-4, 4e-4, 7e-4, 1e-3],
                 shots=300_000, seed=6, target_rel_ci=0.1, min_shots=5000, block_size=4096)
    fit3 = fit_slope(det3, below_threshold=False)
    ok = fit9.slope >= 2.5 and fit3.slope < 2
    assert report("5b (single-shot slopes)", ok,
                  f"Det9 slope {fit9.slope:.2f} +- {fit9.stderr:.2f} over {fit9.points} points (need >= 2.5); "
                  f"Det3 slope {fit3.slope:.2f} +- {fit3.stderr:.2f} (need < 2)")


def test_criterion_5c_hadamard_bposd():
    low = sweep(lattice="Hadamard", circuit="compact", decoder="bposd", p=[3e-3], shots=30_000, seed=3,
                target_rel_ci=None, block_size=1000)
    high = sweep(lattice="Hadamard", circuit="compact", decoder="bposd", p=[6e-3, 1e-2], shots=8000, seed=4,
                 target_rel_ci=0.2, min_shots=2000, block_size=500)
    pq = low.points[0].per_qubit
    high.points = low.points + high.points
    pt = pseudo_threshold(high)
    ok = pq < 1e-4 and 5e-3 <= pt.p_star <= 2e-2
    assert report("5c (Hadamard BP+OSD)", ok,
                  f"per-round per-qubit rate at p=3e-3: {pq:.2e} (CI upper {low.points[0].per_round_high / 6:.2e}, "
                  f"need < 1e-4); p* = {pt.p_star:.2e} [{pt.low:.2e}, {pt.high:.2e}], target [5e-3, 2e-2]; "
                  f"{_points(high)}")


def test_criterion_5d_round_independence(det9_single_shot):
    ps = [1e-3, 2e-3]
    one = sweep(lattice="Det9", circuit="starfish", decoder="power", rounds=1, p=ps, shots=2_000_000, seed=7,
                target_rel_ci=0.1, min_shots=5000, block_size=8192)
    multi = {q.p: q.per_round for q in det9_single_shot.points}
    ratios = [max(q.per_round, multi[q.p]) / min(q.per_round, multi[q.p]) for q in one.points]
    ok = all(r <= 2 for r in ratios)
    detail = "; ".join(f"p={q.p:g}: 1 round {q.per_round:.2e} vs 6 rounds {multi[q.p]:.2e} (ratio {r:.2f})"
                       for q, r in zip(one.points, ratios))
    assert report("5d (round independence)", ok, detail + "; need ratio <= 2")


@pytest.mark.skipif(not __import__("os").environ.get("TORUS4_LONG"), reason="opt-in long run: set TORUS4_LONG=1")
def test_criterion_5c_long_run_hadamard_low_p():
    # non-gating target: per-round per-qubit rate 4e-7 at p = 1e-3, within a factor of 3
    res = sweep(lattice="Hadamard", circuit="compact", decoder="bposd", p=[1e-3], shots=20_000_000, seed=8,
                target_rel_ci=0.3, min_shots=100_000, block_size=4096)
    pq = res.points[0].per_qubit
    report("5c-long (non-gating)", 4e-7 / 3 <= pq <= 4e-7 * 3,
           f"per-round per-qubit rate at p=1e-3: {pq:.2e} from {res.points[0].failures}/{res.points[0].shots}")
