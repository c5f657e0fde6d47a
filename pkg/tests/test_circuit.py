import dataclasses

import numpy as np
import pytest

from torus4.circuit import (CNOT, COMPACT_DIRECTIONS, CheckMismatch, CircuitError, Op, build_round, compact_round,
                            effective_checks, metadata, parse_text, qubit_labels, repeat_rounds, starfish_round,
                            to_text)
from conftest import lattice_code


def ancilla_partners(c, code):
    """Data qubits touched by each ancilla's CNOTs in one round (structural oracle)."""
    touched = {q: set() for q in c.ancilla_cells}
    for ly in c.layers:
        for op in ly:
            if op.name != CNOT:
                continue
            a, b = op.targets
            anc, data = (a, b) if a in touched else (b, a)
            assert data < c.num_data
            touched[anc].add(data)
    return touched


@pytest.mark.parametrize("kind,depth", [("starfish", 16), ("compact", 8)])
@pytest.mark.parametrize("name", ["Det3", "Det9", "Hadamard"])
def test_depth_and_checks(kind, depth, name):
    h, code, _ = lattice_code(name)
    c = build_round(kind, h, code)
    assert c.cnot_depth == depth
    rep = effective_checks(c, code)
    assert rep.x_checks == code.hx.shape[0] and rep.z_checks == code.hz.shape[0]
    assert rep.matched == code.hx.shape[0] + code.hz.shape[0]


def test_ancillas_touch_their_stabilizer_supports():
    h, code, _ = lattice_code("Det9")
    for kind in ("starfish", "compact"):
        c = build_round(kind, h, code)
        touched = ancilla_partners(c, code)
        for q, (basis, row) in c.ancilla_cells.items():
            m = code.hx if basis == "X" else code.hz
            assert touched[q] == set(np.flatnonzero(m[row]).tolist())
            assert len(touched[q]) == 6


def test_cnot_counts():
    h, code, _ = lattice_code("Det3")
    c = starfish_round(h, code)
    assert c.count(CNOT) == 48 * h.det
    assert compact_round(h, code).count(CNOT) == 48 * h.det


def test_compact_layers_are_collision_free():
    for name in ("Det3", "Hadamard"):
        h, code, _ = lattice_code(name)
        c = compact_round(h, code)
        c.check_schedulable()
        for ly in c.cnot_layers():
            qs = [q for op in ly for q in op.targets]
            assert len(qs) == len(set(qs))
    assert COMPACT_DIRECTIONS == ("-3", "-2", "-1", "-0", "+0", "+1", "+2", "+3")


def test_deleted_cnot_is_caught():
    h, code, _ = lattice_code("Det3")
    c = starfish_round(h, code)
    li = next(i for i, ly in enumerate(c.layers) if any(op.name == CNOT for op in ly))
    layers = list(c.layers)
    victim = layers[li][0]
    layers[li] = layers[li][1:]
    broken = dataclasses.replace(c, layers=layers)
    with pytest.raises(CheckMismatch) as err:
        effective_checks(broken, code)
    anc = victim.targets[0] if victim.targets[0] in c.ancilla_cells else victim.targets[1]
    basis, row = c.ancilla_cells[anc]
    cell = code.torus.cell(1 if basis == "X" else 3, row)
    assert cell.label() in str(err.value)


def test_bad_order_is_caught():
    # the X half of the compact schedule run in the reverse direction order is not a valid extraction
    h, code, _ = lattice_code("Det3")
    c = compact_round(h, code)
    cn = [i for i, ly in enumerate(c.layers) if any(op.name == CNOT for op in ly)]
    xq = {q for q, (b, _) in c.ancilla_cells.items() if b == "X"}
    xs = [tuple(op for op in c.layers[i] if xq & set(op.targets)) for i in cn]
    zs = [tuple(op for op in c.layers[i] if not xq & set(op.targets)) for i in cn]
    layers = list(c.layers)
    for i, x, z in zip(cn, xs[::-1], zs):
        layers[i] = x + z
    with pytest.raises(CheckMismatch):
        effective_checks(dataclasses.replace(c, layers=layers), code)


def test_collision_detected():
    h, code, _ = lattice_code("Det3")
    c = compact_round(h, code)
    layers = list(c.layers)
    layers[1] = layers[1] + (Op(CNOT, layers[1][0].targets),)
    with pytest.raises(CircuitError):
        dataclasses.replace(c, layers=layers).check_schedulable()


def test_repeat_rounds_arithmetic():
    h, code, _ = lattice_code("Det3")
    one = compact_round(h, code)
    r1 = repeat_rounds(one, 1)
    assert len(r1.layers) == 2 * len(one.layers)
    assert r1.noiseless_rounds == {1}
    d = 3
    rd = repeat_rounds(one, d)
    assert len(rd.layers) == (d + 1) * len(one.layers)
    assert len(rd.meas) == d * 8 * h.det + 8 * h.det
    with pytest.raises(CircuitError):
        repeat_rounds(one, 0)


def test_text_roundtrip_and_determinism():
    h, code, _ = lattice_code("Det3")
    c = repeat_rounds(starfish_round(h, code), 2)
    text = to_text(c, qubit_labels(c, code))
    assert text == to_text(repeat_rounds(starfish_round(h, code), 2), qubit_labels(c, code))
    assert parse_text(text) == [tuple(ly) for ly in c.layers]
    meta = metadata(c, code)
    assert meta["cnot_depth_per_round"] == 16
    assert len(meta["meas_schedule"]) == len(c.meas)


def test_unknown_kind():
    h, code, _ = lattice_code("Det3")
    with pytest.raises(CircuitError):
        build_round("spiral", h, code)


@pytest.mark.parametrize("kind", ["starfish", "compact"])
@pytest.mark.parametrize("name", ["Det3", "Det9"])
def test_detectors_deterministic_under_stim(kind, name):
    from stim_oracle import to_stim
    h, code, _ = lattice_code(name)
    c = repeat_rounds(build_round(kind, h, code), 3)
    sc, keys = to_stim(c)
    assert sc.detector_error_model().num_errors == 0
    assert len(keys) == sc.num_detectors


def test_stim_oracle_flags_missing_cnot():
    from stim_oracle import to_stim
    h, code, _ = lattice_code("Det3")
    c = build_round("compact", h, code)
    layers = list(c.layers)
    li = next(i for i, ly in enumerate(layers) if any(op.name == CNOT for op in ly))
    drop = next(k for k, op in enumerate(layers[li]) if op.name == CNOT)
    layers[li] = tuple(op for k, op in enumerate(layers[li]) if k != drop)
    broken = repeat_rounds(dataclasses.replace(c, layers=layers), 3)
    with pytest.raises(ValueError, match="non-deterministic"):
        to_stim(broken)[0].detector_error_model()
