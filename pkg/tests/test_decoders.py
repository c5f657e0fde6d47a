import numpy as np
import pytest

from torus4 import gf2
from torus4.circuit import build_round, repeat_rounds
from torus4.decoders import (BpOsdDecoder, DecodingGraphModel, JointBpOsdDecoder, SingleShotPowerDecoder,
                             bp_osd_decode, build_joint_model, decode_shot, power_decode, qubit_model)
from torus4.sim import NoiseModel, TableSampler, build_effect_table, enumerate_single_faults, insert_noise, sample_shots
from torus4.sim.faults import inject_faults
from conftest import lattice_code


def noisy(name, kind, rounds, p):
    h, code, basis = lattice_code(name)
    c = repeat_rounds(build_round(kind, h, code), rounds)
    return h, code, basis, insert_noise(c, NoiseModel(p))


def test_zero_target_gives_identity():
    _, code, _ = lattice_code("Det9")
    model = qubit_model(code, "X")
    corr = power_decode(model, np.zeros(code.hz.shape[0], dtype=np.uint8))
    assert corr.cardinality == 0 and not corr.pauli.any() and not corr.fallback


def test_depth_zero_table_still_decodes_single_errors():
    _, code, _ = lattice_code("Det3")
    model = qubit_model(code, "Z", table_depth=0, k_max=2)
    assert model.table_size == 1  # only the empty syndrome
    for q in range(code.n):
        e = np.zeros(code.n, dtype=np.uint8)
        e[q] = 1
        corr = power_decode(model, gf2.matmul(code.hx, e))
        assert not gf2.matmul(code.hx, corr.pauli ^ e).any()


def test_negative_depth_rejected():
    _, code, _ = lattice_code("Det3")
    with pytest.raises(ValueError):
        qubit_model(code, "X", table_depth=-1)


def test_target_shape_checked():
    _, code, _ = lattice_code("Det3")
    with pytest.raises(ValueError):
        power_decode(qubit_model(code, "X"), np.zeros(3, dtype=np.uint8))


@pytest.mark.parametrize("sector", ["X", "Z"])
def test_low_weight_qubit_errors_corrected(sector):
    # Det9 has distance 6, so every error of weight <= 2 must be corrected up to stabilizers
    _, code, basis = lattice_code("Det9")
    h = code.hz if sector == "X" else code.hx
    dual = basis.lz if sector == "X" else basis.lx
    model = qubit_model(code, sector)
    rng = np.random.default_rng(1)
    for _ in range(200):
        e = np.zeros(code.n, dtype=np.uint8)
        e[rng.choice(code.n, size=rng.integers(1, 3), replace=False)] = 1
        corr = power_decode(model, gf2.matmul(h, e))
        r = corr.pauli ^ e
        assert not gf2.matmul(h, r).any()
        assert not gf2.matmul(dual, r).any()


def test_merged_priors_combine_independent_mechanisms():
    _, _, basis, nc = noisy("Det3", "compact", 2, 0.01)
    fd = enumerate_single_faults(nc, basis, include_qubit=False)
    probs = np.array([f.prob for f in fd.faults])
    for s in ("X", "Z"):
        model = build_joint_model(fd, s)
        assert any(len(m) > 1 for m in model.members)
        for j, m in enumerate(model.members):
            assert model.priors[j] == pytest.approx(1 - np.prod(1 - probs[m]))
            for i in m:
                assert np.array_equal(fd.sectors[s].det_bits()[i], model.H[:, j])
                assert fd.sectors[s].log[i] == model.logicals[j]


def test_joint_model_detector_count():
    _, code, basis, nc = noisy("Det3", "compact", 3, 1e-3)
    fd = enumerate_single_faults(nc, basis, include_qubit=False)
    # three noisy rounds plus the final noiseless round, 12 checks per sector on Det3
    assert code.hx.shape[0] == code.hz.shape[0] == 12
    total = sum(build_joint_model(fd, s).num_detectors for s in ("X", "Z"))
    assert total == 2 * (3 + 1) * 12


def test_dem_text_lists_columns():
    _, _, basis, nc = noisy("Det3", "compact", 1, 1e-3)
    model = build_joint_model(enumerate_single_faults(nc, basis, include_qubit=False), "X")
    lines = model.to_dem().splitlines()
    assert len(lines) == model.num_columns + 1
    assert lines[1].startswith("error(")


def test_unmatchable_syndrome_raises():
    model = DecodingGraphModel("X", np.array([[1], [1]], dtype=np.uint8), np.array([0.01]),
                               np.zeros(1, dtype=np.uint8), [[0]], 0.0)
    with pytest.raises(ValueError, match="unmatchable syndrome"):
        bp_osd_decode(model, [1, 0])
    assert bp_osd_decode(model, [1, 1]).tolist() == [1]
    assert bp_osd_decode(model, [0, 0]).tolist() == [0]


def test_bposd_corrects_every_single_fault_det3_compact():
    _, _, basis, nc = noisy("Det3", "compact", 2, 1e-3)
    fd = enumerate_single_faults(nc, basis, include_qubit=False)
    dec = JointBpOsdDecoder(nc, basis, fd)
    out = dec.decode_batch(inject_faults(fd, [(i,) for i in range(len(fd))]))
    assert not out.any_fail.any()


def test_bposd_decode_matches_batched_kernel():
    _, _, basis, nc = noisy("Det3", "compact", 2, 0.01)
    fd = enumerate_single_faults(nc, basis, include_qubit=False)
    model = build_joint_model(fd, "Z")
    dec = BpOsdDecoder(model)
    batch = inject_faults(fd, [(i, j) for i, j in np.random.default_rng(2).integers(0, len(fd), (40, 2))])
    _, _, _, pred = dec.decode_packed(batch.det["Z"], batch.log["Z"])
    dets = batch.det_bits("Z")
    for k in range(batch.shots):
        x = dec.decode(dets[k])
        assert np.array_equal(gf2.matmul(model.H, x), dets[k])
        mask = int(np.bitwise_xor.reduce(model.logicals[x.astype(bool)])) if x.any() else 0
        assert mask == pred[k]


def test_power_decoder_corrects_every_single_fault_det9():
    h, code, basis, nc = noisy("Det9", "starfish", 2, 1e-3)
    fd = enumerate_single_faults(nc, basis, include_qubit=False)
    dec = SingleShotPowerDecoder(h, code, "starfish", basis)
    out = dec.decode_batch(inject_faults(fd, [(i,) for i in range(len(fd))]))
    assert not out.any_fail.any()


@pytest.mark.parametrize("mode", ["power", "bposd"])
def test_noiseless_shots_pass(mode):
    h, code, basis, nc = noisy("Det3", "compact", 2, 0.0)
    batch = sample_shots(TableSampler(build_effect_table(nc, basis)), 2000, seed=0)
    if mode == "power":
        dec = SingleShotPowerDecoder(h, code, "compact", basis)
    else:
        dec = JointBpOsdDecoder(insert_noise(nc.circuit, NoiseModel(1e-3)), basis)
    out = dec.decode_batch(batch)
    assert not out.any_fail.any()
    assert not out.weight.any()
    assert decode_shot(dec, inject_faults(enumerate_single_faults(nc, basis), [()])) == {"X": True, "Z": True}
