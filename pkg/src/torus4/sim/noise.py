"""Circuit-level depolarizing noise: channel placement on a circuit."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from ..circuit import CNOT, MEAS_X, MEAS_Z, PREP_X, PREP_Z, Circuit

# single-qubit Pauli as (x, z) bits, in the order X, Y, Z
PAULI1 = ((1, 0), (1, 1), (0, 1))
# two-qubit non-identity Paulis as ((xa, za), (xb, zb)), 15 of them
PAULI2 = tuple(((pa >> 1 & 1, pa & 1), (pb >> 1 & 1, pb & 1))
               for pa in range(4) for pb in range(4) if pa or pb)
_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


@dataclass(frozen=True)
class NoiseModel:
    """Total-probability-``p`` channels; each toggle switches one channel family.

    ``after_1q`` governs idle data qubits in CNOT layers (the circuits contain no
    single-qubit gates); ``data_before_round`` adds single-qubit depolarizing noise
    on the data just before each noisy round.  Neither is on by default.
    """

    p: float
    after_prep: bool = True
    after_1q: bool = False
    after_2q: bool = True
    before_meas: bool = True
    data_before_round: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"error probability {self.p} outside [0, 1]")


class Channel(NamedTuple):
    """A noise location: ``outcomes`` lists per-outcome Paulis as tuples of (qubit, x, z)."""

    kind: str  # prep | depol2 | meas | data | idle
    layer: int
    when: str  # "before" | "after"
    qubits: tuple[int, ...]
    prob: float
    outcomes: tuple[tuple[tuple[int, int, int], ...], ...]
    round: int

    def pauli_label(self, o: int) -> str:
        return " ".join(f"{_LETTER[(x, z)]}{q}" for q, x, z in self.outcomes[o])


@dataclass
class NoisyCircuit:
    circuit: Circuit
    noise: NoiseModel
    channels: list[Channel] = field(default_factory=list)

    @property
    def fault_count(self) -> int:
        return sum(len(ch.outcomes) for ch in self.channels)

    def to_text(self) -> str:
        """Circuit text with ``DEPOL1``/``DEPOL2``/``FLIP`` annotations (zero-probability channels omitted)."""
        before: dict[int, list[str]] = {}
        after: dict[int, list[str]] = {}
        for ch in self.channels:
            if ch.prob == 0:
                continue
            if ch.kind == "depol2":
                s = f"DEPOL2 {ch.prob:g} {ch.qubits[0]} {ch.qubits[1]}"
            elif ch.kind in ("data", "idle"):
                s = f"DEPOL1 {ch.prob:g} {ch.qubits[0]}"
            else:
                s = f"FLIP {ch.prob:g} {ch.qubits[0]}"
            (before if ch.when == "before" else after).setdefault(ch.layer, []).append(s)
        c = self.circuit
        lines = [f"# torus4 noisy circuit kind={c.kind} det={c.det} p={self.noise.p:g}"]
        for li, ly in enumerate(c.layers):
            if li:
                lines.append("TICK")
            lines += before.get(li, [])
            lines.append(" ".join(f"{op.name} {' '.join(map(str, op.targets))}" for op in ly))
            lines += after.get(li, [])
        return "\n".join(lines) + "\n"


def _single(q: int, x: int, z: int) -> tuple[tuple[int, int, int], ...]:
    return ((q, x, z),)


def insert_noise(c: Circuit, nm: NoiseModel, hypotheses: bool = True) -> NoisyCircuit:
    """Attach noise channels to every location of the noisy rounds.

    With ``hypotheses`` set, data-qubit channels before each noisy round are
    always listed (with probability 0 unless ``data_before_round`` is on) so
    that decoders can use them as qubit-fault hypotheses.
    """
    p = nm.p
    chans: list[Channel] = []
    first_layer = {}
    for li, r in enumerate(c.layer_rounds):
        first_layer.setdefault(r, li)
    for li, ly in enumerate(c.layers):
        r = c.layer_rounds[li]
        if r in c.noiseless_rounds:
            continue
        if first_layer[r] == li and (hypotheses or nm.data_before_round):
            prob = p if nm.data_before_round else 0.0
            for q in range(c.num_data):
                outs = tuple(_single(q, x, z) for x, z in PAULI1)
                chans.append(Channel("data", li, "before", (q,), prob, outs, r))
        busy = set()
        for op in ly:
            busy.update(op.targets)
            if op.name in (MEAS_X, MEAS_Z):
                q = op.targets[0]
                flip = (0, 1) if op.name == MEAS_X else (1, 0)
                chans.append(Channel("meas", li, "before", (q,), p if nm.before_meas else 0.0,
                                     (_single(q, *flip),), r))
        for op in ly:
            if op.name in (PREP_X, PREP_Z):
                q = op.targets[0]
                flip = (0, 1) if op.name == PREP_X else (1, 0)
                chans.append(Channel("prep", li, "after", (q,), p if nm.after_prep else 0.0,
                                     (_single(q, *flip),), r))
            elif op.name == CNOT:
                a, b = op.targets
                outs = tuple(tuple((q, x, z) for q, (x, z) in ((a, pa), (b, pb)) if x or z)
                             for pa, pb in PAULI2)
                chans.append(Channel("depol2", li, "after", (a, b), p if nm.after_2q else 0.0, outs, r))
        if nm.after_1q and any(op.name == CNOT for op in ly):
            for q in range(c.num_data):
                if q not in busy:
                    outs = tuple(_single(q, x, z) for x, z in PAULI1)
                    chans.append(Channel("idle", li, "after", (q,), p, outs, r))
    return NoisyCircuit(c, nm, chans)
