import functools
import warnings

import numpy as np
import pytest

from torus4.complex import css_from_lattice
from torus4.homology import logical_basis_linear
from torus4.lattice import HnfMatrix, named_lattice


@functools.lru_cache(maxsize=None)
def lattice_code(name: str):
    h = named_lattice(name)
    code = css_from_lattice(h)
    return h, code, logical_basis_linear(code)


@functools.lru_cache(maxsize=None)
def identity_code():
    h = HnfMatrix.from_shorthand((1, 0, 0, 0, 1, 0, 0, 1, 0, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        code = css_from_lattice(h)
        return h, code, logical_basis_linear(code)


def brute_rank(m) -> int:
    """Rank over F2 by exhaustive span growth (independent of torus4.gf2)."""
    span = {0}
    for row in np.asarray(m, dtype=np.uint8):
        v = int("".join(map(str, row.tolist())) or "0", 2)
        if v not in span:
            span |= {s ^ v for s in span}
    return int(np.log2(len(span)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> bool:
    """Record one acceptance line; printed now and again in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
