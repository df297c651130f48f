import functools

import numpy as np
import pytest

from platoon.exact import hungarian
from platoon.matching import WeightMatrix, weight_matrix
from platoon.model import generate_instance
from platoon.qubo import build_qubo, calibrate_penalty

# Generated stand-ins for the ten benchmark sizes; the seed is fixed per size.
STANDIN_SIZES = tuple(range(3, 13))

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def standin_seed(n: int) -> int:
    return 1000 + n


@functools.lru_cache(maxsize=None)
def standin(n: int):
    inst = generate_instance(n, standin_seed(n))
    w = weight_matrix(inst)
    lambda3 = calibrate_penalty(w)
    q = build_qubo(w, lambda3)
    _, cost = hungarian(w.weights)
    return inst, w, q, cost - q.const_offset


@pytest.fixture
def toy_w():
    return WeightMatrix(np.array([[1.0, 2.0], [3.0, 4.0]]))


@pytest.fixture
def toy_q(toy_w):
    return build_qubo(toy_w, 100.0)


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
