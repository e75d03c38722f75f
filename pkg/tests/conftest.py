from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from zne.circuit import Circuit, Gate, Layer

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXED_1Q = ("H", "X", "Y", "Z", "S", "SDG", "T", "TDG")
ROT_1Q = ("RX", "RY", "RZ")
FIXED_2Q = ("CZ", "CNOT", "ISWAP", "ISWAPDG")


def random_circuit(rng: np.random.Generator, n_qubits: int, depth: int,
                   rotations: bool = True) -> Circuit:
    """Random layered circuit drawn from the whole gate table."""
    singles = FIXED_1Q + (ROT_1Q if rotations else ())
    layers = []
    for _ in range(depth):
        free = [int(q) for q in rng.permutation(n_qubits)]
        gs = []
        while free:
            if len(free) >= 2 and rng.random() < 0.35:
                name = FIXED_2Q[rng.integers(len(FIXED_2Q))]
                gs.append(Gate(name, (free.pop(), free.pop())))
            elif rng.random() < 0.8:
                name = singles[rng.integers(len(singles))]
                params = (float(rng.uniform(-np.pi, np.pi)),) if name in ROT_1Q else ()
                gs.append(Gate(name, (free.pop(),), params))
            else:
                free.pop()
        layers.append(Layer(tuple(gs)))
    return Circuit(n_qubits, tuple(layers))


@st.composite
def circuits(draw, min_qubits=1, max_qubits=3, min_depth=1, max_depth=6, rotations=True):
    n = draw(st.integers(min_qubits, max_qubits))
    d = draw(st.integers(min_depth, max_depth))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_circuit(np.random.default_rng(seed), n, d, rotations)


def random_density_matrix(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    dim = 2**n_qubits
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# -- acceptance summary ------------------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one criterion outcome; the lines are printed in the terminal summary."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        lines.append((number, f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"))
        print(lines[-1][1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
