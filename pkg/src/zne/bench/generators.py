"""Random circuit families used by the benchmark scenarios.

Every generator is a pure function of its arguments; ``seed`` may be an int
or anything :func:`numpy.random.default_rng` accepts.
"""

from __future__ import annotations

import zlib

import numpy as np

from ..circuit import Circuit, Gate, Layer, adjoint, concat
from .clifford import rb_sequence

RANDOM6_SINGLE = ("H", "X", "Y", "Z", "S", "T")
RANDOM6_TWO = ("ISWAP", "CZ")
ROTATIONS = ("RX", "RY", "RZ")
MIRROR_SINGLE = (None, "H", "S", "SDG", "X", "Y", "Z")

# Measured mean compiled depth of an RB sequence with m random Cliffords is
# close to RB_DEPTH_INTERCEPT + RB_DEPTH_PER_CLIFFORD * m (200 samples per m).
RB_DEPTH_PER_CLIFFORD = 3.79
RB_DEPTH_INTERCEPT = 3.9


def stream_seed(master: int, tag: str, index: int) -> int:
    """Per-item seed derived by stable hashing, independent of scheduling."""
    ss = np.random.SeedSequence([int(master), zlib.crc32(tag.encode()), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def cliffords_for_depth(target_depth: float) -> int:
    return max(1, round((target_depth - RB_DEPTH_INTERCEPT) / RB_DEPTH_PER_CLIFFORD))


def generate_rb_circuit(n_qubits: int = 2, target_depth: float = 27, seed=None,
                        n_cliffords: int | None = None) -> Circuit:
    """Random two-qubit Cliffords followed by their inverse.

    The Clifford count is chosen so the mean compiled depth is close to
    ``target_depth`` unless ``n_cliffords`` is given.
    """
    if n_qubits != 2:
        raise ValueError("only two-qubit randomized benchmarking is supported")
    m = cliffords_for_depth(target_depth) if n_cliffords is None else int(n_cliffords)
    if m < 1:
        raise ValueError("need at least one Clifford")
    return rb_sequence(m, np.random.default_rng(seed))


def generate_random6(seed=None, n_qubits: int = 6, moments: int = 40) -> Circuit:
    """Dense random circuit: in every moment the qubits are shuffled and
    gates drawn uniformly from the single- and two-qubit sets until no qubit
    is left idle (a two-qubit draw with one qubit left becomes single-qubit)."""
    rng = np.random.default_rng(seed)
    names = RANDOM6_SINGLE + RANDOM6_TWO
    layers = []
    for _ in range(moments):
        free = [int(q) for q in rng.permutation(n_qubits)]
        gs = []
        while free:
            name = names[rng.integers(len(names))]
            if name in RANDOM6_TWO and len(free) >= 2:
                gs.append(Gate(name, (free.pop(), free.pop())))
            else:
                if name in RANDOM6_TWO:
                    name = RANDOM6_SINGLE[rng.integers(len(RANDOM6_SINGLE))]
                gs.append(Gate(name, (free.pop(),)))
        layers.append(Layer(tuple(gs)))
    return Circuit(n_qubits, tuple(layers))


def generate_rotation_circuit(seed=None, n_qubits: int = 6, depth: int = 20) -> Circuit:
    """Alternating layers: a random-axis rotation with a uniform angle on every
    qubit, then CZ gates on a random pairing of the qubits."""
    rng = np.random.default_rng(seed)
    layers = []
    for j in range(depth):
        if j % 2 == 0:
            gs = tuple(Gate(ROTATIONS[rng.integers(3)], (q,), (float(rng.uniform(0, 2 * np.pi)),))
                       for q in range(n_qubits))
        else:
            order = [int(q) for q in rng.permutation(n_qubits)]
            gs = tuple(Gate("CZ", (order[i], order[i + 1])) for i in range(0, n_qubits - 1, 2))
        layers.append(Layer(gs))
    return Circuit(n_qubits, tuple(layers))


def generate_mirror_rb(seed=None, n_qubits: int = 5, depth: int = 10) -> Circuit:
    """Random Clifford layers followed by their exact adjoint, so the ideal
    output is ``|0...0>`` with certainty.  ``depth`` must be even."""
    if depth < 2 or depth % 2:
        raise ValueError("mirror depth must be a positive even number")
    rng = np.random.default_rng(seed)
    layers = []
    for _ in range(depth // 2):
        order = [int(q) for q in rng.permutation(n_qubits)]
        gs = []
        while order:
            if len(order) >= 2 and rng.random() < 0.5:
                gs.append(Gate("CZ", (order.pop(), order.pop())))
            else:
                name = MIRROR_SINGLE[rng.integers(len(MIRROR_SINGLE))]
                q = order.pop()
                if name is not None:
                    gs.append(Gate(name, (q,)))
        layers.append(Layer(tuple(gs)))
    half = Circuit(n_qubits, tuple(layers))
    return concat(half, adjoint(half))
