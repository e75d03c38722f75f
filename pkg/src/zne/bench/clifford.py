"""Two-qubit Clifford group as a lookup table of shallow layered decompositions.

The table is built once by breadth-first search over layers drawn from the
gate set, so every element is stored with a minimum-depth decomposition.
Elements are keyed by their unitary with the global phase removed.
"""

from __future__ import annotations

import functools
import itertools

import numpy as np

from ..circuit import Circuit, Gate, Layer, compact, unitary_of

GROUP_ORDER = 11520

_SINGLE = ("H", "S", "SDG", "X", "Y", "Z")
_TWO = (("CZ", (0, 1)), ("CNOT", (0, 1)), ("CNOT", (1, 0)), ("ISWAP", (0, 1)))


def _phase_keys(us: np.ndarray) -> list[bytes]:
    """Keys for a stack of 4x4 unitaries, equal iff equal up to global phase."""
    flat = us.reshape(len(us), -1)
    # Clifford entries have modulus 0, 1/2, 1/sqrt(2) or 1, so 0.1 cleanly
    # separates true zeros from rounding residue.
    first = np.argmax(np.abs(flat) > 0.1, axis=1)
    pivot = flat[np.arange(len(flat)), first]
    v = flat * (np.abs(pivot) / pivot)[:, None]
    parts = np.round(np.concatenate([v.real, v.imag], axis=1), 4)
    parts[parts == 0] = 0.0  # -0.0 and 0.0 must hash alike
    return [row.tobytes() for row in parts]


def phase_key(u: np.ndarray) -> bytes:
    """Hashable key of ``u`` up to global phase."""
    return _phase_keys(np.asarray(u)[None])[0]


def _moves() -> list[Layer]:
    moves = []
    for g0, g1 in itertools.product((None, *_SINGLE), repeat=2):
        gs = tuple(Gate(name, (q,)) for q, name in ((0, g0), (1, g1)) if name)
        if gs:
            moves.append(Layer(gs))
    moves.sort(key=len)
    moves.extend(Layer((Gate(name, targets),)) for name, targets in _TWO)
    return moves


@functools.lru_cache(maxsize=1)
def _search() -> tuple[tuple[tuple[Layer, ...], ...], dict[bytes, int]]:
    moves = _moves()
    move_us = np.stack([unitary_of(Circuit(2, (m,))) for m in moves])
    identity = np.eye(4, dtype=complex)
    seen = {phase_key(identity): 0}
    table: list[tuple[Layer, ...]] = [()]
    frontier_layers = [()]
    frontier_us = identity[None]
    while frontier_layers:
        # products[j, i] = move j applied after frontier element i
        products = np.einsum("jab,ibc->jiac", move_us, frontier_us)
        keys = _phase_keys(products.reshape(-1, 4, 4))
        nxt_layers, nxt_us = [], []
        for j, move in enumerate(moves):
            for i, layers in enumerate(frontier_layers):
                key = keys[j * len(frontier_layers) + i]
                if key not in seen:
                    seen[key] = len(table) + len(nxt_layers)
                    nxt_layers.append(layers + (move,))
                    nxt_us.append(products[j, i])
        table.extend(nxt_layers)
        frontier_layers = nxt_layers
        frontier_us = np.array(nxt_us).reshape(-1, 4, 4)
    if len(table) != GROUP_ORDER:
        raise RuntimeError(f"Clifford search found {len(table)} elements, expected {GROUP_ORDER}")
    return tuple(table), seen


def clifford_table() -> tuple[tuple[Layer, ...], ...]:
    """All 11520 two-qubit Cliffords, each as a tuple of layers (identity first)."""
    return _search()[0]


def _index() -> dict[bytes, int]:
    return _search()[1]


def clifford_circuit(index: int) -> Circuit:
    return Circuit(2, clifford_table()[index])


def inverse_index(u: np.ndarray) -> int:
    """Table index of the Clifford inverting ``u``."""
    return _index()[phase_key(u.conj().T)]


def rb_sequence(n_cliffords: int, rng: np.random.Generator) -> Circuit:
    """``n_cliffords`` uniformly random Cliffords, then the one that inverts them,
    compacted so gates start as early as their qubits allow."""
    table = clifford_table()
    picks = rng.integers(0, len(table), size=n_cliffords)
    layers: list[Layer] = []
    for i in picks:
        layers.extend(table[i])
    body = Circuit(2, tuple(layers))
    layers.extend(table[inverse_index(unitary_of(body))])
    return compact(Circuit(2, tuple(layers)))
