"""Layered circuit representation and its line-oriented text format.

Text format::

    qubits 2
    H 0; X 1        # one layer per line, gates separated by ';'
    CZ 0 1
    RZ 1 0.5        # parametric gates take a trailing angle in radians
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import gates
from ._tensor import apply_on_axes, qubit_axes

DEFAULT_QUBIT_CAP = 10


class CircuitSyntaxError(ValueError):
    """Malformed circuit text; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in gates.SIGNATURES:
            raise ValueError(f"unknown gate {self.kind!r}")
        arity, n_params = gates.SIGNATURES[self.kind]
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {len(self.targets)}")
        if len(set(self.targets)) != arity:
            raise ValueError(f"{self.kind} targets must be distinct: {self.targets}")
        if min(self.targets) < 0:
            raise ValueError("qubit indices must be non-negative")
        if len(self.params) != n_params:
            raise ValueError(f"{self.kind} takes {n_params} parameter(s), got {len(self.params)}")

    @property
    def arity(self) -> int:
        return len(self.targets)

    @property
    def parametric(self) -> bool:
        return gates.is_parametric(self.kind)

    def matrix(self) -> np.ndarray:
        return gates.matrix(self.kind, self.params)

    def inverse(self) -> Gate:
        if self.parametric:
            return Gate(self.kind, self.targets, tuple(-p for p in self.params))
        return Gate(gates.inverse_name(self.kind), self.targets)

    def with_params(self, params: Sequence[float]) -> Gate:
        return Gate(self.kind, self.targets, tuple(params))

    def to_text(self) -> str:
        parts = [self.kind, *map(str, self.targets), *map(repr, self.params)]
        return " ".join(parts)


@dataclass(frozen=True)
class Layer:
    """Gates acting on pairwise disjoint qubits, applied simultaneously."""

    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        seen: set[int] = set()
        for g in self.gates:
            if seen.intersection(g.targets):
                raise ValueError(f"qubit used twice in one layer: {g.to_text()}")
            seen.update(g.targets)

    @property
    def qubits(self) -> frozenset[int]:
        return frozenset(q for g in self.gates for q in g.targets)

    def inverse(self) -> Layer:
        return Layer(tuple(g.inverse() for g in self.gates))

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


@dataclass(frozen=True)
class Circuit:
    """Immutable layered circuit; ``layers[0]`` is applied first."""

    n_qubits: int
    layers: tuple[Layer, ...] = field(default=())

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        object.__setattr__(self, "layers", tuple(self.layers))
        for layer in self.layers:
            for g in layer.gates:
                if max(g.targets) >= self.n_qubits:
                    raise ValueError(
                        f"qubit index {max(g.targets)} out of range for {self.n_qubits} qubits"
                    )

    @classmethod
    def from_gates(cls, n_qubits: int, gate_list: Iterable[Gate]) -> Circuit:
        """One gate per layer."""
        return cls(n_qubits, tuple(Layer((g,)) for g in gate_list))

    def depth(self) -> int:
        return len(self.layers)

    def gate_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def gates(self) -> list[Gate]:
        return [g for layer in self.layers for g in layer.gates]

    def __len__(self) -> int:
        return len(self.layers)

    def __str__(self) -> str:
        return serialize_circuit(self)


def adjoint(c: Circuit) -> Circuit:
    """Layers reversed and each gate inverted."""
    return Circuit(c.n_qubits, tuple(layer.inverse() for layer in reversed(c.layers)))


def concat(a: Circuit, b: Circuit) -> Circuit:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.n_qubits} != {b.n_qubits}")
    return Circuit(a.n_qubits, a.layers + b.layers)


def split_layers(c: Circuit) -> Circuit:
    """Sequential reading: every gate becomes its own layer."""
    return Circuit.from_gates(c.n_qubits, c.gates())


def compact(c: Circuit) -> Circuit:
    """Re-pack gates into the earliest layer their qubits allow (ASAP)."""
    frontier = [0] * c.n_qubits
    packed: list[list[Gate]] = []
    for g in c.gates():
        slot = max(frontier[q] for q in g.targets)
        if slot == len(packed):
            packed.append([])
        packed[slot].append(g)
        for q in g.targets:
            frontier[q] = slot + 1
    return Circuit(c.n_qubits, tuple(Layer(tuple(gs)) for gs in packed))


def unitary_of(c: Circuit, max_qubits: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Dense unitary of the circuit, little-endian qubit ordering."""
    n = c.n_qubits
    if n > max_qubits:
        raise ValueError(f"{n} qubits exceeds the dense-matrix cap of {max_qubits}")
    dim = 2**n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for layer in c.layers:
        for g in layer.gates:
            u = apply_on_axes(u, g.matrix(), qubit_axes(g.targets, n))
    return u.reshape(dim, dim)


def serialize_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.n_qubits}"]
    for layer in c.layers:
        lines.append("; ".join(g.to_text() for g in layer.gates))
    return "\n".join(lines) + "\n"


def _parse_gate(token: str, lineno: int) -> Gate:
    parts = token.split()
    name = parts[0].upper()
    if name not in gates.SIGNATURES:
        raise CircuitSyntaxError(f"unknown gate {parts[0]!r}", lineno)
    arity, n_params = gates.SIGNATURES[name]
    if len(parts) != 1 + arity + n_params:
        raise CircuitSyntaxError(
            f"{name} expects {arity} qubit(s) and {n_params} angle(s), got {token.strip()!r}", lineno
        )
    try:
        targets = tuple(int(p) for p in parts[1 : 1 + arity])
        params = tuple(float(p) for p in parts[1 + arity :])
    except ValueError:
        raise CircuitSyntaxError(f"bad operand in {token.strip()!r}", lineno) from None
    try:
        return Gate(name, targets, params)
    except ValueError as exc:
        raise CircuitSyntaxError(str(exc), lineno) from None


def parse_circuit(text: str, sequential: bool = False) -> Circuit:
    """Parse the text format.

    With ``sequential=True`` every gate is placed in its own layer regardless
    of how the lines group them.
    """
    n_qubits = None
    layers: list[Layer] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n_qubits is None:
            head = line.split()
            if len(head) != 2 or head[0].lower() != "qubits":
                raise CircuitSyntaxError("expected 'qubits <n>' header", lineno)
            try:
                n_qubits = int(head[1])
            except ValueError:
                raise CircuitSyntaxError(f"bad qubit count {head[1]!r}", lineno) from None
            if n_qubits < 1:
                raise CircuitSyntaxError("qubit count must be positive", lineno)
            continue
        layer_gates = [_parse_gate(tok, lineno) for tok in line.split(";") if tok.strip()]
        for g in layer_gates:
            if max(g.targets) >= n_qubits:
                raise CircuitSyntaxError(
                    f"qubit index {max(g.targets)} out of range for {n_qubits} qubits", lineno
                )
        if sequential:
            layers.extend(Layer((g,)) for g in layer_gates)
            continue
        try:
            layers.append(Layer(tuple(layer_gates)))
        except ValueError as exc:
            raise CircuitSyntaxError(str(exc), lineno) from None
    if n_qubits is None:
        raise CircuitSyntaxError("empty circuit text: missing 'qubits <n>' header")
    return Circuit(n_qubits, tuple(layers))
