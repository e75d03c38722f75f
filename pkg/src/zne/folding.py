"""Unitary folding: stretch a circuit by ``lambda`` without changing its unitary.

Scale factors live on the grid ``1 + 2k/d`` for a depth-``d`` circuit; any
requested ``lambda`` is snapped to the nearest grid point by
:func:`resolve_fold`.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .circuit import Circuit, Layer, adjoint, split_layers

_METHODS = ("global", "left", "right", "random")
_ALIASES = {
    "circuit": "global",
    "from_left": "left",
    "fromleft": "left",
    "from_right": "right",
    "fromright": "right",
    "at_random": "random",
    "atrandom": "random",
}


@dataclass(frozen=True)
class FoldSpec:
    n: int
    s: int
    k: int
    depth: int

    @property
    def realized_lambda(self) -> float:
        return 1.0 + 2.0 * self.k / self.depth

    @property
    def folded_depth(self) -> int:
        return self.depth * (2 * self.n + 1) + 2 * self.s


@dataclass(frozen=True)
class FoldMethod:
    """One of ``global``, ``left``, ``right`` or ``random`` (which needs a seed)."""

    kind: str = "global"
    seed: int | None = None

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in _METHODS:
            raise ValueError(f"unknown fold method {self.kind!r}; expected one of {_METHODS}")
        object.__setattr__(self, "kind", kind)
        if kind == "random" and self.seed is None:
            object.__setattr__(self, "seed", 0)

    @classmethod
    def at_random(cls, seed: int) -> FoldMethod:
        return cls("random", seed)


GLOBAL = FoldMethod("global")
FROM_LEFT = FoldMethod("left")
FROM_RIGHT = FoldMethod("right")


def resolve_fold(depth: int, lam: float) -> FoldSpec:
    """Integers ``(n, s)`` whose folding realizes the grid point closest to ``lam``."""
    if depth < 1:
        raise ValueError("cannot fold an empty circuit")
    if not lam >= 1.0:
        raise ValueError(f"scale factor must be >= 1, got {lam}")
    # half away from zero; the slack absorbs representation error at exact midpoints
    k = math.floor(depth * (lam - 1.0) / 2.0 + 0.5 + 1e-9)
    n, s = divmod(k, depth)
    return FoldSpec(n=n, s=s, k=k, depth=depth)


def realized_lambda(depth: int, lam: float) -> float:
    return resolve_fold(depth, lam).realized_lambda


def fold_global(c: Circuit, lam: float) -> Circuit:
    """``U (U^dag U)^n`` followed by a partial fold of the last ``s`` layers."""
    spec = resolve_fold(c.depth(), lam)
    inv = adjoint(c)
    layers = list(c.layers)
    for _ in range(spec.n):
        layers.extend(inv.layers)
        layers.extend(c.layers)
    if spec.s:
        tail = c.layers[-spec.s :]
        layers.extend(layer.inverse() for layer in reversed(tail))
        layers.extend(tail)
    return Circuit(c.n_qubits, tuple(layers))


def fold_subset(c: Circuit, spec: FoldSpec, method: FoldMethod) -> set[int]:
    """0-based indices of the layers that receive the extra fold."""
    d, s = c.depth(), spec.s
    if method.kind == "left":
        return set(range(s))
    if method.kind == "right":
        return set(range(d - s, d))
    if method.kind == "random":
        return set(random.Random(method.seed).sample(range(d), s))
    raise ValueError("global folding has no layer subset; use fold_global")


def fold_gates(c: Circuit, lam: float, method: FoldMethod, per_gate: bool = False) -> Circuit:
    """Fold each layer in place: ``L -> L (L^dag L)^n``, one more time on the subset.

    With ``per_gate=True`` every gate is first given its own layer.
    """
    if per_gate:
        c = split_layers(c)
    spec = resolve_fold(c.depth(), lam)
    chosen = fold_subset(c, spec, method)
    layers: list[Layer] = []
    for j, layer in enumerate(c.layers):
        inv = layer.inverse()
        layers.append(layer)
        for _ in range(spec.n + (j in chosen)):
            layers.append(inv)
            layers.append(layer)
    return Circuit(c.n_qubits, tuple(layers))


def fold(c: Circuit, lam: float, method: FoldMethod | str = GLOBAL, seed: int | None = None) -> Circuit:
    """Dispatch on ``method``; strings are accepted for convenience."""
    if isinstance(method, str):
        method = FoldMethod(method, seed)
    if method.kind == "global":
        return fold_global(c, lam)
    return fold_gates(c, lam, method)
