"""Parameter noise scaling: amplify stochastic angle noise by injecting more of it.

If every parametric gate already carries Gaussian noise of variance
``sigma2`` on its control parameter, adding an independent draw of variance
``(lam - 1) * sigma2`` realizes total variance ``lam * sigma2``.

The control parameter of a rotation is ``theta`` in ``exp(-i theta H)``.
Gates store the rotation angle ``phi`` of ``exp(-i phi H / 2)``, so
``phi = 2 theta`` and a control shift ``delta`` moves the angle by
``2 delta``.  This is the convention in which the angle-noise channel of
:mod:`zne.densim` has flip weight ``Q = (1 - exp(-2 sigma2)) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Layer
from .densim import (NoiseModel, Observable, angle_noise_q, simulate_expectation,
                     simulate_probabilities)

DEFAULT_MEMBERS = 200
ANGLE_PER_CONTROL = 2.0


@dataclass(frozen=True)
class ParamNoiseSpec:
    sigma2: float
    lam: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        if not self.lam >= 1.0:
            raise ValueError(f"scale factor must be >= 1, got {self.lam}")

    @property
    def injected_variance(self) -> float:
        return (self.lam - 1.0) * self.sigma2


def scale_parameters(c: Circuit, spec: ParamNoiseSpec, rng=None) -> Circuit:
    """Shift each control parameter by an independent ``N(0, (lam - 1) sigma2)``
    draw, i.e. each stored angle by twice that.

    ``rng`` overrides ``spec.seed`` so that ensembles can share one stream.
    """
    std = ANGLE_PER_CONTROL * np.sqrt(spec.injected_variance)
    if std == 0:
        return c
    rng = np.random.default_rng(spec.seed if rng is None else rng)
    layers = []
    for layer in c.layers:
        new = []
        for g in layer.gates:
            if g.parametric:
                g = g.with_params([p + rng.normal(0.0, std) for p in g.params])
            new.append(g)
        layers.append(Layer(tuple(new)))
    return Circuit(c.n_qubits, tuple(layers))


def effective_q(sigma2: float, lam: float) -> float:
    """Angle-noise flip weight at total variance ``lam * sigma2``."""
    if sigma2 < 0 or lam < 1:
        raise ValueError("need sigma2 >= 0 and lam >= 1")
    return angle_noise_q(lam * sigma2)


def ensemble_expectation(c: Circuit, nm: NoiseModel, obs: Observable, spec: ParamNoiseSpec,
                         members: int = DEFAULT_MEMBERS) -> float:
    """Average of exact expectations over ``members`` independently perturbed copies.

    ``nm`` should carry the native angle noise; the perturbations add the rest.
    """
    if spec.injected_variance == 0:
        return simulate_expectation(c, nm, obs)
    rng = np.random.default_rng(spec.seed)
    total = 0.0
    for _ in range(members):
        total += simulate_expectation(scale_parameters(c, spec, rng), nm, obs)
    return total / members


def ensemble_probabilities(c: Circuit, nm: NoiseModel, spec: ParamNoiseSpec,
                           members: int = DEFAULT_MEMBERS) -> np.ndarray:
    """Like :func:`ensemble_expectation` but for the full outcome distribution."""
    if spec.injected_variance == 0:
        return simulate_probabilities(c, nm)
    rng = np.random.default_rng(spec.seed)
    acc = np.zeros(2**c.n_qubits)
    for _ in range(members):
        acc += simulate_probabilities(scale_parameters(c, spec, rng), nm)
    return acc / members
