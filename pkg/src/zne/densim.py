"""Dense density-matrix simulator with depolarizing, amplitude-damping and
angle-noise channels.

Noise placement (see :class:`NoiseModel`):

* depolarizing acts after every gate (default) or once after every layer.
  Global scope depolarizes the whole register. Local scope depolarizes the
  gate's own qubits after a gate, or every qubit independently after a layer;
* amplitude damping acts on every qubit after every layer;
* angle noise acts after every parametric gate, as the two-Kraus channel
  ``(1 - Q) rho + Q G rho G`` with ``Q = (1 - exp(-2 sigma^2)) / 2``.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from . import gates
from ._tensor import conjugate
from .circuit import Circuit, Gate

MAX_QUBITS = 10
MAX_QUBITS_LARGE = 12

_PAULIS = (gates.I2, gates.X, gates.Y, gates.Z)


class DensityMatrix:
    """A ``2^n x 2^n`` density operator, little-endian qubit ordering."""

    __slots__ = ("n_qubits", "data")

    def __init__(self, data: np.ndarray, n_qubits: int | None = None):
        data = np.asarray(data, dtype=complex)
        dim = data.shape[0]
        if data.ndim != 2 or data.shape != (dim, dim) or dim & (dim - 1):
            raise ValueError(f"density matrix must be square with power-of-two size, got {data.shape}")
        n = dim.bit_length() - 1
        if n_qubits is not None and n_qubits != n:
            raise ValueError(f"{dim}x{dim} matrix does not describe {n_qubits} qubits")
        self.n_qubits = n
        self.data = data

    @classmethod
    def zero_state(cls, n_qubits: int) -> DensityMatrix:
        data = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
        data[0, 0] = 1.0
        return cls(data)

    @classmethod
    def basis_state(cls, index: int, n_qubits: int) -> DensityMatrix:
        data = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
        data[index, index] = 1.0
        return cls(data)

    @classmethod
    def from_statevector(cls, psi: np.ndarray) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> DensityMatrix:
        dim = 2**n_qubits
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def probabilities(self) -> np.ndarray:
        return np.clip(self.data.diagonal().real, 0.0, None)

    def trace(self) -> float:
        return float(self.data.trace().real)

    def copy(self) -> DensityMatrix:
        return DensityMatrix(self.data.copy())

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})"


class Observable:
    """Either a computational-basis projector or an explicit Hermitian matrix."""

    def __init__(self, matrix: np.ndarray | None = None, index: int | None = None,
                 n_qubits: int | None = None):
        if (matrix is None) == (index is None):
            raise ValueError("give exactly one of matrix or index")
        self.index = index
        if matrix is not None:
            matrix = np.asarray(matrix, dtype=complex)
            if not np.allclose(matrix, matrix.conj().T, atol=1e-12):
                raise ValueError("observable must be Hermitian")
            n_qubits = matrix.shape[0].bit_length() - 1
        elif n_qubits is None:
            raise ValueError("basis projector needs n_qubits")
        elif not 0 <= index < 2**n_qubits:
            raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
        self.matrix = matrix
        self.n_qubits = n_qubits

    @classmethod
    def projector(cls, bits: str) -> Observable:
        """Projector onto ``|bits>`` where ``bits[q]`` is the value of qubit ``q``."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        index = sum(int(b) << q for q, b in enumerate(bits))
        return cls(index=index, n_qubits=len(bits))

    @classmethod
    def basis(cls, index: int, n_qubits: int) -> Observable:
        return cls(index=index, n_qubits=n_qubits)

    @classmethod
    def hermitian(cls, matrix: np.ndarray) -> Observable:
        return cls(matrix=matrix)

    @property
    def is_projector(self) -> bool:
        if self.index is not None:
            return True
        m = self.matrix
        return bool(np.allclose(m @ m, m, atol=1e-10))

    def trace(self) -> float:
        """Tr(O); divided by the dimension this is the fully-mixed expectation."""
        return 1.0 if self.index is not None else float(self.matrix.trace().real)

    def expectation(self, rho: DensityMatrix) -> float:
        if rho.n_qubits != self.n_qubits:
            raise ValueError(f"observable on {self.n_qubits} qubits, state on {rho.n_qubits}")
        if self.index is not None:
            return float(rho.data[self.index, self.index].real)
        return float(np.einsum("ij,ji->", rho.data, self.matrix).real)


@dataclass(frozen=True)
class NoiseModel:
    """Noise strengths; all zero means noiseless.

    ``depolarizing`` is the error weight ``1 - p`` of ``rho -> p rho + (1-p) I/D``.
    """

    depolarizing: float = 0.0
    depolarizing_placement: str = "gate"
    depolarizing_scope: str = "global"
    amplitude_damping: float = 0.0
    angle_noise: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.depolarizing <= 1.0:
            raise ValueError(f"depolarizing strength must be in [0, 1], got {self.depolarizing}")
        if not 0.0 <= self.amplitude_damping <= 1.0:
            raise ValueError(f"amplitude damping must be in [0, 1], got {self.amplitude_damping}")
        if self.angle_noise < 0:
            raise ValueError(f"angle-noise variance must be >= 0, got {self.angle_noise}")
        if self.depolarizing_placement not in ("gate", "layer"):
            raise ValueError(f"placement must be 'gate' or 'layer', not {self.depolarizing_placement!r}")
        if self.depolarizing_scope not in ("global", "local"):
            raise ValueError(f"scope must be 'global' or 'local', not {self.depolarizing_scope!r}")

    @classmethod
    def from_pauli_error(cls, p: float, placement: str = "gate", scope: str = "global",
                         n_qubits: int = 1, **kwargs) -> NoiseModel:
        """Depolarizing model specified by the probability ``p`` of a non-identity
        Pauli error, the convention of ``(1 - p) rho + p/3 (X rho X + Y rho Y + Z rho Z)``.

        Each channel acts on ``k`` qubits: one for local scope after a layer,
        ``n_qubits`` for global scope.  The weight on the maximally mixed state
        is then ``p 4^k / (4^k - 1)``.  Per-gate local placement is rejected
        because its channel width varies with the gate.
        """
        if placement == "gate" and scope == "local":
            raise ValueError("per-gate local noise has no single channel width")
        k = 1 if scope == "local" else n_qubits
        weight = p * 4**k / (4**k - 1)
        return cls(depolarizing=weight, depolarizing_placement=placement,
                   depolarizing_scope=scope, **kwargs)

    @property
    def is_noiseless(self) -> bool:
        return self.depolarizing == 0 and self.amplitude_damping == 0 and self.angle_noise == 0

    def scaled(self, lam: float) -> NoiseModel:
        """Back-end noise scaling: every dissipative rate multiplied by ``lam``.

        Survival weights go ``w -> w**lam`` and the angle variance is multiplied.
        """
        if lam < 0:
            raise ValueError("scale factor must be non-negative")
        return replace(
            self,
            depolarizing=1.0 - (1.0 - self.depolarizing) ** lam,
            amplitude_damping=1.0 - (1.0 - self.amplitude_damping) ** lam,
            angle_noise=self.angle_noise * lam,
        )


NOISELESS = NoiseModel()


def angle_noise_q(sigma2: float) -> float:
    """Flip weight of the angle-noise channel.

    ``sigma2`` is the variance of the control parameter ``theta`` in
    ``exp(-i theta H)``, which is half the stored rotation angle.
    """
    return 0.5 * (1.0 - np.exp(-2.0 * sigma2))


def amplitude_damping_kraus(gamma: float) -> tuple[np.ndarray, np.ndarray]:
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return k0, k1


# -- tensor-level kernels -----------------------------------------------------------


def _tensor(rho: DensityMatrix) -> np.ndarray:
    return rho.data.reshape((2,) * (2 * rho.n_qubits))


def _global_depolarize(t: np.ndarray, keep: float, n: int) -> np.ndarray:
    dim = 2**n
    m = t.reshape(dim, dim)
    tr = np.trace(m)
    m = keep * m
    m[np.diag_indices(dim)] += (1.0 - keep) * tr / dim
    return m.reshape(t.shape)


def _local_depolarize(t: np.ndarray, keep: float, targets: Sequence[int], n: int) -> np.ndarray:
    twirl = np.zeros_like(t)
    paulis = list(itertools.product(_PAULIS, repeat=len(targets)))
    for ps in paulis:
        op = ps[0]
        for p in ps[1:]:
            op = np.kron(op, p)
        twirl += conjugate(t, op, targets, n)
    return keep * t + (1.0 - keep) * twirl / len(paulis)


def _amp_damp(t: np.ndarray, gamma: float, qubit: int, n: int) -> np.ndarray:
    k0, k1 = amplitude_damping_kraus(gamma)
    return conjugate(t, k0, [qubit], n) + conjugate(t, k1, [qubit], n)


def _angle_channel(t: np.ndarray, h: np.ndarray, q: float, targets: Sequence[int], n: int) -> np.ndarray:
    return (1.0 - q) * t + q * conjugate(t, h, targets, n)


def _wrap(t: np.ndarray, n: int) -> DensityMatrix:
    return DensityMatrix(np.ascontiguousarray(t).reshape(2**n, 2**n))


# -- public channel operations --------------------------------------------------------


def apply_gate(rho: DensityMatrix, g: Gate) -> DensityMatrix:
    if max(g.targets) >= rho.n_qubits:
        raise ValueError(f"gate {g.to_text()!r} does not fit {rho.n_qubits} qubits")
    return _wrap(conjugate(_tensor(rho), g.matrix(), g.targets, rho.n_qubits), rho.n_qubits)


def apply_depolarizing(rho: DensityMatrix, p: float) -> DensityMatrix:
    """``rho -> p rho + (1 - p) I / D``; ``p`` is the weight that survives."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return _wrap(_global_depolarize(_tensor(rho), p, rho.n_qubits), rho.n_qubits)


def apply_local_depolarizing(rho: DensityMatrix, p: float, targets: Sequence[int]) -> DensityMatrix:
    """Depolarize only ``targets``: ``p rho + (1 - p) I_T/2^k (x) Tr_T rho``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return _wrap(_local_depolarize(_tensor(rho), p, targets, rho.n_qubits), rho.n_qubits)


def apply_amplitude_damping(rho: DensityMatrix, gamma: float, qubit: int) -> DensityMatrix:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    if not 0 <= qubit < rho.n_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    return _wrap(_amp_damp(_tensor(rho), gamma, qubit, rho.n_qubits), rho.n_qubits)


def apply_angle_noise_channel(rho: DensityMatrix, h: np.ndarray, sigma2: float,
                              targets: Sequence[int]) -> DensityMatrix:
    h = np.asarray(h, dtype=complex)
    if not np.allclose(h @ h, np.eye(h.shape[0]), atol=1e-10):
        raise ValueError("angle-noise generator must square to the identity")
    if sigma2 < 0:
        raise ValueError("variance must be non-negative")
    q = angle_noise_q(sigma2)
    return _wrap(_angle_channel(_tensor(rho), h, q, targets, rho.n_qubits), rho.n_qubits)


# -- circuit simulation ---------------------------------------------------------------


def _check_size(n: int, allow_large: bool) -> None:
    cap = MAX_QUBITS_LARGE if allow_large else MAX_QUBITS
    if n > cap:
        raise ValueError(f"{n} qubits exceeds the simulator cap of {cap}")


def simulate(c: Circuit, nm: NoiseModel = NOISELESS, initial: DensityMatrix | None = None,
             allow_large: bool = False) -> DensityMatrix:
    """Final state of ``c`` under ``nm``, starting from ``initial`` (default ``|0...0>``)."""
    n = c.n_qubits
    _check_size(n, allow_large)
    rho = DensityMatrix.zero_state(n) if initial is None else initial
    if rho.n_qubits != n:
        raise ValueError(f"initial state has {rho.n_qubits} qubits, circuit has {n}")
    t = _tensor(rho).copy()

    keep = 1.0 - nm.depolarizing
    per_gate = nm.depolarizing > 0 and nm.depolarizing_placement == "gate"
    per_layer = nm.depolarizing > 0 and nm.depolarizing_placement == "layer"
    local = nm.depolarizing_scope == "local"
    q_angle = angle_noise_q(nm.angle_noise) if nm.angle_noise > 0 else 0.0

    for layer in c.layers:
        for g in layer.gates:
            t = conjugate(t, g.matrix(), g.targets, n)
            if q_angle and g.parametric:
                t = _angle_channel(t, gates.GENERATORS[g.kind], q_angle, g.targets, n)
            if per_gate:
                t = _local_depolarize(t, keep, g.targets, n) if local else _global_depolarize(t, keep, n)
        if per_layer:
            if local:
                for q in range(n):
                    t = _local_depolarize(t, keep, (q,), n)
            else:
                t = _global_depolarize(t, keep, n)
        if nm.amplitude_damping > 0:
            for q in range(n):
                t = _amp_damp(t, nm.amplitude_damping, q, n)
    return _wrap(t, n)


def simulate_expectation(c: Circuit, nm: NoiseModel, obs: Observable,
                         initial: DensityMatrix | None = None) -> float:
    """Exact ``Tr(rho_final O)``."""
    if obs.n_qubits != c.n_qubits:
        raise ValueError(f"observable on {obs.n_qubits} qubits, circuit has {c.n_qubits}")
    return obs.expectation(simulate(c, nm, initial))


def simulate_probabilities(c: Circuit, nm: NoiseModel = NOISELESS,
                           initial: DensityMatrix | None = None) -> np.ndarray:
    return simulate(c, nm, initial).probabilities()


def sample_expectation(c: Circuit, nm: NoiseModel, obs: Observable, shots: int,
                       seed=None, initial: DensityMatrix | None = None) -> float:
    """Frequency of the projector's outcome over ``shots`` simulated measurements."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not obs.is_projector:
        raise ValueError("shot sampling needs a projector observable; use gaussian_noise_executor")
    p = min(max(simulate_expectation(c, nm, obs, initial), 0.0), 1.0)
    rng = np.random.default_rng(seed)
    return rng.binomial(shots, p) / shots


def gaussian_noise_executor(c: Circuit, nm: NoiseModel, obs: Observable, sigma0: float,
                            shots: int, seed=None, initial: DensityMatrix | None = None) -> float:
    """Exact expectation plus Gaussian noise of variance ``sigma0**2 / shots``."""
    if sigma0 < 0:
        raise ValueError("sigma0 must be non-negative")
    exact = simulate_expectation(c, nm, obs, initial)
    if sigma0 == 0:
        return exact
    rng = np.random.default_rng(seed)
    return exact + rng.normal(0.0, sigma0 / np.sqrt(shots))
