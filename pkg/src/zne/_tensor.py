"""Tensor kernels shared by the unitary builder and the simulator.

Register ordering is little-endian: qubit 0 is the least significant bit of
a basis index.  A register of ``n`` qubits reshaped to ``(2,) * n`` therefore
stores qubit ``q`` on axis ``n - 1 - q``.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


def qubit_axes(targets: Sequence[int], n_qubits: int, offset: int = 0) -> list[int]:
    return [offset + n_qubits - 1 - q for q in targets]


def apply_on_axes(tensor: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a ``2^k x 2^k`` operator into ``tensor`` along ``axes``."""
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def conjugate(tensor: np.ndarray, op: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """rho -> op rho op^dagger on a density tensor of shape ``(2,) * 2n``."""
    tensor = apply_on_axes(tensor, op, qubit_axes(targets, n_qubits))
    return apply_on_axes(tensor, op.conj(), qubit_axes(targets, n_qubits, offset=n_qubits))
