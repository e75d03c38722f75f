"""Gate table: arity, parameter count, unitary matrices and inverses.

Matrices are written in the textbook convention over the gate's own target
list: ``targets[0]`` is the most significant bit of the matrix index.  The
simulator maps this onto the little-endian register ordering.
"""

from __future__ import annotations

import numpy as np

_SQ2 = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = _SQ2 * np.array([[1, 1], [1, -1]], dtype=complex)
S = np.diag([1, 1j]).astype(complex)
T = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)

CZ = np.diag([1, 1, 1, -1]).astype(complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
ISWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex
)

# name -> (arity, number of angle parameters)
SIGNATURES: dict[str, tuple[int, int]] = {
    "H": (1, 0),
    "X": (1, 0),
    "Y": (1, 0),
    "Z": (1, 0),
    "S": (1, 0),
    "SDG": (1, 0),
    "T": (1, 0),
    "TDG": (1, 0),
    "RX": (1, 1),
    "RY": (1, 1),
    "RZ": (1, 1),
    "CZ": (2, 0),
    "CNOT": (2, 0),
    "ISWAP": (2, 0),
    "ISWAPDG": (2, 0),
}

_FIXED: dict[str, np.ndarray] = {
    "H": H,
    "X": X,
    "Y": Y,
    "Z": Z,
    "S": S,
    "SDG": S.conj().T,
    "T": T,
    "TDG": T.conj().T,
    "CZ": CZ,
    "CNOT": CNOT,
    "ISWAP": ISWAP,
    "ISWAPDG": ISWAP.conj().T,
}

# Hermitian involutions H with G(theta) = exp(-i theta H / 2).
GENERATORS: dict[str, np.ndarray] = {"RX": X, "RY": Y, "RZ": Z}

_INVERSE_NAME = {
    "S": "SDG",
    "SDG": "S",
    "T": "TDG",
    "TDG": "T",
    "ISWAP": "ISWAPDG",
    "ISWAPDG": "ISWAP",
}


def is_parametric(name: str) -> bool:
    return name in GENERATORS


def inverse_name(name: str) -> str:
    """Name of the inverse gate; parametric gates invert by negating the angle."""
    return _INVERSE_NAME.get(name, name)


def rotation(generator: np.ndarray, theta: float) -> np.ndarray:
    """exp(-i theta G / 2) for an involutory generator G."""
    dim = generator.shape[0]
    return np.cos(theta / 2) * np.eye(dim, dtype=complex) - 1j * np.sin(theta / 2) * generator


def matrix(name: str, params: tuple[float, ...] = ()) -> np.ndarray:
    """Unitary matrix of a named gate."""
    if name in GENERATORS:
        (theta,) = params
        return rotation(GENERATORS[name], theta)
    try:
        return _FIXED[name]
    except KeyError:
        raise ValueError(f"unknown gate {name!r}") from None
