"""Truncated bosonic ladder operators and dense tensor-product utilities.

Everything works on plain complex numpy arrays in the bare product basis
|Q0, C, Q1> with the coupler in the middle and Q1 varying fastest.  At the
default truncation of 4 levels per mode the full dimension is 64, so dense
storage is used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, InvalidDimensionError

__all__ = [
    "ModeLayout",
    "annihilation",
    "creation",
    "number_op",
    "embed",
    "hermitian_eigensystem",
    "hermiticity_defect",
]

#: Mode positions in the tensor product, in |Q0 C Q1> order.
MODE_Q0, MODE_C, MODE_Q1 = 0, 1, 2


@dataclass(frozen=True)
class ModeLayout:
    """Fixed (Q0, C, Q1) mode ordering with a per-mode level truncation.

    Basis index arithmetic keeps Q1 fastest-varying:
    ``index(i, j, k) = (i * n_c + j) * n_q1 + k``.
    """

    levels: tuple[int, int, int] = (4, 4, 4)

    def __post_init__(self):
        if len(self.levels) != 3:
            raise InvalidDimensionError("layout needs exactly three modes (Q0, C, Q1)")
        if any(n < 3 for n in self.levels):
            # |2> must exist on every mode to represent leakage
            raise InvalidDimensionError(f"per-mode truncation must be >= 3, got {self.levels}")

    @property
    def dim(self) -> int:
        n0, nc, n1 = self.levels
        return n0 * nc * n1

    def index(self, label: tuple[int, int, int]) -> int:
        """Flat basis index of the bare state |i j k>."""
        i, j, k = label
        n0, nc, n1 = self.levels
        if not (0 <= i < n0 and 0 <= j < nc and 0 <= k < n1):
            raise InvalidDimensionError(f"label {label} outside truncation {self.levels}")
        return (i * nc + j) * n1 + k

    def label(self, index: int) -> tuple[int, int, int]:
        """Inverse of :meth:`index`."""
        n0, nc, n1 = self.levels
        if not 0 <= index < self.dim:
            raise InvalidDimensionError(f"index {index} outside dimension {self.dim}")
        i, rem = divmod(index, nc * n1)
        j, k = divmod(rem, n1)
        return (i, j, k)

    def basis_state(self, label: tuple[int, int, int]) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.complex128)
        vec[self.index(label)] = 1.0
        return vec


def annihilation(levels: int) -> np.ndarray:
    """Lowering operator on a ``levels``-dimensional truncated mode.

    Entries are sqrt(n) on the superdiagonal: <n-1| a |n> = sqrt(n).
    """
    if levels < 2:
        raise InvalidDimensionError(f"need at least 2 levels, got {levels}")
    return np.diag(np.sqrt(np.arange(1.0, levels)), k=1).astype(np.complex128)


def creation(levels: int) -> np.ndarray:
    """Raising operator, the adjoint of :func:`annihilation`."""
    return annihilation(levels).conj().T


def number_op(levels: int) -> np.ndarray:
    """Occupation-number operator a†a."""
    a = annihilation(levels)
    return a.conj().T @ a


def embed(op: np.ndarray, mode: int, layout: ModeLayout) -> np.ndarray:
    """Extend a single-mode operator to the full space: I ⊗ ... ⊗ op ⊗ ... ⊗ I.

    ``mode`` indexes the (Q0, C, Q1) order of ``layout``.
    """
    if mode not in (MODE_Q0, MODE_C, MODE_Q1):
        raise InvalidDimensionError(f"mode must be 0, 1 or 2, got {mode}")
    n = layout.levels[mode]
    if op.shape != (n, n):
        raise InvalidDimensionError(
            f"operator shape {op.shape} does not match mode {mode} truncation {n}"
        )
    factors = [np.eye(m, dtype=np.complex128) for m in layout.levels]
    factors[mode] = np.asarray(op, dtype=np.complex128)
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def hermiticity_defect(m: np.ndarray) -> float:
    """Largest absolute deviation of m from its adjoint."""
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigensystem(m: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian matrix.

    Raises
    ------
    ContractViolationError
        If ``m`` deviates from Hermiticity by more than ``tol``.
    """
    m = np.asarray(m)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ContractViolationError(
            f"matrix is not Hermitian within {tol:g} (defect {defect:.3e})"
        )
    evals, evecs = np.linalg.eigh(m)
    return evals, evecs
