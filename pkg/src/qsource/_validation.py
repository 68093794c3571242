"""Input validation helpers shared by the estimators, library functions and CLI."""

from __future__ import annotations

import numbers

import numpy as np

MAX_QUBITS = 12

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-8
NORM_ATOL = 1e-12


class PSDViolationError(ValueError):
    """Raised when a density matrix has an eigenvalue below -PSD_ATOL."""


def check_rate(value, name: str = "rate") -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not np.isfinite(value) or value < 0.0 or value > 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_count(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_odd(value, name: str) -> int:
    value = check_count(value, name, minimum=1)
    if value % 2 == 0:
        raise ValueError(f"{name} must be odd, got {value}")
    return value


def check_register_size(n_qubits: int) -> int:
    if n_qubits > MAX_QUBITS:
        raise ValueError(
            f"register of {n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}"
        )
    return n_qubits


def check_positive(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_square_power_of_two(mat: np.ndarray) -> int:
    """Return the qubit count of a ``2^n x 2^n`` matrix, or raise."""
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    n = int(mat.shape[0]).bit_length() - 1
    if 2**n != mat.shape[0]:
        raise ValueError(f"matrix dimension {mat.shape[0]} is not a power of two")
    return n


def check_state_vector(vec, n_qubits: int, *, normalized: bool = True) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (2**n_qubits,):
        raise ValueError(f"expected {2**n_qubits} amplitudes, got shape {vec.shape}")
    if normalized:
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
    return vec


def check_density_matrix(mat, n_qubits: int) -> np.ndarray:
    """Validate shape, Hermiticity and unit trace. PSD is checked lazily on diagonalization."""
    mat = np.asarray(mat, dtype=complex)
    dim = 2**n_qubits
    if mat.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix, got shape {mat.shape}")
    herm_err = np.max(np.abs(mat - mat.conj().T)) if dim else 0.0
    if herm_err > HERMITIAN_ATOL:
        raise ValueError(f"matrix is not Hermitian (max deviation {herm_err:.3e})")
    tr = np.trace(mat).real
    if abs(tr - 1.0) > TRACE_ATOL:
        raise ValueError(f"matrix does not have unit trace (trace={tr!r})")
    return mat


def check_eigenvalues(eigvals: np.ndarray) -> np.ndarray:
    lo = float(np.min(eigvals)) if eigvals.size else 0.0
    if lo < -PSD_ATOL:
        raise PSDViolationError(f"density matrix has negative eigenvalue {lo:.3e}")
    return eigvals
