"""Closed-form coherent information along the pure-dephasing axis (q_u = 0).

These are exact oracles for the simulator: with no depolarizing noise the
ORUM reduces to ``n`` independent dephasing channels, whose output spectra for
the maximally mixed and Z2 sources are known in closed form.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ._validation import check_count, check_rate

# binomial sums switch to log-space above this qubit count
LOG_SPACE_N = 30


def _xlog2x(x: float) -> float:
    return 0.0 if x <= 0.0 else x * math.log2(x)


def binary_entropy(q: float) -> float:
    q = check_rate(q, "q")
    return -_xlog2x(q) - _xlog2x(1.0 - q)


def ic_maximally_mixed_dephasing(n: int, q_z: float) -> float:
    n = check_count(n, "n", minimum=1)
    return n * (1.0 - binary_entropy(q_z))


def beta_weight(k: int, n: int, q_z: float) -> float:
    """Probability of one specific weight-``k`` Z error pattern on ``n`` qubits."""
    n = check_count(n, "n", minimum=1)
    k = check_count(k, "k")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    q_z = check_rate(q_z, "q_z")
    return (1.0 - q_z) ** (n - k) * q_z**k


def _log_beta(k: np.ndarray, n: int, q: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        lq, l1q = np.log(q), np.log1p(-q)
        # 0 * log 0 := 0 keeps beta(0) = 1 at q = 0 and beta(n) = 1 at q = 1
        out = np.where(n - k > 0, (n - k) * l1q, 0.0)
        out = out + np.where(k > 0, k * lq, 0.0)
    return out


def z2_output_spectrum(n: int, q_z: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(binom(n,k), beta_k, lambda_k)`` for ``k = 0..n``.

    ``beta_k`` are the joint (reference + system) eigenvalues and
    ``lambda_k = (beta_k + beta_{n-k}) / 2`` the system eigenvalues, each with
    multiplicity ``binom(n, k)``.
    """
    n = check_count(n, "n", minimum=1)
    q_z = check_rate(q_z, "q_z")
    k = np.arange(n + 1)
    binom = np.array([math.comb(n, int(j)) for j in k], dtype=float)
    beta = np.exp(_log_beta(k, n, q_z))
    lam = 0.5 * (beta + beta[::-1])
    return binom, beta, lam


def _sum_xlog2x(weights: np.ndarray, p: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(weights[mask] * p[mask] * np.log2(p[mask])))


def _sum_xlog2x_logspace(log_w: np.ndarray, log_p: np.ndarray) -> float:
    mask = np.isfinite(log_p)
    lw, lp = log_w[mask], log_p[mask]
    return float(np.sum(np.exp(lw + lp) * lp) / math.log(2))


def ic_z2_dephasing(n: int, q_z: float) -> float:
    """Coherent information of the Z2 source through ``n`` dephasing channels.

    ``I_c = sum_k C(n,k) [beta_k log2 beta_k - lambda_k log2 lambda_k]``.
    """
    n = check_count(n, "n", minimum=1)
    q_z = check_rate(q_z, "q_z")
    if n <= LOG_SPACE_N:
        binom, beta, lam = z2_output_spectrum(n, q_z)
        return _sum_xlog2x(binom, beta) - _sum_xlog2x(binom, lam)

    k = np.arange(n + 1)
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    log_beta = _log_beta(k, n, q_z)
    log_lam = np.logaddexp(log_beta, log_beta[::-1]) - math.log(2)
    return _sum_xlog2x_logspace(log_binom, log_beta) - _sum_xlog2x_logspace(log_binom, log_lam)
