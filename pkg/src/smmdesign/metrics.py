"""Fit measure and A/D/E optimality criteria of the SMM estimate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateReference


def fit_w(h_true, h_est) -> float:
    """Normalised fit in percent, 100 * (1 - |h - h_est| / |h - mean(h)|).

    100 is a perfect estimate; the value is unbounded below.
    """
    h = np.asarray(h_true, dtype=float).reshape(-1)
    hh = np.asarray(h_est, dtype=float).reshape(-1)
    if h.size != hh.size:
        raise ValueError(f"length mismatch ({h.size} != {hh.size})")
    if h.size < 2:
        raise ValueError("need at least two coefficients")
    den = np.sum((h - h.mean()) ** 2)
    if den == 0:
        raise DegenerateReference("reference impulse response is constant")
    return float(100.0 * (1.0 - np.sqrt(np.sum((h - hh) ** 2) / den)))


@dataclass(frozen=True)
class CriteriaReport:
    J_A: float
    J_D: float
    J_E: float
    L: int
    sigma2: float
    g_norm_sq: float


def optimality_criteria(L: int, sigma2: float, g_norm_sq: float) -> CriteriaReport:
    """Trace, log-determinant and largest eigenvalue of sigma2 * |g|^2 * I_L."""
    if L < 1 or not sigma2 > 0 or not g_norm_sq > 0:
        raise ValueError("need L >= 1, sigma2 > 0 and g_norm_sq > 0")
    J_E = sigma2 * g_norm_sq
    return CriteriaReport(L * J_E, L * float(np.log(J_E)), J_E, int(L), float(sigma2), float(g_norm_sq))
