"""Hankel signal matrices, baseline Toeplitz maps and excitation checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import DimensionError

#: Relative singular-value threshold for numerical rank decisions.
RANK_RTOL = 1e-10


def _as_vector(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


def hankel(x, depth: int) -> np.ndarray:
    """Depth-``depth`` Hankel matrix of ``x``; entry (i, j) is x[i + j]."""
    x = _as_vector(x)
    if depth < 1 or depth > x.size:
        raise DimensionError(f"Hankel depth {depth} invalid for a signal of length {x.size}")
    return linalg.hankel(x[:depth], x[depth - 1:])


def numerical_rank(A: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Rank with singular values counted above max(shape) * s_max * rtol."""
    A = np.atleast_2d(A)
    if A.size == 0:
        return 0
    s = linalg.svdvals(A)
    if s[0] == 0:
        return 0
    return int(np.sum(s > max(A.shape) * s[0] * rtol))


@dataclass(frozen=True)
class SignalMatrixSet:
    """Past/future partition of the input and output Hankel matrices.

    ``Up``/``Yp`` hold the first ``L0`` rows (past window) and ``Uf``/``Yf``
    the last ``Lf`` rows (future window). Every block has ``M = N - L + 1``
    columns with ``L = L0 + Lf``.
    """

    Up: np.ndarray
    Uf: np.ndarray
    Yp: np.ndarray
    Yf: np.ndarray

    @property
    def L0(self) -> int:
        return self.Up.shape[0]

    @property
    def Lf(self) -> int:
        return self.Uf.shape[0]

    @property
    def L(self) -> int:
        return self.L0 + self.Lf

    @property
    def M(self) -> int:
        return self.Up.shape[1]

    @property
    def U(self) -> np.ndarray:
        return np.vstack([self.Up, self.Uf])

    @property
    def Y(self) -> np.ndarray:
        return np.vstack([self.Yp, self.Yf])


def build_signal_matrices(u, y, L0: int, Lf: int) -> SignalMatrixSet:
    """Split the depth-(L0 + Lf) Hankel matrices of ``u`` and ``y`` into past and future."""
    u, y = _as_vector(u), _as_vector(y)
    if u.size != y.size:
        raise DimensionError(f"input and output lengths differ ({u.size} != {y.size})")
    if L0 < 0 or Lf < 1:
        raise DimensionError("need L0 >= 0 and Lf >= 1")
    L = L0 + Lf
    if u.size < L:
        raise DimensionError(f"data length {u.size} shorter than window L = {L}")
    Hu, Hy = hankel(u, L), hankel(y, L)
    return SignalMatrixSet(Hu[:L0], Hu[L0:], Hy[:L0], Hy[L0:])


def toeplitz_baseline(h_b, size: int) -> np.ndarray:
    """Square lower-triangular Toeplitz map of the baseline FIR ``h_b``.

    Coefficients beyond ``h_b`` are zero-padded. A square map of side ``size``
    only uses h_0 .. h_{size-1}, so one extra trailing coefficient is accepted
    and ignored.
    """
    h = _as_vector(h_b)
    if size < 1:
        raise DimensionError("size must be positive")
    if h.size > size + 1:
        raise DimensionError(f"{h.size} baseline coefficients exceed the limit {size + 1}")
    col = np.zeros(size)
    n = min(h.size, size)
    col[:n] = h[:n]
    return linalg.toeplitz(col, np.zeros(size))


@dataclass(frozen=True)
class ExcitationReport:
    exciting: bool
    rank: int
    rows: int
    singular_values: np.ndarray

    def __bool__(self):
        return self.exciting


def is_persistently_exciting(u, order: int) -> ExcitationReport:
    """Check that the depth-``order`` Hankel matrix of ``u`` has full row rank."""
    H = hankel(u, order)
    s = linalg.svdvals(H)
    rank = numerical_rank(H)
    return ExcitationReport(rank == order, rank, order, s)
