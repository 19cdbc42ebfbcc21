"""Signal matrix model (SMM) estimation and the least-squares FIR baseline.

The SMM combiner ``g`` solves the equality-constrained quadratic program

    min_g  L * sigma2 * |g|^2 + |Yp g - y_ini|^2   s.t.  U g = u_tilde,

which is the tractable approximation of the maximum-likelihood problem with the
diagonal covariance sigma2 * |g|^2 * I. The prediction is ``Yf @ g``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .exceptions import (
    DegenerateCombiner,
    DimensionError,
    SingularDesign,
    SingularRegressor,
)
from .signal_matrices import SignalMatrixSet, build_signal_matrices, numerical_rank
from .systems import Trajectory

#: Reciprocal condition number below which a KKT matrix is declared singular.
KKT_RCOND_MIN = np.finfo(float).eps


@dataclass(frozen=True)
class SmmEstimate:
    g: np.ndarray
    h: np.ndarray
    nu: Optional[np.ndarray]
    sigma2: float

    @property
    def g_norm_sq(self) -> float:
        return float(self.g @ self.g)

    @property
    def cov_scale(self) -> float:
        """Diagonal entry sigma2 * |g|^2 of the relaxed output covariance."""
        return self.sigma2 * self.g_norm_sq


@dataclass(frozen=True)
class MleDiagnostics:
    full: float
    diagonal: float
    Sigma: np.ndarray


@dataclass(frozen=True)
class LsEstimate:
    h: np.ndarray
    cov_factor: np.ndarray  # (Phi^T Phi)^-1; multiply by sigma2 for cov(h)


def impulse_target(L0: int, Lf: int) -> np.ndarray:
    """Stacked input window col(0_{L0}, 1, 0_{Lf-1}) for impulse response estimation."""
    u_tilde = np.zeros(L0 + Lf)
    u_tilde[L0] = 1.0
    return u_tilde


def _check_sigma2(sigma2):
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")


def _rhs_shift(S: SignalMatrixSet, y_ini) -> np.ndarray:
    if y_ini is None:
        return np.zeros(S.M)
    y_ini = np.asarray(y_ini, dtype=float).reshape(-1)
    if y_ini.size != S.L0:
        raise DimensionError(f"y_ini must have length L0 = {S.L0}")
    return S.Yp.T @ y_ini


def kkt_matrix(U: np.ndarray, Yp: np.ndarray, sigma2: float) -> np.ndarray:
    """[[L sigma2 I + Yp^T Yp, U^T], [U, 0]]."""
    L, M = U.shape
    K = np.zeros((M + L, M + L))
    K[:M, :M] = Yp.T @ Yp
    K[np.arange(M), np.arange(M)] += L * sigma2
    K[:M, M:] = U.T
    K[M:, :M] = U
    return K


def factor_kkt(K: np.ndarray):
    """LU-factor ``K`` and reject it when the 1-norm condition estimate is too large.

    Returns the factorization for :func:`scipy.linalg.lu_solve` and the
    reciprocal condition estimate.
    """
    if not np.all(np.isfinite(K)):
        raise SingularDesign("KKT matrix has non-finite entries", cond=np.inf)
    anorm = np.linalg.norm(K, 1)
    lu, piv, info = lapack.dgetrf(K)
    if info > 0 or anorm == 0:
        raise SingularDesign("KKT matrix is exactly singular", cond=np.inf)
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    if rcond < KKT_RCOND_MIN:
        raise SingularDesign(
            f"KKT matrix is numerically singular (condition estimate {1 / max(rcond, 1e-300):.3g})",
            cond=1 / max(rcond, 1e-300),
        )
    return (lu, piv), rcond


def _check_input_rank(S: SignalMatrixSet):
    rank = numerical_rank(S.U)
    if rank < S.L:
        raise SingularDesign(
            f"input Hankel matrix has rank {rank} < L = {S.L}; input is not exciting enough",
            rank=rank,
        )


def smm_closed_form(S: SignalMatrixSet, sigma2: float, u_tilde, y_ini=None) -> SmmEstimate:
    """g = F^-1 U^T (U F^-1 U^T)^-1 u_tilde with F = L sigma2 I + Yp^T Yp.

    With a nonzero ``y_ini`` the affine term F^-1 Yp^T y_ini is included. Both
    inverses are applied through Cholesky solves.
    """
    _check_sigma2(sigma2)
    u_tilde = np.asarray(u_tilde, dtype=float).reshape(-1)
    if u_tilde.size != S.L:
        raise DimensionError(f"u_tilde must have length L = {S.L}")
    _check_input_rank(S)
    U = S.U
    F = S.Yp.T @ S.Yp
    F[np.diag_indices_from(F)] += S.L * sigma2
    F_cho = linalg.cho_factor(F)
    X = linalg.cho_solve(F_cho, U.T)
    g0 = linalg.cho_solve(F_cho, _rhs_shift(S, y_ini))
    G = U @ X
    try:
        w = linalg.solve(G, u_tilde - U @ g0, assume_a="pos")
    except linalg.LinAlgError as exc:
        raise SingularDesign(f"U F^-1 U^T is not positive definite: {exc}") from exc
    g = g0 + X @ w
    return SmmEstimate(g, S.Yf @ g, -w, float(sigma2))


def smm_kkt_solve(S: SignalMatrixSet, sigma2: float, u_tilde, y_ini=None) -> SmmEstimate:
    """Solve the stationarity and feasibility conditions as one symmetric linear system."""
    _check_sigma2(sigma2)
    u_tilde = np.asarray(u_tilde, dtype=float).reshape(-1)
    if u_tilde.size != S.L:
        raise DimensionError(f"u_tilde must have length L = {S.L}")
    K = kkt_matrix(S.U, S.Yp, sigma2)
    factor, _ = factor_kkt(K)
    z = linalg.lu_solve(factor, np.concatenate([_rhs_shift(S, y_ini), u_tilde]))
    g, nu = z[: S.M], z[S.M:]
    return SmmEstimate(g, S.Yf @ g, nu, float(sigma2))


def estimate_fir(u, y, L0: int, Lf: int, sigma2: float) -> SmmEstimate:
    """Estimate the first ``Lf`` impulse response coefficients from one experiment."""
    S = build_signal_matrices(u, y, L0, Lf)
    return smm_closed_form(S, sigma2, impulse_target(L0, Lf))


def output_covariance(g, sigma2: float, L: int) -> np.ndarray:
    """Covariance of Y g given g: sigma2 times the lag-|i-j| autocorrelation of g."""
    g = np.asarray(g, dtype=float).reshape(-1)
    acf = np.correlate(g, g, mode="full")[g.size - 1:]
    lags = np.zeros(L)
    n = min(L, acf.size)
    lags[:n] = acf[:n]
    return sigma2 * linalg.toeplitz(lags)


def mle_objective(S: SignalMatrixSet, sigma2: float, g, y_ini=None) -> MleDiagnostics:
    """Negative log-likelihood of the combiner ``g``, full and diagonally relaxed.

    The residual is the past-window mismatch Yp g - y_ini padded with ``Lf``
    zeros, weighted by the full covariance for ``full``.
    """
    _check_sigma2(sigma2)
    g = np.asarray(g, dtype=float).reshape(-1)
    gg = float(g @ g)
    if gg == 0:
        raise DegenerateCombiner("g = 0 gives a singular output covariance")
    y_ini = np.zeros(S.L0) if y_ini is None else np.asarray(y_ini, dtype=float).reshape(-1)
    r_past = S.Yp @ g - y_ini
    r = np.concatenate([r_past, np.zeros(S.Lf)])
    Sigma = output_covariance(g, sigma2, S.L)
    cho = linalg.cho_factor(Sigma)
    logdet = 2.0 * np.sum(np.log(np.diag(cho[0])))
    full = logdet + r @ linalg.cho_solve(cho, r)
    diagonal = S.L * np.log(sigma2 * gg) + (r_past @ r_past) / (sigma2 * gg)
    return MleDiagnostics(float(full), float(diagonal), Sigma)


def dd_simulate(S: SignalMatrixSet, sigma2: float, u_ini, y_ini, u) -> Trajectory:
    """Predict the output over the future window from data matrices alone."""
    u_ini = np.asarray(u_ini, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if u_ini.size != S.L0 or u.size != S.Lf:
        raise DimensionError(f"need len(u_ini) = {S.L0} and len(u) = {S.Lf}")
    est = smm_closed_form(S, sigma2, np.concatenate([u_ini, u]), y_ini)
    return Trajectory(est.h)


def ls_regressor(u, n: int, past_inputs=None) -> np.ndarray:
    """Toeplitz regressor with rows (u_t, u_{t-1}, ..., u_{t-n+1}).

    ``past_inputs`` holds u_{1-n} .. u_{-1} in time order; when omitted the
    past is taken as zero.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if past_inputs is None:
        past = np.zeros(n - 1)
    else:
        past = np.asarray(past_inputs, dtype=float).reshape(-1)
        if past.size != n - 1:
            raise DimensionError(f"need {n - 1} past inputs, got {past.size}")
    first_row = np.concatenate([u[:1], past[::-1]])
    return linalg.toeplitz(u, first_row)


def ls_fir(u, y, n: int, past_inputs=None) -> LsEstimate:
    """Least-squares FIR of length ``n``; past inputs default to zero (windowed case)."""
    y = np.asarray(y, dtype=float).reshape(-1)
    Phi = ls_regressor(u, n, past_inputs)
    if Phi.shape[0] != y.size:
        raise DimensionError("input and output lengths differ")
    rank = numerical_rank(Phi)
    if rank < n:
        raise SingularRegressor(f"regressor has rank {rank} < n = {n}")
    gram = Phi.T @ Phi
    cho = linalg.cho_factor(gram)
    h = linalg.cho_solve(cho, Phi.T @ y)
    return LsEstimate(h, linalg.cho_solve(cho, np.eye(n)))
