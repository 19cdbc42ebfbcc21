"""Input design: minimise |g_SMM|^2 over constrained input sequences.

The unknown past outputs are replaced by the prediction of a baseline FIR,
y_tilde = H_b u, so that for a fixed input the combiner ``g`` and multipliers
``nu`` follow from the linear KKT system

    [[L sigma2 I + Yp~^T Yp~, U^T], [U, 0]] [g; nu] = [0; u_tilde].

Eliminating (g, nu) this way leaves a smooth objective J(u) = |g(u)|^2 over a
ball (energy constraint) or a box (magnitude constraint), which is minimised
by multi-start projected gradient with Armijo backtracking. Gradients come
from the adjoint of the KKT system.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
from scipy import linalg

from .estimator import factor_kkt, impulse_target, kkt_matrix
from .exceptions import DesignFailed, DimensionError, InfeasiblePoint, SingularDesign
from .signal_matrices import hankel, toeplitz_baseline
from .systems import gen_gaussian_input, gen_prbs

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyConstraint:
    """sum(u^2) <= E0 * N."""

    E0: float = 1.0

    def __post_init__(self):
        if not self.E0 > 0:
            raise ValueError("E0 must be positive")

    def project(self, u):
        u = np.asarray(u, dtype=float)
        budget = self.E0 * u.size
        energy = u @ u
        if energy > budget:
            u = u * np.sqrt(budget / energy)
        return u

    def contains(self, u, atol=1e-9) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(u @ u <= self.E0 * u.size + atol)

    def active(self, u) -> dict:
        u = np.asarray(u, dtype=float)
        energy = float(u @ u)
        budget = self.E0 * u.size
        return {"kind": "energy", "energy": energy, "budget": budget,
                "energy_tight": bool(abs(energy - budget) <= 1e-9 * budget)}


@dataclass(frozen=True)
class MagnitudeConstraint:
    """low <= u_i <= high for every sample."""

    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError("magnitude bounds need low < high")

    def project(self, u):
        return np.clip(np.asarray(u, dtype=float), self.low, self.high)

    def contains(self, u, atol=1e-12) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= self.low - atol) and np.all(u <= self.high + atol))

    def active(self, u) -> dict:
        u = np.asarray(u, dtype=float)
        return {"kind": "magnitude", "energy": float(u @ u),
                "clipped_low": np.flatnonzero(u <= self.low + 1e-12).tolist(),
                "clipped_high": np.flatnonzero(u >= self.high - 1e-12).tolist()}


ConstraintSet = Union[EnergyConstraint, MagnitudeConstraint]


@dataclass(frozen=True)
class SolverOptions:
    n_starts: int = 10
    max_iter: int = 2000
    tol: float = 1e-9
    step0: float = 1.0
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    step_rule: str = "bb"  # "bb": Barzilai-Borwein trial step; "fixed": step0 every iteration
    step_min: float = 1e-6
    step_max: float = 1e6
    gtol: float = 1e-10  # projected-gradient norm for stationarity
    workers: int = 1

    def __post_init__(self):
        if self.step_rule not in ("bb", "fixed"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.n_starts < 1 or self.max_iter < 0:
            raise ValueError("need n_starts >= 1 and max_iter >= 0")


@dataclass(frozen=True)
class DesignProblem:
    N: int
    L0: int
    Lf: int
    sigma2: float
    baseline: np.ndarray
    constraint: ConstraintSet
    options: SolverOptions = field(default_factory=SolverOptions)
    seed: int = 0
    baseline_input: Optional[np.ndarray] = None  # input of the experiment behind the baseline

    def __post_init__(self):
        if self.L0 < 1 or self.Lf < 1:
            raise DimensionError("need L0 >= 1 and Lf >= 1")
        if self.N < self.L0 + self.Lf:
            raise DimensionError(f"N = {self.N} shorter than L = {self.L0 + self.Lf}")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "baseline", np.asarray(self.baseline, dtype=float).reshape(-1))
        # validates the baseline length
        toeplitz_baseline(self.baseline, self.N - self.Lf)

    @property
    def L(self) -> int:
        return self.L0 + self.Lf

    @property
    def M(self) -> int:
        return self.N - self.L + 1

    @property
    def Hb(self) -> np.ndarray:
        return toeplitz_baseline(self.baseline, self.N - self.Lf)


@dataclass
class DesignResult:
    u: np.ndarray
    objective: float
    trace: List[float]
    start_objectives: List[float]
    start_iterations: List[int]
    start_status: List[str]
    best_start: int
    active: dict
    baseline: np.ndarray

    @property
    def iterations(self) -> int:
        return self.start_iterations[self.best_start]


@dataclass(frozen=True)
class DesignEvaluation:
    J: float
    g: np.ndarray
    nu: np.ndarray
    factor: tuple
    Yp: np.ndarray


def predicted_past_outputs(u, Hb: np.ndarray) -> np.ndarray:
    """Baseline prediction H_b u over the first len(H_b) samples."""
    u = np.asarray(u, dtype=float).reshape(-1)
    n = Hb.shape[0]
    if u.size < n:
        raise DimensionError(f"need at least {n} input samples")
    return Hb @ u[:n]


def assemble_kkt(u, Hb: np.ndarray, sigma2: float, L0: int, Lf: int):
    """KKT matrix and right-hand side with Yp replaced by the baseline prediction."""
    u = np.asarray(u, dtype=float).reshape(-1)
    U = hankel(u, L0 + Lf)
    Yp = hankel(predicted_past_outputs(u, Hb), L0)
    K = kkt_matrix(U, Yp, sigma2)
    rhs = np.concatenate([np.zeros(U.shape[1]), impulse_target(L0, Lf)])
    return K, rhs


def _evaluate(u, problem: DesignProblem, Hb) -> DesignEvaluation:
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != problem.N:
        raise DimensionError(f"input must have length N = {problem.N}")
    Yp = hankel(predicted_past_outputs(u, Hb), problem.L0)
    K = kkt_matrix(hankel(u, problem.L), Yp, problem.sigma2)
    try:
        factor, _ = factor_kkt(K)
    except SingularDesign as exc:
        raise InfeasiblePoint(str(exc), cond=exc.cond) from exc
    M = problem.M
    z = linalg.lu_solve(factor, np.concatenate([np.zeros(M), impulse_target(problem.L0, problem.Lf)]))
    g, nu = z[:M], z[M:]
    return DesignEvaluation(float(g @ g), g, nu, factor, Yp)


def design_objective(u, problem: DesignProblem):
    """J(u) = |g(u)|^2 together with g and nu."""
    ev = _evaluate(u, problem, problem.Hb)
    return ev.J, ev.g, ev.nu


def _adjoint_gradient(ev: DesignEvaluation, problem: DesignProblem, Hb) -> np.ndarray:
    M, L0 = problem.M, problem.L0
    # K lam = dJ/dz with J = g^T g; K is symmetric so the same factors apply
    lam = linalg.lu_solve(ev.factor, np.concatenate([2.0 * ev.g, np.zeros(problem.L)]))
    lam_g, lam_nu = lam[:M], lam[M:]
    g, nu = ev.g, ev.nu
    # dJ/du_j = -lam^T (dK/du_j) z. U[i, k] = u[i + k], so the U and U^T blocks
    # contribute full convolutions of the paired vectors.
    grad = -(np.convolve(nu, lam_g) + np.convolve(lam_nu, g))
    # Yp~[i, k] = y~[i + k]; d(lam_g^T Yp^T Yp g) / dy~ = conv(Yp g, lam_g) + conv(Yp lam_g, g)
    a = ev.Yp @ g
    b = ev.Yp @ lam_g
    dy = np.convolve(a, lam_g) + np.convolve(b, g)
    grad[: Hb.shape[0]] -= Hb.T @ dy
    return grad


def design_gradient(u, problem: DesignProblem) -> np.ndarray:
    """Gradient of |g(u)|^2 with respect to the input sequence (adjoint method)."""
    Hb = problem.Hb
    return _adjoint_gradient(_evaluate(u, problem, Hb), problem, Hb)


def project(u, constraint: ConstraintSet) -> np.ndarray:
    """Euclidean projection onto the energy ball or magnitude box."""
    return constraint.project(u)


def _safe_eval(u, problem, Hb):
    try:
        return _evaluate(u, problem, Hb)
    except InfeasiblePoint:
        return None


def _run_start(u0, problem: DesignProblem, Hb):
    """Projected gradient from one feasible start; returns (u, J, trace, iterations, status)."""
    opt = problem.options
    c = problem.constraint
    u = project(u0, c)
    ev = _safe_eval(u, problem, Hb)
    if ev is None:
        return u, np.inf, [], 0, "infeasible start"
    grad = _adjoint_gradient(ev, problem, Hb)
    trace = [ev.J]
    status = "max_iter"
    alpha0 = opt.step0
    it = 0
    for it in range(1, opt.max_iter + 1):
        if np.linalg.norm(project(u - grad, c) - u) <= opt.gtol:
            status = "stationary"
            it -= 1
            break
        alpha = alpha0
        accepted = None
        for _ in range(opt.max_backtracks + 1):
            u_new = project(u - alpha * grad, c)
            decrease = grad @ (u_new - u)
            if decrease < 0:
                ev_new = _safe_eval(u_new, problem, Hb)
                if ev_new is not None and ev_new.J <= ev.J + opt.armijo_c * decrease:
                    accepted = (u_new, ev_new)
                    break
            alpha *= opt.backtrack
        if accepted is None:
            status = "line search stalled"
            it -= 1
            break
        u_new, ev_new = accepted
        grad_new = _adjoint_gradient(ev_new, problem, Hb)
        if opt.step_rule == "bb":
            s, y = u_new - u, grad_new - grad
            sy = s @ y
            alpha0 = float(np.clip((s @ s) / sy, opt.step_min, opt.step_max)) if sy > 0 else opt.step0
        J_old = ev.J
        u, ev, grad = u_new, ev_new, grad_new
        trace.append(ev.J)
        if (J_old - ev.J) <= opt.tol * J_old:
            status = "converged"
            break
    return u, ev.J, trace, it, status


def initial_inputs(problem: DesignProblem) -> List[np.ndarray]:
    """Seeded starting points: scaled Gaussian draws, one PRBS, and the baseline experiment input."""
    N, n = problem.N, problem.options.n_starts
    c = problem.constraint
    if isinstance(c, EnergyConstraint):
        E0 = c.E0
        levels = (-np.sqrt(E0), np.sqrt(E0))
    else:
        E0 = max(c.low ** 2, c.high ** 2)
        levels = (c.low, c.high)
    ss = np.random.SeedSequence(problem.seed)
    children = ss.spawn(n)
    starts = []
    n_gauss = n - 2 if n >= 3 else n
    for s in range(n_gauss):
        starts.append(gen_gaussian_input(N, E0, children[s]).values)
    if n >= 3:
        starts.append(gen_prbs(N, levels[0], levels[1], children[n - 2]).values)
        if problem.baseline_input is not None and len(problem.baseline_input) == N:
            starts.append(np.asarray(problem.baseline_input, dtype=float))
        else:
            starts.append(gen_gaussian_input(N, E0, children[n - 1]).values)
    return [project(u, c) for u in starts]


def optimize_input(problem: DesignProblem) -> DesignResult:
    """Multi-start projected gradient on J(u); the best start wins (ties go to the lower index)."""
    Hb = problem.Hb
    starts = initial_inputs(problem)
    workers = max(1, int(problem.options.workers))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda u0: _run_start(u0, problem, Hb), starts))
    else:
        runs = [_run_start(u0, problem, Hb) for u0 in starts]

    objectives = [r[1] for r in runs]
    if not np.any(np.isfinite(objectives)):
        raise DesignFailed(
            "all optimizer starts were infeasible",
            diagnostics=[{"start": i, "status": r[4]} for i, r in enumerate(runs)],
        )
    best = min(range(len(runs)), key=lambda i: (objectives[i], i))
    u, J, trace, _, _ = runs[best]
    for i, r in enumerate(runs):
        log.debug("start %d: J=%.6g after %d iterations (%s)", i, r[1], r[3], r[4])
    return DesignResult(
        u=u,
        objective=J,
        trace=trace,
        start_objectives=[float(o) for o in objectives],
        start_iterations=[r[3] for r in runs],
        start_status=[r[4] for r in runs],
        best_start=best,
        active=problem.constraint.active(u),
        baseline=problem.baseline,
    )


def structure_check(u, L0: int, Lf: int, rel_tol: float = 0.05) -> dict:
    """Magnitude of the leading L0 and trailing Lf - 1 samples relative to max|u|."""
    u = np.asarray(u, dtype=float).reshape(-1)
    edge = np.concatenate([u[:L0], u[u.size - Lf + 1:]])
    ratio = float(np.max(np.abs(edge)) / np.max(np.abs(u)))
    return {"edge_ratio": ratio, "ok": ratio <= rel_tol}
