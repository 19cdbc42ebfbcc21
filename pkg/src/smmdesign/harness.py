"""Monte Carlo study of optimized versus standard excitation inputs.

Each configuration fixes the true system, the experiment dimensions and the
noise level. The optimized input is designed once from a baseline model and
reused across noise realizations; the standard input (scaled Gaussian or PRBS)
is redrawn for every run unless ``redraw_standard_input`` is off. Run ``r``
draws its input and noise from streams seeded by (master seed, r), so serial
and threaded execution give identical results.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg

from .design import (
    DesignProblem,
    DesignResult,
    EnergyConstraint,
    MagnitudeConstraint,
    SolverOptions,
    optimize_input,
)
from .estimator import estimate_fir
from .exceptions import SingularDesign
from .metrics import fit_w
from .systems import (
    BENCHMARK_GAIN,
    LtiSystem,
    NoiseSpec,
    add_noise,
    benchmark_system,
    gen_gaussian_input,
    gen_prbs,
    impulse_response,
    simulate,
)

log = logging.getLogger(__name__)

STRATEGIES = ("exp_design", "gaussian", "prbs")
SIGMA2_FLOOR = 1e-12  # assumed noise variance when the data are noise-free

# stream tags mixed into seed sequences
_NOISE, _INPUT, _DESIGN, _PRIOR_INPUT, _PRIOR_NOISE = range(1, 6)


@dataclass(frozen=True)
class McConfig:
    runs: int = 200
    seed: int = 0
    N: int = 63
    L0: int = 8
    Lf: int = 13
    sigma2: float = 0.01
    sigma2_assumed: Optional[float] = None
    E0: float = 1.0
    u_low: Optional[float] = None
    u_high: Optional[float] = None
    gain: float = BENCHMARK_GAIN
    numerator: Optional[tuple] = None
    denominator: Optional[tuple] = None
    constraint: str = "energy"
    strategy: str = "exp_design"
    baseline: str = "prior_smm"
    baseline_sigma2: float = 0.01
    baseline_length: Optional[int] = None
    redraw_standard_input: bool = True
    solver: SolverOptions = field(default_factory=SolverOptions)
    workers: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.L0 < 1 or self.Lf < 1 or self.N < self.L0 + self.Lf:
            raise ValueError(f"need N >= L0 + Lf with L0, Lf >= 1 (N={self.N}, L0={self.L0}, Lf={self.Lf})")
        if self.sigma2 < 0 or self.baseline_sigma2 < 0:
            raise ValueError("noise variances must be non-negative")
        if self.sigma2_assumed is not None and not self.sigma2_assumed > 0:
            raise ValueError("sigma2_assumed must be positive")
        if not self.E0 > 0:
            raise ValueError("E0 must be positive")
        if self.constraint not in ("energy", "magnitude"):
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not self.bounds[0] < self.bounds[1]:
            raise ValueError("need u_low < u_high")
        if (self.numerator is None) != (self.denominator is None):
            raise ValueError("numerator and denominator must be given together")
        n_b = self.n_baseline
        if n_b < 1 or n_b > self.N - self.Lf + 1:
            raise ValueError(f"baseline length {n_b} outside [1, N - Lf + 1]")
        if self.baseline == "prior_smm" and self.N < self.L0 + n_b:
            raise ValueError("prior experiment too short for the baseline length")

    @property
    def bounds(self):
        r = np.sqrt(self.E0)
        low = -r if self.u_low is None else self.u_low
        high = r if self.u_high is None else self.u_high
        return float(low), float(high)

    @property
    def n_baseline(self) -> int:
        return self.Lf + 1 if self.baseline_length is None else int(self.baseline_length)

    @property
    def assumed_sigma2(self) -> float:
        if self.sigma2_assumed is not None:
            return float(self.sigma2_assumed)
        return self.sigma2 if self.sigma2 > 0 else SIGMA2_FLOOR

    @property
    def standard_strategy(self) -> str:
        return "gaussian" if self.constraint == "energy" else "prbs"

    def system(self) -> LtiSystem:
        if self.numerator is None:
            return benchmark_system(self.gain)
        return LtiSystem(self.numerator, self.denominator)

    def constraint_set(self):
        if self.constraint == "energy":
            return EnergyConstraint(self.E0)
        return MagnitudeConstraint(*self.bounds)

    def replace(self, **changes) -> "McConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class BaselineInfo:
    source: str
    h: np.ndarray
    fit: Optional[float]  # fit of h against the true response over len(h) samples
    experiment_input: Optional[np.ndarray] = None


@dataclass(frozen=True)
class RunRecord:
    run: int
    seed: int
    fit_w: float
    g_norm_sq: float
    h: np.ndarray


def aggregate(values) -> Dict[str, float]:
    """Box-plot statistics; quartiles by linear interpolation between order statistics."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return {k: float("nan") for k in ("min", "q1", "median", "q3", "max", "mean", "std")}
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return {
        "min": float(x.min()),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(x.max()),
        "mean": float(x.mean()),
        "std": float(x.std(ddof=1)) if x.size > 1 else 0.0,
    }


@dataclass
class McSummary:
    strategy: str
    records: List[RunRecord]
    excluded: List[int]
    h_true: np.ndarray

    @property
    def fit(self) -> np.ndarray:
        return np.array([r.fit_w for r in self.records])

    @property
    def g_norm_sq(self) -> np.ndarray:
        return np.array([r.g_norm_sq for r in self.records])

    @property
    def estimates(self) -> np.ndarray:
        return np.array([r.h for r in self.records])

    @property
    def stats(self) -> Dict[str, Dict[str, float]]:
        return {"fit_w": aggregate(self.fit), "g_norm_sq": aggregate(self.g_norm_sq)}


def run_seed(master: int, run: int) -> int:
    """64-bit seed of run ``run``, derived from the master seed."""
    return int(np.random.SeedSequence([master, run]).generate_state(1, dtype=np.uint64)[0])


def true_fir(config: McConfig, length: Optional[int] = None) -> np.ndarray:
    return impulse_response(config.system(), length or config.Lf).values


def read_fir_csv(path) -> np.ndarray:
    """Read an ``index,value`` CSV; rows are ordered by index, which must be 0..n-1."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or set(rows[0]) != {"index", "value"}:
        raise ValueError(f"{path}: expected a CSV with header 'index,value'")
    idx = [int(r["index"]) for r in rows]
    if sorted(idx) != list(range(len(idx))):
        raise ValueError(f"{path}: indices must be 0..{len(idx) - 1}")
    values = np.empty(len(idx))
    for i, r in zip(idx, rows):
        values[i] = float(r["value"])
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: non-finite coefficient")
    return values


def baseline_model(config: McConfig, source: Optional[str] = None) -> BaselineInfo:
    """Baseline FIR from the true system, a prior SMM experiment, or a CSV file."""
    source = config.baseline if source is None else source
    if source == "true":
        h = true_fir(config, config.N - config.Lf)
        return BaselineInfo(source, h, 100.0)
    if source == "prior_smm":
        n_b = config.n_baseline
        u = gen_gaussian_input(config.N, config.E0, [config.seed, _PRIOR_INPUT])
        y = simulate(config.system(), u)
        y = add_noise(y, NoiseSpec(config.baseline_sigma2, [config.seed, _PRIOR_NOISE]))
        s2 = config.baseline_sigma2 if config.baseline_sigma2 > 0 else SIGMA2_FLOOR
        h = estimate_fir(u, y, config.L0, n_b, s2).h
        return BaselineInfo(source, h, fit_w(true_fir(config, n_b), h), u.values)
    h = read_fir_csv(source)
    if h.size > config.N - config.Lf + 1:
        raise ValueError(f"{source}: {h.size} coefficients exceed N - Lf + 1")
    fit = fit_w(true_fir(config, h.size), h) if h.size >= 2 else None
    return BaselineInfo(source, h, fit)


def design_problem(config: McConfig, baseline: BaselineInfo) -> DesignProblem:
    return DesignProblem(
        N=config.N,
        L0=config.L0,
        Lf=config.Lf,
        sigma2=config.assumed_sigma2,
        baseline=baseline.h,
        constraint=config.constraint_set(),
        options=config.solver,
        seed=int(np.random.SeedSequence([config.seed, _DESIGN]).generate_state(1)[0]),
        baseline_input=baseline.experiment_input,
    )


def design_input(config: McConfig, baseline: Optional[BaselineInfo] = None) -> DesignResult:
    baseline = baseline_model(config) if baseline is None else baseline
    return optimize_input(design_problem(config, baseline))


def _standard_input(config: McConfig, strategy: str, seed: int) -> np.ndarray:
    if strategy == "gaussian":
        return gen_gaussian_input(config.N, config.E0, seed).values
    return gen_prbs(config.N, *config.bounds, seed).values


def _one_run(config: McConfig, strategy: str, r: int, u_design, sys, h_true):
    seed = run_seed(config.seed, r)
    if strategy == "exp_design":
        u = u_design
    else:
        input_seed = [seed, _INPUT] if config.redraw_standard_input else [config.seed, _INPUT]
        u = _standard_input(config, strategy, input_seed)
    y = add_noise(simulate(sys, u), NoiseSpec(config.sigma2, [seed, _NOISE]))
    try:
        est = estimate_fir(u, y, config.L0, config.Lf, config.assumed_sigma2)
    except (SingularDesign, linalg.LinAlgError) as exc:
        log.warning("run %d (%s) excluded: %s", r, strategy, exc)
        return r, None
    if not np.all(np.isfinite(est.h)):
        return r, None
    return r, RunRecord(r, seed, fit_w(h_true, est.h), est.g_norm_sq, est.h)


def run_mc(config: McConfig, design: Optional[DesignResult] = None) -> McSummary:
    """Monte Carlo runs of ``config.strategy``; ``design`` skips re-optimizing the input."""
    strategy = config.strategy
    u_design = None
    if strategy == "exp_design":
        u_design = (design_input(config) if design is None else design).u
    sys = config.system()
    h_true = true_fir(config)

    def job(r):
        return _one_run(config, strategy, r, u_design, sys, h_true)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(job, range(config.runs)))
    else:
        results = [job(r) for r in range(config.runs)]
    records = [rec for _, rec in results if rec is not None]
    excluded = [r for r, rec in results if rec is None]
    if excluded:
        log.warning("%s: %d of %d runs excluded", strategy, len(excluded), config.runs)
    return McSummary(strategy, records, excluded, h_true)


@dataclass
class Comparison:
    baseline: BaselineInfo
    design: DesignResult
    summaries: Dict[str, McSummary]


def compare(config: McConfig, baseline: Optional[BaselineInfo] = None) -> Comparison:
    """Optimized input versus the standard input for the configured constraint."""
    baseline = baseline_model(config) if baseline is None else baseline
    design = design_input(config, baseline)
    summaries = {
        "exp_design": run_mc(config.replace(strategy="exp_design"), design),
        config.standard_strategy: run_mc(config.replace(strategy=config.standard_strategy)),
    }
    return Comparison(baseline, design, summaries)


def snr_sweep(config: McConfig, sigma2_list: Sequence[float]) -> Dict[float, Comparison]:
    """Repeat the comparison for each noise variance; the baseline model stays fixed."""
    if any(not s > 0 for s in sigma2_list):
        raise ValueError("noise variances in the sweep must be positive")
    baseline = baseline_model(config)
    return {float(s2): compare(config.replace(sigma2=float(s2), sigma2_assumed=None), baseline)
            for s2 in sigma2_list}


def baseline_robustness(config: McConfig, sources: Sequence[str]) -> List[Comparison]:
    """Design one input per baseline source and evaluate each by Monte Carlo."""
    out = []
    for source in sources:
        baseline = baseline_model(config, source)
        design = design_input(config, baseline)
        summary = run_mc(config.replace(strategy="exp_design"), design)
        out.append(Comparison(baseline, design, {"exp_design": summary}))
    return out
