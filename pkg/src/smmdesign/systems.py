"""Discrete-time SISO systems, noise injection and excitation signals."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import signal

from .exceptions import DimensionError

#: Gain that gives the benchmark system a unit H2 norm.
BENCHMARK_GAIN = 0.1159

#: Default truncation for norm and convolution checks. The slowest pole of the
#: benchmark has modulus ~0.85, so the tail beyond 200 samples is < 1e-14.
DEFAULT_TRUNCATION = 200


@dataclass(frozen=True)
class Trajectory:
    """A finite real scalar signal starting at time index ``start``."""

    values: np.ndarray
    start: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size < 1:
            raise DimensionError("a trajectory needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise ValueError("trajectory values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start", int(self.start))

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values.copy()
        return self.values.astype(dtype)

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self))


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean white Gaussian measurement noise of variance ``variance``."""

    variance: float
    seed: int = 0

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValueError(f"noise variance must be non-negative, got {self.variance}")


@dataclass(frozen=True)
class LtiSystem:
    """Rational transfer function in descending powers of z.

    The denominator is normalised to be monic and must have all roots strictly
    inside the unit circle. ``order`` is the McMillan degree; it defaults to the
    denominator degree.
    """

    numerator: np.ndarray
    denominator: np.ndarray
    order: Optional[int] = field(default=None)

    def __post_init__(self):
        num = np.trim_zeros(np.atleast_1d(np.asarray(self.numerator, dtype=float)), "f")
        den = np.trim_zeros(np.atleast_1d(np.asarray(self.denominator, dtype=float)), "f")
        if den.size == 0:
            raise ValueError("denominator must be nonzero")
        if num.size == 0:
            num = np.zeros(1)
        if num.size > den.size:
            raise ValueError("transfer function must be proper (deg num <= deg den)")
        num = num / den[0]
        den = den / den[0]
        poles = np.roots(den)
        if poles.size and np.max(np.abs(poles)) >= 1.0:
            raise ValueError(
                f"unstable denominator: max |pole| = {np.max(np.abs(poles)):.6g}"
            )
        order = den.size - 1 if self.order is None else int(self.order)
        if order < 1:
            raise ValueError("McMillan degree must be a positive integer")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "order", order)

    @property
    def poles(self) -> np.ndarray:
        return np.roots(self.denominator)

    def filter_coefficients(self):
        """(b, a) in powers of z^-1, as used by :func:`scipy.signal.lfilter`."""
        b = np.zeros_like(self.denominator)
        b[b.size - self.numerator.size:] = self.numerator
        return b, self.denominator

    @classmethod
    def fir(cls, coefficients) -> "LtiSystem":
        """FIR system sum_i h_i z^-i."""
        h = np.atleast_1d(np.asarray(coefficients, dtype=float))
        den = np.zeros(h.size)
        den[0] = 1.0
        return cls(h, den, order=max(h.size - 1, 1))


def benchmark_system(gain: float = BENCHMARK_GAIN) -> LtiSystem:
    """Fourth-order benchmark G(z) = k (z^3 + 0.5 z) / (z^4 - 2.2 z^3 + 2.42 z^2 - 1.87 z + 0.7225)."""
    return LtiSystem(
        gain * np.array([1.0, 0.0, 0.5, 0.0]),
        np.array([1.0, -2.2, 2.42, -1.87, 0.7225]),
        order=4,
    )


def unit_delay() -> LtiSystem:
    return LtiSystem([1.0], [1.0, 0.0], order=1)


def _values(x) -> np.ndarray:
    if isinstance(x, Trajectory):
        return x.values
    return np.asarray(x, dtype=float).reshape(-1)


def impulse_response(sys: LtiSystem, length: int) -> Trajectory:
    """First ``length`` Markov parameters h_0, h_1, ... of ``sys``."""
    if length < 1:
        raise ValueError("length must be a positive integer")
    delta = np.zeros(length)
    delta[0] = 1.0
    b, a = sys.filter_coefficients()
    return Trajectory(signal.lfilter(b, a, delta))


def simulate(sys: LtiSystem, u) -> Trajectory:
    """Zero-initial-state response of ``sys`` to the input trajectory ``u``."""
    start = u.start if isinstance(u, Trajectory) else 0
    b, a = sys.filter_coefficients()
    return Trajectory(signal.lfilter(b, a, _values(u)), start)


def h2_norm_sq(sys: LtiSystem, truncation: int = DEFAULT_TRUNCATION) -> float:
    """Truncated squared H2 norm, sum of the first ``truncation`` h_i^2."""
    h = impulse_response(sys, truncation).values
    return float(h @ h)


def add_noise(y, noise: NoiseSpec) -> Trajectory:
    """Add seeded i.i.d. N(0, variance) samples to ``y``."""
    start = y.start if isinstance(y, Trajectory) else 0
    values = _values(y)
    if noise.variance == 0:
        return Trajectory(values, start)
    rng = np.random.default_rng(noise.seed)
    w = rng.standard_normal(values.size) * np.sqrt(noise.variance)
    return Trajectory(values + w, start)


def gen_gaussian_input(N: int, E0: float, seed) -> Trajectory:
    """Zero-mean i.i.d. Gaussian sequence rescaled to energy exactly ``E0 * N``."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    if not E0 > 0:
        raise ValueError("E0 must be positive")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(N)
    while not np.any(u):
        u = rng.standard_normal(N)
    return Trajectory(u * np.sqrt(E0 * N / (u @ u)))


def gen_prbs(N: int, low: float, high: float, seed) -> Trajectory:
    """Binary sequence over {low, high} from seeded fair coin flips."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    if not low < high:
        raise ValueError("PRBS levels need low < high")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=N)
    return Trajectory(np.where(bits == 1, high, low))
