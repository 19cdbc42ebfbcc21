import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smmdesign.systems import (
    BENCHMARK_GAIN,
    LtiSystem,
    NoiseSpec,
    Trajectory,
    add_noise,
    benchmark_system,
    gen_gaussian_input,
    gen_prbs,
    h2_norm_sq,
    impulse_response,
    simulate,
    unit_delay,
)

from conftest import recursion_impulse_response


def test_benchmark_first_markov_parameters(bench):
    h = impulse_response(bench, 4).values
    k = BENCHMARK_GAIN
    assert h[0] == 0.0
    assert h[1] == pytest.approx(0.1159, abs=1e-15)
    # by hand: h2 = 2.2 k, h3 = (2.2^2 - 2.42 + 0.5) k
    assert h[2] == pytest.approx(2.2 * k, rel=1e-12)
    assert h[3] == pytest.approx(2.92 * k, rel=1e-12)
    assert h[2] == pytest.approx(0.25498, abs=5e-6)
    assert h[3] == pytest.approx(0.33843, abs=5e-6)


def test_impulse_response_matches_recursion(bench, h_true_long):
    np.testing.assert_allclose(impulse_response(bench, 200).values, h_true_long, atol=1e-14)


def test_unit_delay():
    np.testing.assert_array_equal(impulse_response(unit_delay(), 3).values, [0, 1, 0])
    np.testing.assert_array_equal(simulate(unit_delay(), [1, 1, 1]).values, [0, 1, 1])


def test_simulate_impulse_is_impulse_response(bench):
    delta = np.zeros(30)
    delta[0] = 1
    np.testing.assert_array_equal(simulate(bench, delta).values, impulse_response(bench, 30).values)


def test_simulate_against_truncated_convolution(bench, h_true_long):
    u = np.random.default_rng(1).standard_normal(63)
    y_oracle = np.convolve(u, h_true_long)[:63]
    assert np.max(np.abs(simulate(bench, u).values - y_oracle)) <= 1e-10


def test_simulate_keeps_start_index(bench):
    y = simulate(bench, Trajectory([1.0, 0.0, 0.0], start=-2))
    assert y.start == -2 and len(y) == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_simulate_is_linear(seed, a, b):
    sys = benchmark_system()
    rng = np.random.default_rng(seed)
    u1, u2 = rng.standard_normal((2, 40))
    lhs = simulate(sys, a * u1 + b * u2).values
    rhs = a * simulate(sys, u1).values + b * simulate(sys, u2).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_h2_norm(bench):
    assert abs(h2_norm_sq(bench, 200) - 1.0) <= 0.01
    assert h2_norm_sq(unit_delay()) == 1.0
    assert h2_norm_sq(benchmark_system(2 * BENCHMARK_GAIN)) == pytest.approx(4 * h2_norm_sq(bench), rel=1e-12)


def test_unstable_system_rejected():
    with pytest.raises(ValueError, match="unstable"):
        LtiSystem([1.0], [1.0, -1.1])
    with pytest.raises(ValueError, match="proper"):
        LtiSystem([1.0, 0.0, 0.0], [1.0, 0.5])


def test_denominator_is_normalised():
    sys = LtiSystem([2.0], [2.0, -1.0])
    assert sys.denominator[0] == 1.0
    np.testing.assert_allclose(impulse_response(sys, 3).values, [0, 1, 0.5])


def test_add_noise():
    y = np.linspace(0, 1, 10)
    np.testing.assert_array_equal(add_noise(y, NoiseSpec(0.0, 3)).values, y)
    a = add_noise(y, NoiseSpec(0.1, 7)).values
    b = add_noise(y, NoiseSpec(0.1, 7)).values
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, add_noise(y, NoiseSpec(0.1, 8)).values)
    with pytest.raises(ValueError):
        NoiseSpec(-1.0)


def test_noise_variance_law_of_large_numbers():
    w = add_noise(np.zeros(10**6), NoiseSpec(0.01, 2024)).values
    assert abs(w.var() - 0.01) <= 0.01 * 0.01


def test_gaussian_input():
    u = gen_gaussian_input(63, 1.0, 5).values
    assert abs(u @ u - 63) <= 1e-12
    np.testing.assert_array_equal(u, gen_gaussian_input(63, 1.0, 5).values)
    np.testing.assert_allclose(gen_gaussian_input(63, 4.0, 5).values, 2 * u, rtol=1e-14)


def test_prbs():
    u = gen_prbs(4, -1, 1, 0).values
    assert set(np.unique(u)) <= {-1.0, 1.0}
    E0 = 2.5
    v = gen_prbs(63, -np.sqrt(E0), np.sqrt(E0), 11).values
    assert v @ v == pytest.approx(E0 * 63, rel=1e-14)
    np.testing.assert_array_equal(v, gen_prbs(63, -np.sqrt(E0), np.sqrt(E0), 11).values)
    with pytest.raises(ValueError):
        gen_prbs(4, 1, 1, 0)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([])
    with pytest.raises(ValueError):
        Trajectory([1.0, np.nan])
    t = Trajectory([1, 2, 3], start=-1)
    np.testing.assert_array_equal(t.time, [-1, 0, 1])
    np.testing.assert_array_equal(np.asarray(t), [1, 2, 3])
