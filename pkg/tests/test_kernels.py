import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qmcdisc import kernels as kn
from qmcdisc.errors import InvalidParameter
from oracles import convolve_hat


def test_hat_point_values():
    for u in (0.1, 0.5, 1.0):
        assert kn.hat_eval(0.0, u, 2) == pytest.approx(u)
    assert kn.hat_eval(0.3, 1, 1) == 1.0
    assert kn.hat_eval(0.6, 1, 1) == 0.0
    assert kn.hat_eval(-0.5, 1, 1) == 1.0 and kn.hat_eval(0.5, 1, 1) == 0.0
    assert kn.hat_eval(0.0, 1, 3) == pytest.approx(0.75, abs=1e-15)


def test_hat_rejects_bad_width():
    with pytest.raises(InvalidParameter):
        kn.hat_eval(0.0, 0.0, 2)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_convolution_identity(r):
    rng = np.random.default_rng(r)
    h, N = 1e-4, 10000  # 2e4 + 1 nodes on [-1, 1]
    grid = np.arange(-N, N + 1) * h
    for u in rng.uniform(0.1, 0.4, 10):
        K = 2 * int(round(u / (2 * h)))
        u = K * h
        conv = convolve_hat(lambda t: kn.hat_eval(t, u, r - 1), N, K, h)
        assert np.max(np.abs(conv - kn.hat_eval(grid, u, r))) <= 1e-5


def test_hat_support_and_nonnegativity():
    x = np.linspace(-3, 3, 2001)
    for r in range(1, 7):
        v = kn.hat_eval(x, 0.7, r)
        assert np.all(v >= 0)
        assert np.all(v[np.abs(x) >= r * 0.7 / 2] == 0)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_hat_normalization(r):
    u = 0.37
    val, _ = integrate.quad(lambda t: float(kn.hat_eval(t, u, r)), -r * u / 2, r * u / 2,
                            points=[k * u / 2 for k in range(-r, r + 1)], epsabs=1e-13)
    assert val == pytest.approx(u ** r, abs=1e-10)


@pytest.mark.parametrize("r", [1, 2])
def test_first_difference_exponent(r):
    # ||h(. + t) - h||_1 ~ |t|^min(r, 2)
    u = 0.5
    grid = np.linspace(-1, 1, 400001)
    dx = grid[1] - grid[0]
    ts = np.array([1e-3, 2e-3, 4e-3, 8e-3])
    base = kn.hat_eval(grid, u, r)
    norms = [np.sum(np.abs(kn.hat_eval(grid + t, u, r) - base)) * dx for t in ts]
    slope = np.polyfit(np.log(ts), np.log(norms), 1)[0]
    # first differences decay linearly in L1 for both orders; the quadratic
    # rate for r = 2 shows up in second differences
    assert abs(slope - 1.0) <= 0.1
    if r == 2:
        second = [np.sum(np.abs(kn.hat_eval(grid + t, u, r) - 2 * base
                                + kn.hat_eval(grid - t, u, r))) * dx for t in ts]
        assert abs(np.polyfit(np.log(ts), np.log(second), 1)[0] - 2.0) <= 0.1


def test_hat_box_eval_examples():
    spec = kn.HatSpec(2, (0.5, 0.5), (0.5, 0.5))
    assert kn.hat_box_eval(np.array([0.5, 0.5]), spec) == pytest.approx(0.25)
    small = kn.HatSpec(2, (0.5, 0.5), (0.2, 0.2))
    assert kn.hat_box_eval(np.array([0.9, 0.5]), small) == 0.0
    # box [0.25, 0.5) x [0.25, 0.75), dyadic so the edges are exact
    spec1 = kn.HatSpec(1, (0.375, 0.5), (0.25, 0.5))
    pts = np.array([[0.25, 0.25], [0.49, 0.74], [0.5, 0.5], [0.3, 0.75]])
    assert np.array_equal(kn.hat_box_eval(pts, spec1), [1.0, 1.0, 0.0, 0.0])


def test_hat_spec_validation():
    with pytest.raises(InvalidParameter):
        kn.HatSpec(2, (0.1,), (0.5,))
    with pytest.raises(InvalidParameter):
        kn.HatSpec(2, (0.5,), (0.6,), periodic=True)
    lo, hi = kn.HatSpec.from_box((0.1, 0.2), (0.5, 0.9), 3).box
    assert np.allclose(lo, [0.1, 0.2]) and np.allclose(hi, [0.5, 0.9])


def test_hat_box_integral():
    assert kn.hat_box_integral(kn.HatSpec(1, (0.5, 0.5), (0.3, 0.4))) == pytest.approx(0.12)
    assert kn.hat_box_integral(kn.HatSpec(2, (0.5,), (0.5,))) == pytest.approx(0.25)
    rng = np.random.default_rng(0)
    for _ in range(20):
        r = int(rng.integers(1, 4))
        d = int(rng.integers(1, 3))
        u = rng.uniform(0.05, 1.0 / r, d)
        z = rng.uniform(r * u / 2, 1 - r * u / 2)
        spec = kn.HatSpec(r, z, u)
        val = 1.0
        for j in range(d):
            knots = [z[j] + k * u[j] / 2 for k in range(-r, r + 1)]
            vj, _ = integrate.quad(lambda t: float(kn.hat_eval(t - z[j], u[j], r)),
                                   knots[0], knots[-1], points=knots[1:-1], epsabs=1e-14)
            val *= vj
        assert kn.hat_box_integral(spec) == pytest.approx(val, abs=1e-8)


def test_periodic_hat():
    spec = kn.HatSpec(2, (0.0,), (0.5,), periodic=True)
    assert kn.periodic_hat_eval(np.array([0.0]), spec) == pytest.approx(0.5)
    rng = np.random.default_rng(1)
    for _ in range(10):
        r = int(rng.integers(1, 6))
        u = rng.uniform(0.05, 0.5)
        z = rng.uniform(0, 1)
        x = rng.uniform(0, 1, 50)
        wide = sum(kn.hat_eval(x - z + k, u, r) for k in range(-10, 11))
        assert np.max(np.abs(kn.periodic_hat_1d(x, z, u, r) - wide)) <= 1e-12
        grid = (np.arange(20000) + 0.5) / 20000
        mean = kn.periodic_hat_1d(grid, z, u, r).mean()
        # midpoint rule: exact up to O(1/n) at the jumps when r = 1
        tol = 2 / len(grid) if r == 1 else 1e-9
        assert mean == pytest.approx(u ** r, abs=tol)


def test_bernoulli_values():
    spec = kn.BernoulliSpec(2, (2.0,), 100_000)
    assert kn.bernoulli_eval(np.array([0.0]), spec) == pytest.approx(1 - math.pi ** 2 / 3, abs=1e-4)
    grid = (np.arange(256) + 0.5) / 256
    spec3 = kn.BernoulliSpec(3, (0.7,), 50)
    assert kn.bernoulli_eval(grid[:, None], spec3).mean() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidParameter):
        kn.BernoulliSpec(1, (1.0,), 10)
    assert kn.BernoulliSpec(2, (0.0,), 100).tail_bound == pytest.approx(2 / 100)
    K = kn.BernoulliSpec.for_tolerance(2, (0,), 1e-3).K
    assert 2 * K ** (-1) <= 1e-3


def test_br_eval():
    assert kn.br_eval([0.1, 0.2], [0.3, 0.4], 1) == 1.0
    assert kn.br_eval([0.1, 0.4], [0.3, 0.4], 1) == 0.0
    assert kn.br_eval([0.2], [0.7], 2) == pytest.approx(0.5)
    assert kn.br_eval([0.0, 0.0], [1 - 1e-16, 1 - 1e-16], 3) == pytest.approx(0.25)


@settings(max_examples=100, deadline=None)
@given(st.floats(-2, 2), st.floats(0.01, 1.0), st.integers(1, 6))
def test_hat_symmetry_and_bound(x, u, r):
    v = float(kn.hat_eval(x, u, r))
    assert 0 <= v <= u ** (r - 1) + 1e-15
    if r >= 2:
        assert v == pytest.approx(float(kn.hat_eval(-x, u, r)), abs=1e-14)
