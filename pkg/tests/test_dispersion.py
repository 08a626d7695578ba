import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmcdisc.dispersion import dispersion, dispersion_2d, dispersion_nd, dispersion_rate_check
from qmcdisc.discrepancy import smooth_discrepancy
from qmcdisc.errors import InvalidParameter
from qmcdisc.pointgen import fibonacci_set, random_uniform, regular_grid
from oracles import dispersion_brute


def _interior_count(res, x):
    lo, hi = np.array(res.witness.lower), np.array(res.witness.upper)
    return int(np.sum(np.all((x > lo) & (x < hi), axis=1)))


def test_examples():
    empty = dispersion_2d(np.empty((0, 2)))
    assert empty.value == 1.0
    one = dispersion_2d(np.array([[0.5, 0.5]]))
    assert one.value == pytest.approx(0.5)
    assert one.witness.volume == pytest.approx(0.5)
    # the exhaustive oracle gives 4/9 for {(0,0), (1/3,2/3), (2/3,1/3)}
    P = fibonacci_set(3)
    assert dispersion_brute(P.points) == pytest.approx(4 / 9)
    assert dispersion_2d(P).value == pytest.approx(4 / 9)


def test_rejects_wrong_dimension():
    with pytest.raises(InvalidParameter):
        dispersion_2d(np.array([[0.1, 0.2, 0.3]]))


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_grid(k):
    P = regular_grid(k, 2)
    assert dispersion_brute(P.points) == pytest.approx(1 / k)
    assert dispersion_2d(P).value == pytest.approx(1 / k)


def test_2d_against_oracle_and_nd():
    rng = np.random.default_rng(0)
    for _ in range(30):
        m = int(rng.integers(1, 15))
        x = rng.random((m, 2))
        a, b = dispersion_2d(x), dispersion_nd(x)
        assert a.value == pytest.approx(dispersion_brute(x), abs=1e-12)
        assert b.value == pytest.approx(a.value, abs=1e-12)
        assert _interior_count(a, x) == 0 and _interior_count(b, x) == 0
        assert a.witness.volume == pytest.approx(a.value, abs=1e-12)


def test_nd_larger_2d_sets():
    rng = np.random.default_rng(10)
    for _ in range(10):
        x = rng.random((int(rng.integers(20, 41)), 2))
        assert dispersion_nd(x).value == pytest.approx(dispersion_2d(x).value, abs=1e-12)


def test_3d_against_oracle():
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = rng.random((int(rng.integers(1, 7)), 3))
        res = dispersion_nd(x)
        assert res.method == "exactND"
        assert res.value == pytest.approx(dispersion_brute(x), abs=1e-12)
        assert _interior_count(res, x) == 0


def test_sampled_fallback_is_lower_bound():
    x = random_uniform(30, 3, 2).points
    exact = dispersion_nd(x)
    approx = dispersion_nd(x, budget=50, samples=2000)
    assert approx.method == "sampled"
    assert approx.value <= exact.value + 1e-12
    assert _interior_count(approx, x) == 0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 0.999), st.floats(0, 0.999)), min_size=1, max_size=10),
       st.tuples(st.floats(0, 0.999), st.floats(0, 0.999)))
def test_monotone_and_gap_bound(rows, extra):
    x = np.array(rows)
    d0 = dispersion_2d(x)
    d1 = dispersion_2d(np.vstack([x, extra]))
    assert d1.value <= d0.value + 1e-15
    # a full-height strip over the largest gap in one coordinate is empty
    for j in range(2):
        s = np.concatenate([[0.0], np.sort(x[:, j]), [1.0]])
        assert d0.value >= np.max(np.diff(s)) - 1e-15
    assert d0.value == pytest.approx(dispersion_2d(x[:, ::-1]).value, abs=1e-15)
    assert _interior_count(d0, x) == 0


def test_smooth_r1_dominates_dispersion():
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = rng.random((10, 2))
        disp = dispersion(x)
        val = smooth_discrepancy(x, 1, starts=[disp.witness]).value
        assert val >= disp.value - 1e-9


def test_fibonacci_rate():
    res = dispersion_rate_check("fibonacci", range(5, 16))
    assert abs(res["slope_vs_n"] + 1) <= 0.1
    assert max(r["disp_times_n"] for r in res["rows"]) <= 2.0 + 1e-9


def test_frolov_rate():
    res = dispersion_rate_check("frolov", [4, 8, 16])
    assert abs(res["slope_vs_param"] + 2) <= 0.3


def test_grid_and_random_trends():
    grid = dispersion_rate_check("grid", [2, 4, 8, 16])
    assert [r["disp_times_n"] for r in grid["rows"]] == pytest.approx([2, 4, 8, 16])
    assert abs(grid["slope_vs_n"] + 0.5) <= 1e-9
    rand = dispersion_rate_check("random", [2 ** k for k in range(5, 11)], seed=0)
    prods = [r["disp_times_n"] for r in rand["rows"]]
    # increasing trend: least-squares slope of disp*m against log m is positive
    assert np.polyfit(np.log([r["n"] for r in rand["rows"]]), prods, 1)[0] > 0
