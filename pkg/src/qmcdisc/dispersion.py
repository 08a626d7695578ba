"""Largest empty axis-parallel box (dispersion).

The supremum over half-open empty boxes equals the maximum volume of boxes
whose open interior avoids the point set, so all routines work with closed
candidate bounds and interior emptiness.
"""

from dataclasses import dataclass
import math

import numpy as np

from .discrepancy import AxisBox
from .errors import InvalidParameter
from .pointgen import PointSet, corput_net, fibonacci_set, frolov_basis, frolov_points, \
    random_uniform, regular_grid
from ._util import loglog_slope


@dataclass(frozen=True)
class DispersionResult:
    value: float
    witness: AxisBox
    method: str  # exact2d | exactND | sampled

    def as_dict(self):
        return {"value": self.value, "witness": self.witness.as_dict(), "method": self.method}


def _pts(P):
    return P.points if isinstance(P, PointSet) else np.atleast_2d(np.asarray(P, float))


def _max_gap(values):
    """Largest gap of sorted(values) inside [0, 1]; returns (length, lo, hi)."""
    s = np.concatenate([[0.0], np.sort(values), [1.0]])
    gaps = np.diff(s)
    k = int(np.argmax(gaps))
    return float(gaps[k]), float(s[k]), float(s[k + 1])


def _sweep_right(xs, ys):
    """Best box whose left edge passes through a point and extends rightwards.

    ``xs`` sorted ascending. For each support point p, the running min of
    y-values above p.y and max of those below give the top/bottom of the
    widest empty box reaching each later x-group.
    """
    m = len(xs)
    best = (0.0, None)
    # first index with x strictly greater, per index
    next_start = np.searchsorted(xs, xs, side="right")
    for i in range(m):
        s = next_start[i]
        px, py = xs[i], ys[i]
        if s >= m:
            area = (1.0 - px) * 1.0
            if area > best[0]:
                best = (area, (px, 0.0, 1.0, 1.0))
            continue
        bx, by = xs[s:], ys[s:]
        top = np.minimum.accumulate(np.where(by >= py, by, 1.0))
        bot = np.maximum.accumulate(np.where(by <= py, by, 0.0))
        # top/bottom "before" each x-group: exclude same-x points
        group_first = np.searchsorted(bx, bx, side="left")
        before = group_first - 1
        top_b = np.where(before >= 0, top[np.maximum(before, 0)], 1.0)
        bot_b = np.where(before >= 0, bot[np.maximum(before, 0)], 0.0)
        areas = (bx - px) * (top_b - bot_b)
        k = int(np.argmax(areas))
        if areas[k] > best[0]:
            best = (float(areas[k]), (px, bot_b[k], bx[k], top_b[k]))
        final = (1.0 - px) * (top[-1] - bot[-1])
        if final > best[0]:
            best = (float(final), (px, bot[-1], 1.0, top[-1]))
    return best


def dispersion_2d(P):
    """Exact dispersion of a planar point set (O(m^2) vectorised sweep)."""
    x = _pts(P)
    if x.shape[1] != 2:
        raise InvalidParameter("dispersion_2d needs d = 2")
    if len(x) == 0:
        return DispersionResult(1.0, AxisBox((0.0, 0.0), (1.0, 1.0)), "exact2d")
    order = np.argsort(x[:, 0], kind="stable")
    xs, ys = x[order, 0], x[order, 1]
    best_v, best_box = 0.0, None
    # full-width strips
    g, lo, hi = _max_gap(ys)
    best_v, best_box = g, ((0.0, lo), (1.0, hi))
    # boxes with a point on the left edge
    v, b = _sweep_right(xs, ys)
    if v > best_v:
        best_v, best_box = v, ((b[0], b[1]), (b[2], b[3]))
    # boxes with a point on the right edge and the left wall: mirror in x
    mx = 1.0 - xs[::-1]
    v, b = _sweep_right(mx, ys[::-1])
    if v > best_v:
        best_v, best_box = v, ((1.0 - b[2], b[1]), (1.0 - b[0], b[3]))
    # full-height strips
    g, lo, hi = _max_gap(xs)
    if g > best_v:
        best_v, best_box = g, ((lo, 0.0), (hi, 1.0))
    box = AxisBox(*best_box)
    return DispersionResult(float(box.volume), box, "exact2d")


class _Budget(Exception):
    pass


def dispersion_nd(P, budget=100_000_000, seed=0, samples=20_000):
    """Exact dispersion by branch and bound over coordinate-grid bounds.

    Bounds on axis j are drawn from the coordinates of points that are
    interior in every axis fixed so far (only those can block a face); the
    last axis is solved by a max-gap scan. Over ``budget`` node visits the
    result falls back to greedy growth of random seed boxes.
    """
    x = _pts(P)
    m, d = x.shape
    if m == 0:
        box = AxisBox(np.zeros(d), np.ones(d))
        return DispersionResult(1.0, box, "exactND")
    best = [0.0, None]
    visits = [0]

    def recurse(pts, j, lo, hi, vol):
        visits[0] += 1
        if visits[0] > budget:
            raise _Budget
        if j == d - 1:
            g, a, b = _max_gap(pts[:, j])
            if vol * g > best[0]:
                best[0] = vol * g
                best[1] = (lo + [a], hi + [b])
            return
        cands = np.unique(np.concatenate([[0.0, 1.0], pts[:, j]]))
        n = len(cands)
        ii, kk = np.triu_indices(n, k=1)
        lengths = cands[kk] - cands[ii]
        order = np.argsort(-lengths, kind="stable")
        for t in order:
            ell = lengths[t]
            if vol * ell <= best[0]:
                break
            a, b = cands[ii[t]], cands[kk[t]]
            sub = pts[(pts[:, j] > a) & (pts[:, j] < b)]
            recurse(sub, j + 1, lo + [a], hi + [b], vol * ell)

    try:
        recurse(x, 0, [], [], 1.0)
    except _Budget:
        return _dispersion_sampled(x, seed, samples)
    box = AxisBox(*best[1])
    return DispersionResult(float(box.volume), box, "exactND")


def _dispersion_sampled(x, seed, samples):
    """Greedy axis growth from random empty seeds; a lower bound."""
    rng = np.random.default_rng(seed)
    m, d = x.shape
    best_v, best_box = 0.0, None
    for _ in range(samples):
        c = rng.random(d)
        lo, hi = np.zeros(d), np.ones(d)
        for j in rng.permutation(d):
            inside = np.all(np.delete((x > lo) & (x < hi), j, axis=1), axis=1)
            col = x[inside, j]
            below = col[col <= c[j]]
            above = col[col > c[j]]
            lo[j] = below.max() if len(below) else 0.0
            hi[j] = above.min() if len(above) else 1.0
        v = float(np.prod(hi - lo))
        if v > best_v and not np.any(np.all((x > lo) & (x < hi), axis=1)):
            best_v, best_box = v, (lo.copy(), hi.copy())
    return DispersionResult(best_v, AxisBox(*best_box), "sampled")


def dispersion(P, **kwargs):
    x = _pts(P)
    if x.shape[1] == 2:
        return dispersion_2d(x)
    return dispersion_nd(x, **kwargs)


def _family_set(family, size, seed=0):
    if family == "fibonacci":
        return fibonacci_set(size), size
    if family == "frolov":
        return frolov_points(frolov_basis(2), size), size
    if family == "corput_net":
        return corput_net(size), size
    if family == "random":
        return random_uniform(size, 2, seed), size
    if family == "grid":
        return regular_grid(size, 2), size
    raise InvalidParameter(f"unknown family {family!r}")


def dispersion_rate_check(family, sizes, seed=0):
    """Dispersion across a family; returns rows plus fitted log-log slopes.

    ``sizes`` are the family parameter (Fibonacci index, Frolov scale a,
    net exponent r, random cardinality, grid side k).
    """
    rows = []
    for s in sizes:
        P, param = _family_set(family, s, seed)
        res = dispersion(P)
        n = len(P)
        rows.append({"family": family, "param": param, "n": n, "disp": res.value,
                     "disp_times_n": res.value * n})
    slope_n, _ = loglog_slope([r["n"] for r in rows], [r["disp"] for r in rows])
    slope_p, _ = loglog_slope([r["param"] for r in rows], [r["disp"] for r in rows]) \
        if family in ("frolov", "grid") else (math.nan, None)
    return {"rows": rows, "slope_vs_n": slope_n, "slope_vs_param": slope_p}
