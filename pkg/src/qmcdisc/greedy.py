"""Incremental greedy algorithm IA(eps) in discretized L_p spaces and the
equal-weight cubature rules it produces."""

from dataclasses import dataclass, field
import json
import math

import numpy as np

from .cubature import CubatureRule, _periodic_kernel_1d
from .errors import InvalidParameter, NumericFailure, ScheduleFailure
from .pointgen import PointSet, halton_set


@dataclass(frozen=True)
class DiscretizedSpace:
    """Weighted discrete L_p on nodes of [0,1)^d."""

    grid_points: np.ndarray
    quad_weights: np.ndarray
    p: float

    def __post_init__(self):
        w = np.asarray(self.quad_weights, dtype=float)
        if not 1 < self.p < math.inf:
            raise InvalidParameter("p must lie in (1, inf)")
        if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
            raise InvalidParameter("quadrature weights must be positive and sum to 1")
        object.__setattr__(self, "quad_weights", w)
        object.__setattr__(self, "grid_points", np.atleast_2d(np.asarray(self.grid_points, float)))

    @classmethod
    def tensor(cls, n, d, p):
        """Midpoint rectangle rule with n nodes per axis."""
        axis = (np.arange(n) + 0.5) / n
        grids = np.meshgrid(*([axis] * d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        return cls(pts, np.full(len(pts), 1.0 / len(pts)), p)

    def norm(self, f):
        f = np.asarray(f)
        return float((np.abs(f) ** self.p @ self.quad_weights) ** (1 / self.p))

    def dual_norm(self, g):
        q = self.p / (self.p - 1)
        return float((np.abs(g) ** q @ self.quad_weights) ** (1 / q))

    def pair(self, g, h):
        """F_g(h) = sum_i w_i g_i h_i; ``h`` may be a stack of rows."""
        return np.asarray(h) @ (self.quad_weights * g)


def norming_functional(f, space):
    """Density g of the peak functional of f: F_f(f) = ||f||_p, ||g||_{p'} = 1."""
    nf = space.norm(f)
    if nf == 0:
        raise NumericFailure("norming functional of the zero function")
    f = np.asarray(f, dtype=float)
    return np.abs(f) ** (space.p - 1) * np.sign(f) / nf ** (space.p - 1)


def modulus_constants(p):
    """(gamma, q) with rho(u) <= gamma u^q for L_p."""
    if not 1 < p < math.inf:
        raise InvalidParameter("p must lie in (1, inf)")
    if p <= 2:
        return 1.0 / p, float(p)
    return (p - 1) / 2.0, 2.0


def schedule(n, beta, gamma, q):
    pbar = q / (q - 1)
    return beta * gamma ** (1 / q) * n ** (-1 / pbar)


@dataclass
class GreedyTrace:
    indices: list
    residuals: list
    eps: list
    beta: float
    approximant: np.ndarray = field(repr=False, default=None)

    def records(self):
        return [{"n": n + 1, "index": int(i), "residual": float(r), "eps": float(e)}
                for n, (i, r, e) in enumerate(zip(self.indices, self.residuals, self.eps))]

    def to_jsonl(self):
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.records())


def ia_run(f, dictionary, space, m, beta=1.0):
    """Run m steps of IA(eps) with the argmax choice at each step.

    A zero residual gives the zero functional, so every element is feasible
    and the lowest index is taken.
    """
    D = np.asarray(dictionary, dtype=float)
    f = np.asarray(f, dtype=float)
    gamma, q = modulus_constants(space.p)
    G = np.zeros_like(f)
    resid = f.copy()
    trace = GreedyTrace([], [], [], beta)
    for n in range(1, m + 1):
        eps = schedule(n, beta, gamma, q)
        if space.norm(resid) > 0:
            g = norming_functional(resid, space)
            scores = space.pair(g, D)
            idx = int(np.argmax(scores))  # first maximal index
            gain = scores[idx] - space.pair(g, f)
        else:
            idx, gain = 0, 0.0
        if gain < -eps:
            raise ScheduleFailure(n, float(-eps - gain))
        G = (1 - 1 / n) * G + D[idx] / n
        resid = f - G
        trace.indices.append(idx)
        trace.residuals.append(space.norm(resid))
        trace.eps.append(eps)
    trace.approximant = G
    return trace


def periodic_bernoulli_kernel(r=2):
    """K(x, y) = F_{r,0}(x - y) for even integer r, in closed form."""
    if r % 2:
        raise InvalidParameter("closed-form kernel needs even r")

    def K(x, y):
        diff = x[:, None, :] - y[None, :, :]
        return np.prod(_periodic_kernel_1d(diff, r // 2), axis=-1)

    return K


def periodic_indicator_kernel(intervals):
    """K(x, y) = chi~_E(x - y) for E a union of boxes given as (lo, hi) pairs."""
    boxes = [(np.atleast_1d(lo), np.atleast_1d(hi)) for lo, hi in intervals]

    def K(x, y):
        diff = np.mod(x[:, None, :] - y[None, :, :], 1.0)
        out = np.zeros(diff.shape[:2])
        for lo, hi in boxes:
            out = np.maximum(out, np.all((diff >= lo) & (diff < hi), axis=-1))
        return out

    return K


def default_candidates(d, count=1024):
    return halton_set(count, d)


@dataclass
class GreedyResult:
    rule: CubatureRule
    trace: GreedyTrace
    discrepancy: float  # in original kernel units
    scale: float  # dictionary rows were divided by this
    beta: float


def greedy_cubature(K, space, m, candidates=None, beta=1.0, max_beta=8.0):
    """Equal-weight m-point rule from IA(eps) over {K(x, .) : x in candidates}.

    The target is the candidate average of the kernel sections, which lies in
    the convex hull of the dictionary. Rows are scaled by one common factor
    so every section has norm at most one.
    """
    d2 = space.grid_points.shape[1]
    if candidates is None:
        candidates = default_candidates(d2)
    X = candidates.points if isinstance(candidates, PointSet) else np.atleast_2d(candidates)
    rows = np.asarray(K(X, space.grid_points), dtype=float)
    norms = np.array([space.norm(r) for r in rows])
    scale = max(1.0, float(norms.max()))
    D = rows / scale
    target = D.mean(axis=0)
    b = beta
    while True:
        try:
            trace = ia_run(target, D, space, m, b)
            break
        except ScheduleFailure:
            if b * 2 > max_beta:
                raise
            b *= 2
    knots = PointSet(X[trace.indices], f"greedy(m={m})")
    rule = CubatureRule(knots, np.full(m, 1.0 / m), knots.provenance)
    return GreedyResult(rule, trace, trace.residuals[-1] * scale, scale, b)


def greedy_rate(K, space, sizes, candidates=None, beta=1.0):
    """Discrepancy for each m in ``sizes`` (one run of max(sizes) steps).

    IA(eps) is incremental, so the residual after m steps of a long run
    equals the result of a run stopped at m.
    """
    res = greedy_cubature(K, space, max(sizes), candidates, beta)
    vals = [res.trace.residuals[m - 1] * res.scale for m in sizes]
    return vals, res
