"""Discrepancy functionals.

Exact routines: star discrepancy on the critical grid, L2-star (Warnock),
the L2 r-discrepancy with truncated-power kernels, and sigma^r sums.
Search routines (smooth, fixed-volume, optimized) return attained values,
so they are certified lower bounds of the corresponding suprema.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidParameter, QMCError
from .kernels import hat_eval, periodic_hat_1d
from .pointgen import PointSet
from ._util import compositions


@dataclass(frozen=True)
class AxisBox:
    """Half-open box [lower, upper) inside the unit cube."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, float))
        hi = np.atleast_1d(np.asarray(self.upper, float))
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise InvalidParameter("box needs lower < upper coordinatewise")
        if np.any(lo < 0) or np.any(hi > 1):
            raise InvalidParameter("box leaves the unit cube")
        object.__setattr__(self, "lower", tuple(lo.tolist()))
        object.__setattr__(self, "upper", tuple(hi.tolist()))

    @property
    def volume(self):
        return float(np.prod(np.subtract(self.upper, self.lower)))

    def contains(self, points, interior=False):
        """Membership mask; ``interior=True`` tests the open box instead."""
        pts = np.atleast_2d(np.asarray(points, float))
        lo, hi = np.array(self.lower), np.array(self.upper)
        if interior:
            return np.all((pts > lo) & (pts < hi), axis=1)
        return np.all((pts >= lo) & (pts < hi), axis=1)

    def as_dict(self):
        return {"lower": list(self.lower), "upper": list(self.upper)}


@dataclass
class DiscrepancyEstimate:
    value: float
    exact: bool
    witness: object = None
    budget: int = 0
    weights: np.ndarray = None
    extra: dict = field(default_factory=dict)


def _points(P):
    return P.points if isinstance(P, PointSet) else np.atleast_2d(np.asarray(P, float))


def _weights(weights, m):
    if weights is None:
        return np.full(m, 1.0 / m)
    w = np.asarray(weights, dtype=float)
    if w.shape != (m,):
        raise InvalidParameter("weights must match the number of points")
    return w


# --------------------------------------------------------------------------
# classical star / Lq discrepancy


def star_discrepancy_exact(P, budget=10_000_000, seed=0, samples=200_000):
    """sup_b |prod b - #{x < b}/m| evaluated on the critical grid.

    Every b_j runs over the point coordinates plus 1. At each corner the
    open count (box [0,b)) and the closed count (limit from above) are both
    used. Coordinates equal to 1 never fall inside an anchored box.
    Falls back to random critical corners, ``exact=False``, over budget.
    """
    pts = _points(P)
    m, d = pts.shape
    if m < 1:
        raise InvalidParameter("star discrepancy needs at least one point")
    grids = [np.union1d(pts[:, j][pts[:, j] < 1], [1.0]) for j in range(d)]
    sizes = [len(g) for g in grids]
    inside = np.all(pts < 1, axis=1)
    ranks = np.stack([np.searchsorted(grids[j], pts[inside, j]) for j in range(d)], axis=1)
    total = math.prod(sizes)
    if total > budget:
        return _star_sampled(pts, grids, ranks, seed, samples)
    hist = np.zeros(sizes, dtype=np.int64)
    np.add.at(hist, tuple(ranks.T), 1)
    closed = hist
    for ax in range(d):
        closed = np.cumsum(closed, axis=ax)
    opened = np.pad(closed, [(1, 0)] * d)[tuple(slice(0, s) for s in sizes)]
    vol = np.ones(sizes)
    for j, g in enumerate(grids):
        shape = [1] * d
        shape[j] = -1
        vol = vol * g.reshape(shape)
    under = vol - opened / m
    over = closed / m - vol
    i_under = int(np.argmax(under))
    i_over = int(np.argmax(over))
    if under.flat[i_under] >= over.flat[i_over]:
        idx, val, side = i_under, under.flat[i_under], "open"
    else:
        idx, val, side = i_over, over.flat[i_over], "closed"
    corner = [float(g[k]) for g, k in zip(grids, np.unravel_index(idx, sizes))]
    return DiscrepancyEstimate(float(val), True, {"corner": corner, "side": side}, total)


def _star_sampled(pts, grids, ranks, seed, samples):
    rng = np.random.default_rng(seed)
    m = len(pts)
    best, wit = -1.0, None
    for start in range(0, samples, 4096):
        n = min(4096, samples - start)
        idx = np.stack([rng.integers(0, len(g), n) for g in grids], axis=1)
        corner = np.stack([g[idx[:, j]] for j, g in enumerate(grids)], axis=1)
        vol = corner.prod(axis=1)
        opened = np.all(ranks[None, :, :] < idx[:, None, :], axis=2).sum(axis=1)
        closed = np.all(ranks[None, :, :] <= idx[:, None, :], axis=2).sum(axis=1)
        vals = np.maximum(vol - opened / m, closed / m - vol)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, wit = float(vals[k]), {"corner": corner[k].tolist()}
    return DiscrepancyEstimate(best, False, wit, samples)


def l2_star_discrepancy(P, chunk=1024):
    """Warnock's closed form for the L2 star discrepancy."""
    x = _points(P)
    m, d = x.shape
    if m < 1:
        raise InvalidParameter("L2 discrepancy needs at least one point")
    term1 = 3.0 ** (-d)
    term2 = np.prod((1 - x ** 2) / 2, axis=1).sum() * 2 / m
    term3 = 0.0
    for s in range(0, m, chunk):
        blk = np.maximum(x[s:s + chunk, None, :], x[None, :, :])
        term3 += np.prod(1 - blk, axis=2).sum()
    sq = term1 - term2 + term3 / m ** 2
    return math.sqrt(max(sq, 0.0))


def lq_discrepancy_mc(P, q, samples=100_000, seed=0, chunk=8192):
    """Monte Carlo L_q norm over uniform anchors; returns (value, std_error)."""
    if not 1 <= q < math.inf:
        raise InvalidParameter("q must be in [1, inf)")
    if samples < 1000:
        raise InvalidParameter("use at least 1000 Monte Carlo samples")
    x = _points(P)
    m, d = x.shape
    rng = np.random.default_rng(seed)
    acc = []
    for start in range(0, samples, chunk):
        b = rng.random((min(chunk, samples - start), d))
        counts = np.all(x[None, :, :] < b[:, None, :], axis=2).sum(axis=1)
        acc.append(np.abs(b.prod(axis=1) - counts / m) ** q)
    vals = np.concatenate(acc)
    mean = vals.mean()
    se_mean = vals.std(ddof=1) / math.sqrt(len(vals))
    value = mean ** (1 / q)
    se = (value / (q * mean)) * se_mean if mean > 0 else 0.0
    return float(value), float(se)


# --------------------------------------------------------------------------
# hat-box objective and coordinate-ascent search


class HatObjective:
    """|prod u^r - sum_mu lambda_mu h^r_B(x_mu)| for batches of boxes [lower, upper)."""

    def __init__(self, points, weights, r, max_batch_elems=2_000_000):
        self.x = _points(points)
        self.w = _weights(weights, len(self.x))
        self.r = r
        self.evals = 0
        self._batch = max(1, max_batch_elems // max(1, self.x.size))

    def hat_matrix(self, lower, upper):
        """(n_boxes, m) matrix of h^r_B(x_mu)."""
        lower, upper = np.atleast_2d(lower), np.atleast_2d(upper)
        z = (lower + upper) / 2
        u = (upper - lower) / self.r
        vals = hat_eval(self.x[None, :, :] - z[:, None, :], u[:, None, :], self.r)
        return np.prod(vals, axis=2)

    def integral(self, lower, upper):
        return np.prod(((upper - lower) / self.r) ** self.r, axis=-1)

    def signed(self, lower, upper):
        lower, upper = np.atleast_2d(lower), np.atleast_2d(upper)
        out = np.empty(len(lower))
        for s in range(0, len(lower), self._batch):
            lo, hi = lower[s:s + self._batch], upper[s:s + self._batch]
            out[s:s + self._batch] = self.integral(lo, hi) - self.hat_matrix(lo, hi) @ self.w
        self.evals += len(lower)
        return out

    def __call__(self, lower, upper):
        return np.abs(self.signed(lower, upper))


_GOLD = (math.sqrt(5) - 1) / 2


def _golden_max(f, lo, hi, iters=60, tol=1e-13):
    c, d = hi - _GOLD * (hi - lo), lo + _GOLD * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if hi - lo < tol:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLD * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLD * (hi - lo)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


class _BoxSearch:
    """Coordinate ascent over a box parametrisation.

    Subclasses define ``decode(theta) -> (lower, upper)`` for batches,
    ``interval(theta, i)`` and optionally ``breakpoints(theta, i)``.
    """

    n_samples = 33

    def __init__(self, objective):
        self.obj = objective

    def value(self, thetas):
        lo, hi = self.decode(np.atleast_2d(thetas))
        return self.obj(lo, hi)

    def breakpoints(self, theta, i):
        return np.empty(0)

    def line_search(self, theta, i, current):
        a, b = self.interval(theta, i)
        if not b > a:
            return theta, current
        cand = np.concatenate([np.linspace(a, b, self.n_samples), self.breakpoints(theta, i)])
        cand = np.unique(np.clip(cand, a, b))
        trial = np.repeat(theta[None, :], len(cand), axis=0)
        trial[:, i] = cand
        vals = self.value(trial)
        k = int(np.argmax(vals))
        best_t, best_v = cand[k], vals[k]
        left, right = cand[max(k - 1, 0)], cand[min(k + 1, len(cand) - 1)]

        def f(t):
            th = theta.copy()
            th[i] = t
            return float(self.value(th)[0])

        if right > left:
            t, v = _golden_max(f, left, right)
            if v > best_v:
                best_t, best_v = t, v
        if best_v > current:
            theta = theta.copy()
            theta[i] = best_t
            return theta, best_v
        return theta, current

    def refine(self, theta, max_sweeps=30, tol=1e-10):
        theta = np.asarray(theta, dtype=float)
        current = float(self.value(theta)[0])
        for _ in range(max_sweeps):
            start = current
            for i in range(len(theta)):
                theta, current = self.line_search(theta, i, current)
            if current - start < tol:
                break
        return theta, current


class _EdgeSearch(_BoxSearch):
    """theta = (a_1..a_d, b_1..b_d), box [a, b)."""

    def __init__(self, objective, d):
        super().__init__(objective)
        self.d = d

    def decode(self, thetas):
        return thetas[:, : self.d], thetas[:, self.d:]

    def interval(self, theta, i):
        d = self.d
        gap = 1e-9
        if i < d:
            return 0.0, theta[d + i] - gap
        return theta[i - d] + gap, 1.0

    def breakpoints(self, theta, i):
        d, r, x = self.d, self.obj.r, self.obj.x
        j = i % d
        lo, hi = theta[:d], theta[d:]
        others = [k for k in range(d) if k != j]
        live = np.all((x[:, others] >= lo[others]) & (x[:, others] <= hi[others]), axis=1)
        xs = x[live, j]
        if len(xs) > 512:
            xs = xs[np.argsort(np.abs(xs - (lo[j] + hi[j]) / 2))[:512]]
        k = np.arange(r + 1) / r
        if i < d:
            k = k[k < 1]
            pts = (xs[:, None] - hi[j] * k) / (1 - k)
        else:
            k = k[k > 0]
            pts = (xs[:, None] - lo[j] * (1 - k)) / k
        pts = pts.ravel()
        if r == 1:
            eps = 1e-12
            pts = np.concatenate([pts - eps, pts + eps])
        return pts


class _FixedVolumeSearch(_BoxSearch):
    """theta = (z_1..z_d, log l_1..log l_{d-1}); l_d = V / prod(others)."""

    def __init__(self, objective, d, V):
        super().__init__(objective)
        self.d, self.V = d, V

    def lengths(self, thetas):
        thetas = np.atleast_2d(thetas)
        if self.d == 1:
            return np.full((len(thetas), 1), self.V)
        head = np.exp(thetas[:, self.d:])
        last = self.V / np.prod(head, axis=1, keepdims=True)
        return np.concatenate([head, last], axis=1)

    def decode(self, thetas):
        ell = self.lengths(thetas)
        z = np.clip(thetas[:, : self.d], ell / 2, 1 - ell / 2)
        lower = np.maximum(z - ell / 2, 0.0)
        upper = lower + ell
        return lower, upper

    def interval(self, theta, i):
        d = self.d
        ell = self.lengths(theta)[0]
        if i < d:
            return ell[i] / 2, 1 - ell[i] / 2
        j = i - d
        rest = np.prod(np.exp(np.delete(theta[d:], j)))
        return math.log(self.V / rest), 0.0

    def breakpoints(self, theta, i):
        if i >= self.d:
            return np.empty(0)
        r, x, d = self.obj.r, self.obj.x, self.d
        ell = self.lengths(theta)[0]
        lo, hi = self.decode(theta[None, :])
        others = [k for k in range(d) if k != i]
        live = np.all((x[:, others] >= lo[0, others]) & (x[:, others] <= hi[0, others]), axis=1)
        xs = x[live, i]
        if len(xs) > 512:
            xs = xs[np.argsort(np.abs(xs - theta[i]))[:512]]
        u = ell[i] / r
        pts = (xs[:, None] - u * (np.arange(r + 1) - r / 2)).ravel()
        if r == 1:
            pts = np.concatenate([pts - 1e-12, pts + 1e-12])
        return pts


def _dyadic_boxes(d, budget):
    level = 1
    while True:
        n_int = (2 ** (level + 1) + 1) * 2 ** level  # intervals at level+1
        if n_int ** d > budget or level >= 10:
            break
        level += 1
    edges = np.arange(2 ** level + 1) / 2 ** level
    ii, jj = np.triu_indices(len(edges), k=1)
    lo1, hi1 = edges[ii], edges[jj]
    idx = np.stack(np.meshgrid(*([np.arange(len(lo1))] * d), indexing="ij"), -1).reshape(-1, d)
    return lo1[idx], hi1[idx]


def _top_distinct(vals, k):
    order = np.argsort(-vals, kind="stable")
    return order[:k]


def _edge_theta(lower, upper):
    return np.concatenate([np.asarray(lower, float), np.asarray(upper, float)])


def _estimate_from_edges(search, objective, d, budget, starts, n_refine, collect=False):
    lo, hi = _dyadic_boxes(d, budget)
    thetas = np.concatenate([lo, hi], axis=1)
    if starts:
        extra = []
        for b in starts:
            blo, bhi = np.array(b.lower), np.array(b.upper)
            extra.append(_edge_theta(blo, bhi))
            # nudge lower faces inward so half-open boxes exclude boundary points
            nudged = np.minimum(blo + 1e-12, bhi - 1e-12)
            extra.append(_edge_theta(nudged, bhi))
        thetas = np.concatenate([thetas, np.array(extra)])
    vals = search.value(thetas)
    best_v, best_t = -1.0, None
    pool = list(_top_distinct(vals, n_refine))
    pool += [len(vals) - 1 - k for k in range(2 * len(starts or []))]
    seen = set()
    found = []
    for k in pool:
        if k in seen:
            continue
        seen.add(k)
        t, v = search.refine(thetas[k])
        found.append((v, t))
        if v > best_v:
            best_v, best_t = v, t
    if collect:
        return best_v, best_t, found
    return best_v, best_t


def smooth_discrepancy(P, r, weights=None, budget=4096, n_refine=8, starts=None):
    """Lower estimate of sup_B |int h^r_B - sum lambda_mu h^r_B(x_mu)|.

    Multistart on a dyadic grid of about ``budget`` boxes, then coordinate
    ascent with golden-section line searches. ``starts`` are extra
    :class:`AxisBox` seeds (for instance a dispersion witness).
    """
    if r < 1:
        raise InvalidParameter("smoothness order r must be >= 1")
    x = _points(P)
    if len(x) < 1:
        raise InvalidParameter("smooth discrepancy needs at least one point")
    d = x.shape[1]
    obj = HatObjective(x, weights, r)
    search = _EdgeSearch(obj, d)
    best_v, best_t = _estimate_from_edges(search, obj, d, budget, starts, n_refine)
    box = AxisBox(best_t[:d], best_t[d:])
    return DiscrepancyEstimate(float(best_v), False, box, obj.evals, weights=obj.w)


def fixed_volume_discrepancy(P, r, V, weights=None, budget=4096, n_refine=8, starts=None):
    """Same search as :func:`smooth_discrepancy` restricted to vol(B) = V."""
    if not 0 < V <= 1:
        raise InvalidParameter("volume must lie in (0, 1]")
    if r < 1:
        raise InvalidParameter("smoothness order r must be >= 1")
    x = _points(P)
    if len(x) < 1:
        raise InvalidParameter("fixed-volume discrepancy needs at least one point")
    d = x.shape[1]
    obj = HatObjective(x, weights, r)
    search = _FixedVolumeSearch(obj, d, V)
    if d == 1:
        n_shape, n_z = 1, budget
    else:
        n_shape = max(2, int(round(budget ** (1 / (d + 1)))))
        n_z = max(2, int(budget / n_shape) ** (1 / d))
        n_z = int(n_z)
    # shapes: log lengths of the first d-1 axes spread over [log V, 0]
    if d == 1:
        shapes = np.empty((1, 0))
    else:
        grid = np.linspace(math.log(V), 0.0, n_shape)
        shapes = np.stack(np.meshgrid(*([grid] * (d - 1)), indexing="ij"), -1).reshape(-1, d - 1)
        last = math.log(V) - shapes.sum(axis=1)
        shapes = shapes[(last >= math.log(V) - 1e-12) & (last <= 1e-12)]
    frac = (np.arange(n_z) + 0.5) / n_z
    zs = np.stack(np.meshgrid(*([frac] * d), indexing="ij"), -1).reshape(-1, d)
    thetas = np.concatenate(
        [np.concatenate([zs, np.repeat(s[None, :], len(zs), 0)], axis=1) for s in shapes]
    )
    # map fractional centres into each shape's feasible range
    ell = search.lengths(thetas)
    thetas[:, :d] = ell / 2 + thetas[:, :d] * (1 - ell)
    if starts:
        extra = []
        for b in starts:
            blo, bhi = np.array(b.lower), np.array(b.upper)
            ell_b = bhi - blo
            scale = (V / np.prod(ell_b)) ** (1 / d)
            ell_b = np.minimum(ell_b * scale, 1.0)
            extra.append(np.concatenate([(blo + bhi) / 2, np.log(ell_b[:-1])]))
        thetas = np.concatenate([thetas, np.array(extra)])
    vals = search.value(thetas)
    best_v, best_t = -1.0, None
    for k in _top_distinct(vals, n_refine):
        t, v = search.refine(thetas[k])
        if v > best_v:
            best_v, best_t = v, t
    lo, hi = search.decode(best_t[None, :])
    box = AxisBox(lo[0], np.minimum(hi[0], 1.0))
    return DiscrepancyEstimate(float(best_v), False, box, obj.evals, weights=obj.w,
                               extra={"V": V, "volume": box.volume})


def optimized_smooth_discrepancy(P, r, box_budget=1024, rounds=20, tol=1e-8, weight_bound=1e3,
                                 n_refine=16):
    """Cutting-plane minimax for inf_lambda sup_B |int h_B - sum lambda h_B(x)|.

    The LP starts from a dyadic box family of a few times ``box_budget``
    boxes; each round adds every refined multistart box whose error exceeds
    the LP level. The returned value is the LP level ``t`` over the final box
    set (a lower estimate). ``extra['upper']`` is the smallest searched
    maximum error over all weight vectors tried, including 1/m.
    Weights are free in sign; ``weight_bound`` only keeps the LP bounded.
    """
    x = _points(P)
    m, d = x.shape
    if r < 1:
        raise InvalidParameter("smoothness order r must be >= 1")
    if m > 1000:
        raise InvalidParameter("optimized smooth discrepancy limited to m <= 1000")
    obj = HatObjective(x, None, r)
    box_lo, box_hi = _dyadic_boxes(d, 4 * box_budget)
    plain = smooth_discrepancy(x, r, budget=box_budget, n_refine=4)
    upper, best_w = plain.value, np.full(m, 1.0 / m)
    weights, t = best_w, float("nan")
    history = []
    for _ in range(rounds):
        H = obj.hat_matrix(box_lo, box_hi)
        I = obj.integral(box_lo, box_hi)
        n = len(I)
        c = np.zeros(m + 1)
        c[-1] = 1.0
        A_ub = np.block([[-H, -np.ones((n, 1))], [H, -np.ones((n, 1))]])
        b_ub = np.concatenate([-I, I])
        bounds = [(-weight_bound, weight_bound)] * m + [(0, None)]
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if not res.success:
            raise QMCError(f"cutting-plane LP failed: {res.message}")
        weights, t = res.x[:m], float(res.x[-1])
        wobj = HatObjective(x, weights, r)
        _, _, found = _estimate_from_edges(_EdgeSearch(wobj, d), wobj, d, box_budget, None,
                                           n_refine, collect=True)
        worst = max(v for v, _ in found)
        history.append((t, worst))
        if worst < upper:
            upper, best_w = worst, weights
        cuts = [th for v, th in found if v > t + tol]
        if not cuts:
            break
        cuts = np.array(cuts)
        box_lo = np.vstack([box_lo, cuts[:, :d]])
        box_hi = np.vstack([box_hi, np.minimum(cuts[:, d:], 1.0)])
    boxes = [AxisBox(a, b) for a, b in zip(box_lo, box_hi)]
    return DiscrepancyEstimate(t, False, boxes, obj.evals, weights=weights,
                               extra={"history": history, "max_error_at_weights": history[-1][1],
                                      "upper": upper, "upper_weights": best_w})


# --------------------------------------------------------------------------
# periodic r-smooth L_{p1,p2}


def u_grid(n, span=8.0):
    """Log-uniform widths 2^{-1 - k span / n}, k = 0..n-1 (nested when n doubles)."""
    return 0.5 * 2.0 ** (-span * np.arange(n) / n)


def _cell_lengths(nodes, lo, hi):
    """Lebesgue lengths of the nearest-node cells of sorted ``nodes`` in [lo, hi]."""
    order = np.argsort(nodes)
    s = nodes[order]
    mids = (s[1:] + s[:-1]) / 2
    edges = np.concatenate([[lo], mids, [hi]])
    out = np.empty_like(s)
    out[order] = np.diff(edges)
    return out


def _axis_shape(d, axis):
    shape = [1] * (2 * d)
    shape[axis] = -1
    return tuple(shape)


def _lp(values, weights, p, axes):
    if math.isinf(p):
        return np.max(values, axis=axes)
    return np.sum(weights * values ** p, axis=axes) ** (1.0 / p)


def periodic_smooth_discrepancy(P, r, p1=math.inf, p2=math.inf, z_grid=16, u_grid_size=8,
                                weights=None, u_span=8.0):
    """Grid estimate of the periodic r-smooth L_{p1,p2} discrepancy.

    The error |prod u^r - sum lambda h~(x_mu, z, u)| is tabulated on a
    uniform z grid and a log-uniform u grid; the L_{p1} norm in z (inner) and
    the L_{p2} norm in u over (0, 1/2]^d (outer) use rectangle weights in the
    Lebesgue measure.
    """
    if z_grid < 4 or u_grid_size < 4:
        raise InvalidParameter("z and u grids need at least 4 nodes per axis")
    x = _points(P)
    m, d = x.shape
    lam = np.zeros(0) if m == 0 else _weights(weights, m)
    zs = np.arange(z_grid) / z_grid
    us = u_grid(u_grid_size, u_span)
    z_w = np.full(z_grid, 1.0 / z_grid)
    u_w = _cell_lengths(us, 0.0, 0.5)
    # per-axis tables T_j[mu, z, u]; the hat is a tensor product.
    # Result axes are interleaved as (z_1, u_1, ..., z_d, u_d).
    tables = [periodic_hat_1d(x[:, j, None, None], zs[None, :, None], us[None, None, :], r)
              for j in range(d)]
    letters = "abcdefghijklmnopqrstuvwx"
    out_idx = letters[: 2 * d]
    if m:
        spec = "y," + ",".join("y" + letters[2 * j:2 * j + 2] for j in range(d)) + "->" + out_idx
        quad = np.einsum(spec, lam, *tables)
    else:
        quad = np.zeros((z_grid, u_grid_size) * d)
    integral = np.ones((1, 1) * d)
    zw = np.ones((1, 1) * d)
    uw = np.ones((1, 1) * d)
    for j in range(d):
        integral = integral * (us ** r).reshape(_axis_shape(d, 2 * j + 1))
        zw = zw * z_w.reshape(_axis_shape(d, 2 * j))
        uw = uw * u_w.reshape(_axis_shape(d, 2 * j + 1))
    err = np.abs(integral - quad)
    inner = _lp(err, zw, p1, tuple(2 * j for j in range(d)))  # axes (u_1..u_d)
    uw = uw.reshape(inner.shape)
    return float(_lp(inner, uw, p2, tuple(range(d))))


# --------------------------------------------------------------------------
# L2 r-discrepancy with truncated powers


def r_discrepancy_l2(P, r, weights=None, chunk=256):
    """|| sum lambda_mu B_r(x_mu, y) - prod y_j^r / r! ||_{L2(dy)}, exactly.

    Expands the square into products of one-dimensional polynomial
    integrals, each computed by r-point Gauss-Legendre (exact degree 2r-1).
    """
    if r < 1 or int(r) != r:
        raise InvalidParameter("r must be a positive integer")
    x = _points(P)
    m, d = x.shape
    lam = _weights(weights, m)
    t, gw = np.polynomial.legendre.leggauss(int(r))
    fr1 = math.factorial(r - 1)
    frr = math.factorial(r)

    # cross term: int_x^1 (y - x)^{r-1}/(r-1)! * y^r/r! dy
    span = 1 - x
    ys = x[..., None] + span[..., None] * (t + 1) / 2
    cross = np.sum(gw * (ys - x[..., None]) ** (r - 1) * ys ** r, axis=-1) * span / 2 / (fr1 * frr)
    cross_term = lam @ np.prod(cross, axis=1)

    gram = 0.0
    for s in range(0, m, chunk):
        xa = x[s:s + chunk, None, :]
        lo = np.maximum(xa, x[None, :, :])
        span = 1 - lo
        ys = lo[..., None] + span[..., None] * (t + 1) / 2
        integ = np.sum(gw * ((ys - xa[..., None]) * (ys - x[None, :, :, None])) ** (r - 1), axis=-1)
        integ = integ * span / 2 / fr1 ** 2
        gram += lam[s:s + chunk] @ np.prod(integ, axis=2) @ lam
    self_term = (1.0 / ((2 * r + 1) * frr ** 2)) ** d
    sq = gram - 2 * cross_term + self_term
    return math.sqrt(max(sq, 0.0))


# --------------------------------------------------------------------------
# sigma^r sums


def sigma_r(v, u, r):
    """sum over ||s||_1 = v of prod_j min((2^s_j u_j)^{r/2}, (2^s_j u_j)^{-r/2})."""
    u = np.atleast_1d(np.asarray(u, float))
    d = len(u)
    if d > 4:
        raise InvalidParameter("sigma_r enumerates compositions only for d <= 4")
    s = np.array(list(compositions(v, d)), dtype=float)
    t = 2.0 ** s * u
    terms = np.minimum(t, 1 / t) ** (r / 2)
    return float(np.prod(terms, axis=1).sum())


def sigma_envelope(v, u, r):
    """Right-hand side of the sigma^r bounds with unit constant."""
    u = np.atleast_1d(np.asarray(u, float))
    d = len(u)
    x = 2.0 ** v * np.prod(u)
    if x >= 1:
        return math.log(2 * x) ** (d - 1) / x ** (r / 2)
    return x ** (r / 2) * math.log(2 / x) ** (d - 1)


def sigma_bound_ratio(v, u, r):
    return sigma_r(v, u, r) / sigma_envelope(v, u, r)
