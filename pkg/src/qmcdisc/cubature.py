"""Cubature rules, Frolov rules and worst-case errors in the periodic
Sobolev-type classes W^r_2 (diaphony for r = 1).

Throughout, F_{r,alpha} has period 1 and Fourier coefficients
prod_j max(|k_j|, 1)^{-r} up to unimodular phases, so worst-case errors do not
depend on alpha.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import bernoulli, zeta

from .errors import InvalidParameter
from .pointgen import PointSet, fibonacci_set, frolov_basis, frolov_periodized, frolov_points, \
    random_uniform, regular_grid
from ._util import loglog_slope


@dataclass(frozen=True)
class CubatureRule:
    points: PointSet
    weights: np.ndarray
    name: str = ""

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(w) != len(self.points):
            raise InvalidParameter("one weight per knot required")
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.points.dim

    @property
    def l1_norm(self):
        return float(np.abs(self.weights).sum())

    @classmethod
    def equal_weights(cls, points):
        m = len(points)
        return cls(points, np.full(m, 1.0 / m), f"Q_m[{points.provenance}]")


def apply(rule, f):
    """sum_mu lambda_mu f(xi^mu); ``f`` takes an (m, d) array."""
    vals = np.asarray(f(rule.points.points))
    return vals @ rule.weights


def frolov_rule(basis, a):
    P = frolov_points(basis, a)
    w = 1.0 / (a ** basis.dim * abs(basis.det))
    return CubatureRule(P, np.full(len(P), w), P.provenance)


def frolov_periodic_rule(basis, a):
    pf = frolov_periodized(basis, a)
    return CubatureRule(pf.points, pf.weights, pf.points.provenance)


def _exp_table(x, freqs):
    return np.exp(2j * np.pi * np.outer(x, freqs))


def lambda_xi_k(rule, k):
    """Lambda(xi, k) = sum_mu lambda_mu exp(2 pi i <k, xi^mu>)."""
    k = np.asarray(k, dtype=float)
    phase = rule.points.points @ k
    return complex(rule.weights @ np.exp(2j * np.pi * phase))


def lambda_table(rule, kmax):
    """Lambda(xi, k) for all ||k||_inf <= kmax as a (2 kmax + 1)^d array.

    Axis j index i corresponds to k_j = i - kmax.
    """
    x = rule.points.points
    m, d = x.shape
    freqs = np.arange(-kmax, kmax + 1)
    out = rule.weights.astype(complex)[:, None]
    # build progressively: (m, prod) tensor times next axis table
    tabs = [_exp_table(x[:, j], freqs) for j in range(d)]
    if d == 1:
        return rule.weights @ tabs[0]
    acc = rule.weights[:, None] * tabs[0]  # (m, n)
    for j in range(1, d - 1):
        acc = (acc[:, :, None] * tabs[j][:, None, :]).reshape(m, -1)
    res = acc.T @ tabs[d - 1]
    return res.reshape((2 * kmax + 1,) * d)


def _freq_weight_1d(kmax, r):
    k = np.abs(np.arange(-kmax, kmax + 1)).astype(float)
    return np.maximum(k, 1.0) ** (-2.0 * r)


def tail_weight(kmax, r, d):
    """Bound on sum over ||k||_inf > kmax of prod_j max(|k_j|,1)^{-2r}."""
    one_tail = 2 * float(zeta(2 * r, kmax + 1))
    full = 1 + 2 * float(zeta(2 * r))
    return d * one_tail * full ** (d - 1)


def default_kmax(r, d, tol=1e-4, l1=1.0):
    """Smallest K whose truncation tail, scaled by ||lambda||_1^2, is <= tol^2."""
    if r <= 0.5:
        raise InvalidParameter("W^r_2 worst-case error needs r > 1/2")
    lo, hi = 1, 1
    while tail_weight(hi, r, d) * l1 ** 2 > tol ** 2:
        lo, hi = hi, hi * 2
        if hi > 2 ** 40:
            raise InvalidParameter("truncation tolerance unreachable")
    while lo < hi:
        mid = (lo + hi) // 2
        if tail_weight(mid, r, d) * l1 ** 2 <= tol ** 2:
            hi = mid
        else:
            lo = mid + 1
    return hi


def _periodic_kernel_1d(x, r):
    """1 + 2 sum_{k>=1} cos(2 pi k x) / k^{2r} via the Bernoulli polynomial B_{2r}."""
    n = 2 * r
    b = bernoulli(n)
    coeffs = [math.comb(n, j) * b[j] for j in range(n + 1)]  # highest power first
    t = np.mod(x, 1.0)
    poly = np.polyval(coeffs, t)
    s = (-1) ** (r + 1) * (2 * np.pi) ** n * poly / (2 * math.factorial(n))
    return 1 + 2 * s


@dataclass
class WorstCaseError:
    value: float
    kmax: int | None
    tail_bound: float
    method: str  # closed-form | truncated
    tail_dominated: bool = False
    extra: dict = field(default_factory=dict)


def worst_case_error_w2r(rule, r, kmax=None, tol=1e-4, method="auto"):
    """Worst-case error of ``rule`` on the unit ball of W^r_2.

    ``method='closed-form'`` (integer r) sums the reproducing kernel over all
    knot pairs; it has no truncation. ``method='truncated'`` sums the Fourier
    series over ||k||_inf <= kmax and reports a bound on the omitted part.
    """
    if r <= 0.5:
        raise InvalidParameter("W^r_2 worst-case error needs r > 1/2")
    x, lam = rule.points.points, rule.weights
    d = x.shape[1]
    if method == "auto":
        method = "closed-form" if kmax is None and float(r).is_integer() else "truncated"
    if method == "closed-form":
        if not float(r).is_integer():
            raise InvalidParameter("closed form needs integer r")
        r = int(r)
        total = 0.0
        # chunk over rows to bound memory
        step = max(1, 4_000_000 // max(1, len(x) * d))
        for s in range(0, len(x), step):
            diff = x[s:s + step, None, :] - x[None, :, :]
            K = np.prod(_periodic_kernel_1d(diff, r), axis=-1)
            total += lam[s:s + step] @ K @ lam
        sq = total - 2 * lam.sum() + 1.0
        return WorstCaseError(math.sqrt(max(sq, 0.0)), None, 0.0, "closed-form")
    if kmax is None:
        kmax = default_kmax(r, d, tol, rule.l1_norm)
    tab = lambda_table(rule, kmax)
    centre = (kmax,) * d
    tab[centre] -= 1.0
    w1 = _freq_weight_1d(kmax, r)
    sq = np.abs(tab) ** 2
    for j in range(d):
        shape = [1] * d
        shape[j] = -1
        sq = sq * w1.reshape(shape)
    tail = tail_weight(kmax, r, d) * rule.l1_norm ** 2
    value = math.sqrt(float(sq.sum()))
    return WorstCaseError(value, int(kmax), float(tail), "truncated",
                          tail_dominated=tail > tol ** 2)


def diaphony(rule, kmax=None, tol=1e-4, method="auto"):
    return worst_case_error_w2r(rule, 1, kmax=kmax, tol=tol, method=method)


def bernoulli_coefficients(kmax, r, alpha):
    """Fourier coefficients of F_{r,alpha} on ||k||_inf <= kmax (d-dim array)."""
    alpha = np.atleast_1d(alpha)
    k = np.arange(-kmax, kmax + 1)
    out = np.ones((1,) * 0)
    for a in alpha:
        c = np.maximum(np.abs(k), 1.0) ** (-float(r)) * np.exp(-0.5j * np.pi * a * np.sign(k))
        out = np.multiply.outer(out, c) if out.ndim else c
    return out


def _trig_eval(coef, kmax, x):
    """sum_k coef[k] exp(2 pi i <k, x>) at rows of x."""
    d = x.shape[1]
    freqs = np.arange(-kmax, kmax + 1)
    vals = coef
    # contract one axis at a time, keeping the point axis first
    tabs = [_exp_table(x[:, j], freqs) for j in range(d)]
    acc = np.einsum("mk,k...->m...", tabs[0], vals)
    for j in range(1, d):
        acc = np.einsum("mk,mk...->m...", tabs[j], acc)
    return acc


def error_functional_grid(rule, r, kmax, alpha=None):
    """g(x) = sum_mu lambda_mu F(x - xi^mu) - 1 on a (2 kmax + 1)^d grid.

    Used for discrete L_q estimates when q != 2.
    """
    d = rule.dim
    alpha = np.zeros(d) if alpha is None else alpha
    lam = lambda_table(rule, kmax)
    coef = np.conj(lam) * bernoulli_coefficients(kmax, r, alpha)
    coef[(kmax,) * d] -= 1.0
    n = 2 * kmax + 1
    shifted = np.fft.ifftshift(coef)
    g = np.fft.ifftn(shifted) * n ** d
    return np.real(g)


def duality_probe(rule, r, alpha=None, n_random=200, K=16, seed=0):
    """Integration errors for random f = F_{r,alpha} * phi with ||phi||_2 = 1.

    Returns the largest error over random trigonometric phi of degree K and
    the error of the aligned phi that nearly attains the worst case.
    """
    d = rule.dim
    alpha = np.zeros(d) if alpha is None else np.atleast_1d(alpha)
    rng = np.random.default_rng(seed)
    Fk = bernoulli_coefficients(K, r, alpha)
    shape = Fk.shape

    def err(phi_hat):
        fk = phi_hat * Fk
        vals = np.real(_trig_eval(fk, K, rule.points.points))
        exact = np.real(fk[(K,) * d])
        return abs(vals @ rule.weights - exact)

    def real_symmetric(c):
        # phi real <=> phi_hat(-k) = conj(phi_hat(k))
        flip = np.conj(c[(slice(None, None, -1),) * d])
        c = (c + flip) / 2
        return c / np.sqrt(np.sum(np.abs(c) ** 2))

    best = 0.0
    for _ in range(n_random):
        c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        best = max(best, err(real_symmetric(c)))
    lam = lambda_table(rule, K)
    lam[(K,) * d] -= 1.0
    aligned = real_symmetric(np.conj(lam * Fk))
    return {"random_max": best, "aligned": err(aligned)}


def _family_rule(family, size, d=2, seed=0):
    if family == "fibonacci":
        return CubatureRule.equal_weights(fibonacci_set(size))
    if family == "frolov_periodic":
        return frolov_periodic_rule(frolov_basis(d), size)
    if family == "grid":
        return CubatureRule.equal_weights(regular_grid(size, d))
    if family == "random":
        return CubatureRule.equal_weights(random_uniform(size, d, seed))
    raise InvalidParameter(f"unknown family {family!r}")


def rate_experiment(family, r, sizes, d=2, seed=0, tol=1e-4):
    """Worst-case W^r_2 errors over a family; slope of log error vs log m."""
    rows = []
    for s in sizes:
        rule = _family_rule(family, s, d, seed)
        res = worst_case_error_w2r(rule, r, tol=tol)
        rows.append({"family": family, "size": s, "n": len(rule.points), "r": r,
                     "value": res.value, "method": res.method})
    slope, resid = loglog_slope([row["n"] for row in rows], [row["value"] for row in rows])
    return {"rows": rows, "slope": slope, "residuals": resid.tolist()}
