"""Hat functions, their periodizations, truncated-power kernels and the
Bernoulli-type kernels F_{r,alpha}.

The univariate hat of order r and width u is the r-fold self-convolution of
the indicator of [-u/2, u/2); it equals ``u**(r-1) * M_r(x/u)`` with ``M_r``
the centred cardinal B-spline, which is what we evaluate.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidParameter

_EDGE_TOL = 1e-12


def cardinal_bspline(t, r):
    """Centred cardinal B-spline M_r (support (-r/2, r/2), unit integral).

    Uses the two-term recurrence
    N_k(s) = (s N_{k-1}(s) + (k - s) N_{k-1}(s - 1)) / (k - 1).
    """
    s = np.asarray(t, dtype=float) + r / 2.0
    shifts = s[..., None] - np.arange(r)
    vals = ((shifts >= 0) & (shifts < 1)).astype(float)
    for k in range(2, r + 1):
        x = shifts[..., : r - k + 1]
        vals = (x * vals[..., :-1] + (k - x) * vals[..., 1:]) / (k - 1)
    return vals[..., 0]


def hat_eval(x, u, r):
    """h^r(x, u); vectorised over ``x`` (and ``u`` by broadcasting)."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise InvalidParameter("hat width u must be positive")
    if r < 1 or int(r) != r:
        raise InvalidParameter("hat order r must be a positive integer")
    x = np.asarray(x, dtype=float)
    if r == 1:
        # compare directly so the half-open edge is exact
        return ((-u / 2 <= x) & (x < u / 2)).astype(float) * np.ones_like(u)
    return u ** (r - 1) * cardinal_bspline(x / u, int(r))


@dataclass(frozen=True)
class HatSpec:
    """One box hat h^r_B, or its 1-periodization when ``periodic`` is set.

    For the non-periodic kind the support box
    prod [z_j - r u_j / 2, z_j + r u_j / 2) must sit inside [0,1)^d.
    """

    r: int
    z: tuple
    u: tuple
    periodic: bool = False

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=float))
        u = np.atleast_1d(np.asarray(self.u, dtype=float))
        object.__setattr__(self, "z", tuple(z.tolist()))
        object.__setattr__(self, "u", tuple(u.tolist()))
        if self.r < 1 or len(z) != len(u):
            raise InvalidParameter("bad hat order or shape")
        if np.any(u <= 0):
            raise InvalidParameter("hat widths must be positive")
        if self.periodic:
            if np.any(u > 0.5) or np.any(z < 0) or np.any(z >= 1):
                raise InvalidParameter("periodic hats need u in (0,1/2] and z in [0,1)")
        else:
            lo, hi = self.box
            if np.any(lo < -_EDGE_TOL) or np.any(hi > 1 + _EDGE_TOL):
                raise InvalidParameter("hat support leaves the unit cube")

    @property
    def dim(self):
        return len(self.z)

    @property
    def box(self):
        z, u = np.array(self.z), np.array(self.u)
        return z - self.r * u / 2, z + self.r * u / 2

    @classmethod
    def from_box(cls, lower, upper, r):
        lower, upper = np.asarray(lower, float), np.asarray(upper, float)
        return cls(r, (lower + upper) / 2, (upper - lower) / r)


def hat_box_eval(x, spec):
    """prod_j h^r(x_j - z_j, u_j); ``x`` may be a single point or an (m, d) array."""
    if spec.periodic:
        raise InvalidParameter("use periodic_hat_eval for periodic specs")
    x = np.asarray(x, dtype=float)
    z, u = np.array(spec.z), np.array(spec.u)
    return np.prod(hat_eval(x - z, u, spec.r), axis=-1)


def hat_box_integral(spec):
    return float(np.prod(np.array(spec.u) ** spec.r))


def periodic_hat_1d(x, z, u, r):
    """Univariate periodization sum_k h^r(x - z + k, u).

    Support length r*u <= r/2, so |k| <= ceil(r/2) captures every nonzero term.
    """
    x = np.asarray(x, dtype=float)
    diff = x - z
    reach = math.ceil(r / 2)
    return sum(hat_eval(diff + k, u, r) for k in range(-reach, reach + 1))


def periodic_hat_eval(x, spec):
    if not spec.periodic:
        raise InvalidParameter("spec is not periodic")
    x = np.asarray(x, dtype=float)
    z, u = np.array(spec.z), np.array(spec.u)
    return np.prod(periodic_hat_1d(x, z, u, spec.r), axis=-1)


@dataclass(frozen=True)
class BernoulliSpec:
    r: float
    alpha: tuple
    K: int

    def __post_init__(self):
        if self.r <= 1:
            raise InvalidParameter("F_{r,alpha} needs r > 1 for absolute convergence")
        if self.K < 1:
            raise InvalidParameter("truncation K must be >= 1")
        object.__setattr__(self, "alpha", tuple(np.atleast_1d(np.asarray(self.alpha, float)).tolist()))

    @property
    def dim(self):
        return len(self.alpha)

    @property
    def tail_bound(self):
        """Bound on the per-coordinate truncation error, 2 K^{1-r}/(r-1)."""
        return 2 * self.K ** (1 - self.r) / (self.r - 1)

    @classmethod
    def for_tolerance(cls, r, alpha, tol=1e-6):
        if r <= 1:
            raise InvalidParameter("F_{r,alpha} needs r > 1 for absolute convergence")
        K = math.ceil((2 / ((r - 1) * tol)) ** (1 / (r - 1)))
        return cls(r, alpha, K)


def bernoulli_1d(x, r, alpha, K, chunk=4096):
    """1 + 2 sum_{k<=K} k^{-r} cos(2 pi k x - alpha pi / 2)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    flat = x.ravel()
    out = np.ones_like(flat)
    for start in range(1, K + 1, chunk):
        k = np.arange(start, min(K, start + chunk - 1) + 1, dtype=float)
        out += 2 * np.cos(2 * np.pi * np.outer(flat, k) - alpha * np.pi / 2) @ k ** (-r)
    return out.reshape(x.shape)


def bernoulli_eval(x, spec):
    """F_{r,alpha}(x) = prod_j F_{r,alpha_j}(x_j), truncated at K terms."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != spec.dim:
        raise InvalidParameter("dimension mismatch")
    vals = np.ones(x.shape[0])
    for j, a in enumerate(spec.alpha):
        vals = vals * bernoulli_1d(x[:, j], spec.r, a, spec.K)
    return float(vals[0]) if single else vals


def br_eval(x, y, r):
    """B_r(x, y) = prod_j (y_j - x_j)_+^{r-1} / (r-1)!, with (a)_+^0 = [a > 0]."""
    if r < 1:
        raise InvalidParameter("B_r needs r >= 1")
    diff = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    if r == 1:
        factors = (diff > 0).astype(float)
    else:
        factors = np.maximum(diff, 0.0) ** (r - 1) / math.factorial(r - 1)
    return np.prod(factors, axis=-1)
