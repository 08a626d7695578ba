"""Trigonometric polynomials on the 2 pi-torus and checks of universal
sampling discretization for hyperbolic-cross style collections.

Point sets stay in [0,1)^d; they are scaled by 2 pi when polynomials are
sampled.
"""

from dataclasses import dataclass
import math

import numpy as np

from .dispersion import dispersion
from .errors import BudgetExceeded, InvalidParameter
from .pointgen import PointSet, random_uniform
from ._util import compositions, integer_box


@dataclass(frozen=True)
class FrequencyBox:
    s: tuple

    def __post_init__(self):
        s = tuple(int(v) for v in self.s)
        if any(v < 0 for v in s):
            raise InvalidParameter("box exponents must be nonnegative")
        object.__setattr__(self, "s", s)

    @property
    def dim(self):
        return len(self.s)

    @property
    def size(self):
        return math.prod(2 ** (v + 1) - 1 for v in self.s)

    def frequencies(self):
        """All k with |k_j| < 2^{s_j}, lexicographic."""
        hi = [2 ** v - 1 for v in self.s]
        return integer_box([-h for h in hi], hi)


@dataclass
class TrigPoly:
    freqs: np.ndarray  # (n, d) integers
    coeffs: np.ndarray  # (n,) complex

    def __post_init__(self):
        self.freqs = np.atleast_2d(np.asarray(self.freqs, dtype=np.int64))
        self.coeffs = np.asarray(self.coeffs, dtype=complex).ravel()
        if len(self.coeffs) != len(self.freqs):
            raise InvalidParameter("one coefficient per frequency required")

    @property
    def dim(self):
        return self.freqs.shape[1]

    def __call__(self, x):
        """f(x) = sum_k c_k exp(i <k, x>) at rows of x (2 pi-periodic)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.exp(1j * (x @ self.freqs.T)) @ self.coeffs

    def at_unit_points(self, P):
        pts = P.points if isinstance(P, PointSet) else np.atleast_2d(P)
        return self(2 * np.pi * pts)


def enumerate_collection(n, d):
    if n < 0 or d < 1:
        raise InvalidParameter("need n >= 0 and d >= 1")
    return [FrequencyBox(s) for s in compositions(n, d)]


def sup_norm_estimate(f, oversample=8):
    """max |f| over an equispaced tensor grid; a lower bound for ||f||_inf."""
    if oversample < 1:
        raise InvalidParameter("oversample must be >= 1")
    N = np.abs(f.freqs).max(axis=0)
    shape = tuple(int(oversample * (2 * n + 1)) for n in N)
    grid = np.zeros(shape, dtype=complex)
    idx = tuple((f.freqs[:, j] % shape[j]) for j in range(f.dim))
    np.add.at(grid, idx, f.coeffs)
    vals = np.fft.ifftn(grid) * math.prod(shape)
    return float(np.abs(vals).max())


def random_poly(box, rng):
    Q = box.frequencies()
    c = (rng.standard_normal(len(Q)) + 1j * rng.standard_normal(len(Q))) / math.sqrt(2)
    return TrigPoly(Q, c)


def universal_linf_check(T, n, trials=100, seed=0, oversample=8, zero_force=False):
    """Smallest observed max_nu |f(2 pi xi^nu)| / ||f||_inf over C(n, d).

    With ``zero_force`` each box also gets polynomials shifted by a constant
    so they vanish at the first point of T.
    """
    d = T.dim
    rng = np.random.default_rng(seed)
    worst = (math.inf, None)
    for box in enumerate_collection(n, d):
        for t in range(trials):
            f = random_poly(box, rng)
            variants = [f]
            if zero_force:
                c = f.coeffs.copy()
                zero = np.flatnonzero(np.all(f.freqs == 0, axis=1))[0]
                c[zero] -= f.at_unit_points(T.points[:1])[0]
                variants.append(TrigPoly(f.freqs, c))
            for g in variants:
                sup = sup_norm_estimate(g, oversample)
                if sup == 0:
                    continue
                ratio = float(np.abs(g.at_unit_points(T)).max() / sup)
                if ratio < worst[0]:
                    worst = (ratio, {"s": list(box.s), "trial": t, "seed": seed})
    return worst


def universality_vs_dispersion(T, c_scan, trials=100, seed=0, oversample=8):
    """Rows pairing the universality ratio at level n = r - c with disp(T) 2^n."""
    r = int(math.floor(math.log2(len(T))))
    disp = dispersion(T).value
    rows = []
    for c in c_scan:
        n = r - c
        if n < 0:
            continue
        ratio, witness = universal_linf_check(T, n, trials, seed, oversample)
        rows.append({"c": c, "n": n, "r": r, "c1_hat": ratio, "witness": witness,
                     "disp_times_2n": disp * 2 ** n})
    return rows


def gram_matrix(Q, P):
    Q = np.atleast_2d(np.asarray(Q))
    pts = P.points if isinstance(P, PointSet) else np.atleast_2d(P)
    E = np.exp(2j * np.pi * (pts @ Q.T))  # (m, |Q|)
    return E.conj().T @ E / len(pts)


def marcinkiewicz_l2_bounds(Q, P, max_size=2000):
    """Extreme eigenvalues of the Gram matrix of {e^{i<k,.>}} sampled on 2 pi P."""
    Q = np.atleast_2d(np.asarray(Q))
    if len(Q) > max_size:
        raise BudgetExceeded(f"|Q| = {len(Q)} exceeds {max_size}")
    ev = np.linalg.eigvalsh(gram_matrix(Q, P))
    return float(ev[0]), float(ev[-1])


def sparse_collection_probe(v, n, d, m, trials=100, seed=0):
    """Worst Marcinkiewicz constants over random v-subsets of [-n, n]^d."""
    if v < 1:
        raise InvalidParameter("v must be >= 1")
    rng = np.random.default_rng(seed)
    P = random_uniform(m, d, int(rng.integers(2 ** 31)))
    Pi = integer_box([-n] * d, [n] * d)
    if v > len(Pi):
        raise InvalidParameter("v exceeds the number of frequencies")
    worst_lo, worst_hi = math.inf, -math.inf
    for _ in range(trials):
        Q = Pi[np.sort(rng.choice(len(Pi), size=v, replace=False))]
        lo, hi = marcinkiewicz_l2_bounds(Q, P)
        worst_lo, worst_hi = min(worst_lo, lo), max(worst_hi, hi)
    return {"v": v, "n": n, "d": d, "m": m, "trials": trials, "seed": seed,
            "worst_c1": worst_lo, "worst_c2": worst_hi}
