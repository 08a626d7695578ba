"""Point-set generators: Fibonacci, Frolov (plain and periodized), van der Corput
nets, and the usual baselines (Halton, centred grid, uniform random).

Point sets are stored as ``(m, d)`` float arrays wrapped in :class:`PointSet`.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ConstructionInvalid, InvalidParameter, NumericFailure
from ._util import compositions, integer_box

FORMAT_TAG = "qmcpoints v1"


@dataclass(frozen=True)
class PointSet:
    """An ordered point set in the unit cube.

    ``closed=True`` admits coordinates equal to 1 (Frolov sets intersect the
    closed cube); everything else lives in ``[0, 1)^d``.
    """

    points: np.ndarray
    provenance: str = "unknown"
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise InvalidParameter("points must be a 2-d array (m, d)")
        if pts.shape[1] < 1:
            raise InvalidParameter("dimension must be positive")
        if pts.size:
            upper_ok = pts <= 1.0 if self.closed else pts < 1.0
            if not (np.all(pts >= 0.0) and np.all(upper_ok)):
                raise InvalidParameter("coordinates outside the unit cube")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def permuted(self, perm):
        """Same set with coordinate axes reordered by ``perm``."""
        return PointSet(self.points[:, list(perm)], f"{self.provenance}|perm", self.closed)


def fibonacci_numbers(n):
    """b_0..b_n with b_0 = b_1 = 1."""
    b = [1, 1]
    while len(b) <= n:
        b.append(b[-1] + b[-2])
    return b[: n + 1]


def fibonacci_set(n):
    """The n-th Fibonacci lattice {(mu/b_n, {mu b_{n-1}/b_n})}, mu = 0..b_n-1."""
    if n < 2:
        raise InvalidParameter("fibonacci_set needs n >= 2")
    b = fibonacci_numbers(n)
    bn, bn1 = b[n], b[n - 1]
    mu = np.arange(bn, dtype=np.int64)
    pts = np.stack([mu / bn, (mu * bn1 % bn) / bn], axis=1)
    return PointSet(pts, f"fibonacci(n={n})")


# --------------------------------------------------------------------------
# Frolov lattices


@dataclass(frozen=True)
class FrolovBasis:
    dim: int
    coefficients: tuple  # P_d, highest degree first, integers
    roots: np.ndarray
    matrix: np.ndarray  # A[j, i] = theta_j ** i
    det: float
    inverse_transpose: np.ndarray
    roots_ext: np.ndarray = field(repr=False, default=None)  # longdouble roots


def _poly_coefficients(d):
    coeffs = np.array([1], dtype=object)
    for j in range(1, d + 1):
        coeffs = np.convolve(coeffs, np.array([1, -(2 * j - 1)], dtype=object))
    coeffs = [int(c) for c in coeffs]
    coeffs[-1] -= 1
    return tuple(coeffs)


def _horner(coeffs, x):
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _has_rational_root(coeffs):
    # monic integer polynomial: rational roots are integer divisors of the constant
    c0 = abs(coeffs[-1])
    if c0 == 0:
        return True
    divisors = [k for k in range(1, c0 + 1) if c0 % k == 0]
    return any(_horner(coeffs, s * k) == 0 for k in divisors for s in (1, -1))


def _polish_roots(coeffs, roots, tol=1e-12, maxiter=50):
    deriv = [c * (len(coeffs) - 1 - i) for i, c in enumerate(coeffs[:-1])]
    out = []
    for x in roots:
        x = np.longdouble(x)
        for _ in range(maxiter):
            step = _horner(coeffs, x) / _horner(deriv, x)
            x -= step
            if abs(step) <= 1e-18 * max(1, abs(x)):
                break
        scale = sum(abs(c) * abs(x) ** (len(coeffs) - 1 - i) for i, c in enumerate(coeffs))
        if abs(_horner(coeffs, x)) > tol * scale:
            raise NumericFailure(f"root polish did not converge near {float(x)}")
        out.append(x)
    return np.array(out, dtype=np.longdouble)


def norm_form(basis, m):
    """prod_j L_j(m) with L = A m, evaluated in extended precision."""
    m = np.asarray(m, dtype=np.longdouble)
    powers = basis.roots_ext[None, :] ** np.arange(basis.dim, dtype=np.longdouble)[:, None]
    return np.prod(m @ powers, axis=-1)


def frolov_basis(d, check_radius=None):
    """Vandermonde matrix of the roots of prod_{j<=d}(x - (2j-1)) - 1.

    The polynomial is irreducible with real roots, so ``prod_j L_j(m)`` is the
    algebraic norm of a nonzero algebraic integer and has modulus >= 1. That
    property is re-verified on ``||m||_inf <= check_radius`` (default 50, or
    the largest radius with at most 2e6 vectors).
    """
    if not 1 <= d <= 4:
        raise InvalidParameter("frolov_basis supports 1 <= d <= 4")
    coeffs = _poly_coefficients(d)
    if d > 1 and _has_rational_root(coeffs):
        raise ConstructionInvalid(f"P_{d} has a rational root")
    raw = np.roots(np.array(coeffs, dtype=float))
    if np.max(np.abs(raw.imag)) > 1e-8:
        raise NumericFailure("complex roots encountered")
    roots_ext = np.sort(_polish_roots(coeffs, raw.real))[::-1]
    roots = roots_ext.astype(float)
    A = roots[:, None] ** np.arange(d)[None, :]
    det = float(np.linalg.det(A))
    if abs(det) <= 0:
        raise ConstructionInvalid("singular Frolov matrix")
    basis = FrolovBasis(
        dim=d,
        coefficients=coeffs,
        roots=roots,
        matrix=A,
        det=det,
        inverse_transpose=np.linalg.inv(A).T,
        roots_ext=roots_ext,
    )
    if check_radius is None:
        check_radius = min(50, int((2e6 ** (1.0 / d) - 1) // 2))
    _check_admissible(basis, check_radius)
    return basis


def _check_admissible(basis, radius):
    d = basis.dim
    ms = integer_box([-radius] * d, [radius] * d)
    ms = ms[np.any(ms != 0, axis=1)]
    for start in range(0, len(ms), 200_000):
        vals = np.abs(norm_form(basis, ms[start:start + 200_000]))
        if np.any(vals < 1 - 1e-9):
            raise ConstructionInvalid("lattice is not admissible on the check window")


def lattice_points_in_box(generator, lo, hi):
    """Integer vectors m with ``generator @ m`` inside the closed box [lo, hi].

    Enumerates the enclosing ball with a triangular (Fincke-Pohst) recursion
    and then filters exactly. Returns ``(ms, points)``.
    """
    G = np.asarray(generator, dtype=float)
    d = G.shape[0]
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (d,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (d,))
    centre = (lo + hi) / 2
    rad2 = float(np.sum(((hi - lo) / 2) ** 2)) * (1 + 1e-9) + 1e-18
    Q, R = np.linalg.qr(G)
    t = Q.T @ centre
    # frontier rows: partial integer vectors for coordinates i..d-1, with residual norm
    frontier = np.zeros((1, 0), dtype=np.int64)
    used = np.zeros(1)
    for i in range(d - 1, -1, -1):
        tail = frontier @ R[i, i + 1:] if frontier.shape[1] else np.zeros(len(frontier))
        centre_i = (t[i] - tail) / R[i, i]
        half = np.sqrt(np.maximum(rad2 - used, 0.0)) / abs(R[i, i])
        lo_i = np.ceil(centre_i - half).astype(np.int64)
        hi_i = np.floor(centre_i + half).astype(np.int64)
        counts = np.maximum(hi_i - lo_i + 1, 0)
        rep = np.repeat(np.arange(len(frontier)), counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        vals = lo_i[rep] + offs
        resid = (R[i, i] * vals + tail[rep] - t[i]) ** 2 + used[rep]
        keep = resid <= rad2
        frontier = np.column_stack([vals[keep], frontier[rep][keep]])
        used = resid[keep]
    pts = frontier @ G.T
    tol = 1e-12
    inside = np.all((pts >= lo - tol) & (pts <= hi + tol), axis=1)
    return frontier[inside], pts[inside]


def frolov_points(basis, a):
    """{(A^{-1})^T m / a : m in Z^d} intersected with the closed cube [0,1]^d."""
    if a <= 1:
        raise InvalidParameter("Frolov scale a must exceed 1")
    d = basis.dim
    _, pts = lattice_points_in_box(basis.inverse_transpose / a, np.zeros(d), np.ones(d))
    pts = np.clip(pts, 0.0, 1.0)
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    bound = 4 * a ** d * abs(basis.det) + 4 ** d
    if len(pts) > bound:
        raise ConstructionInvalid(f"Frolov cardinality {len(pts)} exceeds {bound}")
    return PointSet(pts, f"frolov(d={d},a={a:g})", closed=True)


def _smoothstep(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    out[x >= 1] = 1.0
    mid = (x > 0) & (x < 1)
    xm = x[mid]
    left = np.exp(-1.0 / xm)
    right = np.exp(-1.0 / (1.0 - xm))
    out[mid] = left / (left + right)
    return out


def partition_weight(t):
    """C-infinity bump with support (-1/2, 3/2) whose integer translates sum to 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    rising = (t > -0.5) & (t <= 0.5)
    falling = (t > 0.5) & (t < 1.5)
    out[rising] = _smoothstep(t[rising] + 0.5)
    out[falling] = _smoothstep(1.5 - t[falling])  # = 1 - S(t - 1/2), no cancellation
    return out


@dataclass(frozen=True)
class PeriodizedFrolov:
    basis: FrolovBasis
    a: float
    raw: np.ndarray  # eta, in [-1/2, 3/2)^d
    points: PointSet  # {eta}
    weights: np.ndarray


def frolov_periodized(basis, a):
    """Frolov lattice on [-1/2, 3/2)^d folded into the torus with smooth weights.

    Weights are w(eta)/(a^d |det A|), so that the rule integrates constants to
    about one.
    """
    if a <= 1:
        raise InvalidParameter("Frolov scale a must exceed 1")
    d = basis.dim
    tol = 1e-12
    _, eta = lattice_points_in_box(basis.inverse_transpose / a, np.full(d, -0.5), np.full(d, 1.5))
    eta = eta[np.all((eta >= -0.5 - tol) & (eta < 1.5 - tol), axis=1)]
    order = np.lexsort(eta.T[::-1])
    eta = eta[order]
    xi = eta - np.floor(eta)
    xi[xi >= 1.0] = 0.0
    weights = np.prod(partition_weight(eta), axis=1) / (a ** d * abs(basis.det))
    return PeriodizedFrolov(
        basis=basis,
        a=a,
        raw=eta,
        points=PointSet(xi, f"frolov_periodized(d={d},a={a:g})"),
        weights=weights,
    )


# --------------------------------------------------------------------------
# dyadic nets


def _bit_reverse(i, bits):
    out = np.zeros_like(i)
    for b in range(bits):
        out |= ((i >> b) & 1) << (bits - 1 - b)
    return out


def corput_net(r):
    """The 2-d Hammersley/van der Corput (0, r, 2)-net with 2^r points."""
    if not 0 <= r <= 24:
        raise InvalidParameter("corput_net needs 0 <= r <= 24")
    i = np.arange(2 ** r, dtype=np.int64)
    scale = float(2 ** r)
    pts = np.stack([i / scale, _bit_reverse(i, r) / scale], axis=1)
    return PointSet(pts, f"corput_net(r={r})")


def net_check(T, t, r, d=None):
    """True iff every dyadic box of volume 2^(t-r) holds exactly 2^t points of T."""
    pts = T.points if isinstance(T, PointSet) else np.asarray(T, dtype=float)
    d = pts.shape[1] if d is None else d
    if len(pts) != 2 ** r:
        raise InvalidParameter(f"net_check needs exactly 2^{r} points, got {len(pts)}")
    if pts.shape[1] != d or not 0 <= t <= r:
        raise InvalidParameter("bad net parameters")
    if np.any(pts >= 1.0) or np.any(pts < 0.0):
        return False
    for s in compositions(r - t, d):
        cells = np.zeros(len(pts), dtype=np.int64)
        for j, sj in enumerate(s):
            cells = (cells << sj) | np.floor(pts[:, j] * 2.0 ** sj).astype(np.int64)
        counts = np.bincount(cells, minlength=2 ** (r - t))
        if np.any(counts != 2 ** t):
            return False
    return True


# --------------------------------------------------------------------------
# baselines


def _primes(k):
    out, cand = [], 2
    while len(out) < k:
        if all(cand % p for p in out if p * p <= cand):
            out.append(cand)
        cand += 1
    return out


def radical_inverse(i, base):
    i = np.asarray(i, dtype=np.int64).copy()
    out = np.zeros(i.shape)
    scale = 1.0 / base
    while np.any(i > 0):
        out += (i % base) * scale
        i //= base
        scale /= base
    return out


def halton_set(m, d):
    """First m Halton points (indices 1..m) in the first d prime bases."""
    if m < 0 or d < 1:
        raise InvalidParameter("halton_set needs m >= 0, d >= 1")
    idx = np.arange(1, m + 1)
    pts = np.stack([radical_inverse(idx, p) for p in _primes(d)], axis=1) if m else np.empty((0, d))
    return PointSet(pts.reshape(m, d), f"halton(m={m},d={d})")


def regular_grid(k, d):
    """k^d cell centres (2i+1)/(2k), last axis varying fastest."""
    if k < 1 or d < 1:
        raise InvalidParameter("regular_grid needs k >= 1, d >= 1")
    axis = (2 * np.arange(k) + 1) / (2 * k)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return PointSet(np.stack([g.ravel() for g in grids], axis=1), f"grid(k={k},d={d})")


def random_uniform(m, d, seed):
    if m < 0 or d < 1:
        raise InvalidParameter("random_uniform needs m >= 0, d >= 1")
    rng = np.random.default_rng(seed)
    return PointSet(rng.random((m, d)), f"random(m={m},d={d},seed={seed})")


# --------------------------------------------------------------------------
# file format


def format_points(ps):
    lines = [f"# {FORMAT_TAG} dim={ps.dim} count={len(ps)} provenance={ps.provenance}"]
    lines += [" ".join(f"{c:.16e}" for c in row) for row in ps.points]
    return "\n".join(lines) + "\n"


def write_points(path, ps):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_points(ps))


def parse_points(text):
    lines = text.splitlines()
    if not lines or not lines[0].startswith(f"# {FORMAT_TAG} "):
        raise InvalidParameter("not a qmcpoints v1 file")
    header = lines[0][len(f"# {FORMAT_TAG} "):]
    head, _, provenance = header.partition("provenance=")
    fields = dict(item.split("=", 1) for item in head.split())
    dim, count = int(fields["dim"]), int(fields["count"])
    rows = [ln.split() for ln in lines[1:] if ln.strip()]
    if len(rows) != count or any(len(r) != dim for r in rows):
        raise InvalidParameter("point count or dimension does not match header")
    pts = np.array(rows, dtype=float).reshape(count, dim)
    closed = bool(pts.size) and bool(np.any(pts == 1.0))
    return PointSet(pts, provenance.strip(), closed=closed)


def read_points(path):
    with open(path, encoding="utf-8") as fh:
        return parse_points(fh.read())


def fibonacci_cardinality(n):
    return fibonacci_numbers(n)[n]


def log2_floor(m):
    return int(math.floor(math.log2(m))) if m > 0 else 0
