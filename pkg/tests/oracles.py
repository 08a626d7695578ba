"""Brute-force reference implementations, written independently of the
library code and used only by the tests."""

import itertools
import math

import numpy as np


def star_discrepancy_brute(x):
    """sup_b |prod b - #{x < b}/m| by walking every critical corner.

    At each corner the count is evaluated twice: points strictly below
    (limit from below) and points weakly below (limit from above).
    """
    x = np.atleast_2d(x)
    m, d = x.shape
    axes = [sorted(set(x[:, j].tolist()) | {1.0}) for j in range(d)]
    best = 0.0
    for corner in itertools.product(*axes):
        b = np.array(corner)
        vol = float(np.prod(b))
        strict = int(np.sum(np.all(x < b, axis=1)))
        weak = int(np.sum(np.all(x <= b, axis=1)))
        best = max(best, abs(vol - strict / m), abs(vol - weak / m))
    return best


def anchored_sample_max(x, n, seed):
    """Largest |vol - count/m| over n random anchors (strict counts)."""
    x = np.atleast_2d(x)
    m, d = x.shape
    rng = np.random.default_rng(seed)
    best = 0.0
    for start in range(0, n, 20000):
        b = rng.random((min(20000, n - start), d))
        counts = np.all(x[None, :, :] < b[:, None, :], axis=2).sum(axis=1)
        best = max(best, float(np.max(np.abs(np.prod(b, axis=1) - counts / m))))
    return best


def dispersion_brute(x):
    """Largest box with corners on the coordinate grid and empty interior."""
    x = np.atleast_2d(x)
    d = x.shape[1]
    axes = [np.unique(np.concatenate([[0.0, 1.0], x[:, j]])) for j in range(d)]
    pairs = [[(a, b) for a, b in itertools.combinations(ax, 2)] for ax in axes]
    best = 0.0
    for choice in itertools.product(*pairs):
        lo = np.array([c[0] for c in choice])
        hi = np.array([c[1] for c in choice])
        vol = float(np.prod(hi - lo))
        if vol <= best:
            continue
        if not np.any(np.all((x > lo) & (x < hi), axis=1)):
            best = vol
    return best


def convolve_hat(f, N, K, h):
    """Midpoint-rule (f * chi_[-u/2,u/2))(i h) for i = -N..N, with u = K h, K even.

    ``f`` is sampled on the half grid (j + 1/2) h, so the jump of an indicator
    never falls on a node.
    """
    if K % 2:
        raise ValueError("K must be even")
    half = (np.arange(-N - K, N + K) + 0.5) * h
    full = np.convolve(f(half), np.ones(K)) * h
    i = np.arange(-N, N + 1)
    return full[i + N + K + K // 2 - 1]


def l2_sq_from_fourier_1d(x, w, r, kmax):
    """Direct truncated sum of |Lambda(k) - delta_k|^2 max(|k|,1)^{-2r}, d = 1."""
    total = (np.sum(w) - 1.0) ** 2
    for k in range(1, kmax + 1):
        lam = np.sum(w * np.exp(2j * np.pi * k * x))
        total += 2 * abs(lam) ** 2 * k ** (-2.0 * r)
    return total


def zeta2():
    return math.pi ** 2 / 6
