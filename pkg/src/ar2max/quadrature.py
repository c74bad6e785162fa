"""Gauss-Legendre rules and tensor-product grids on a truncated box in R^2.

Grids are split into two Gauss-Legendre panels per axis at the threshold x:
functions built from clipped arguments ``min(y_i, x)`` have a kink there.
Node ordering is row-major: node ``k = i*m1 + j`` sits at
``(axis0[i], axis1[j])``.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GridTooLarge, InvalidInterval, UnsupportedKernelRegime

DEFAULT_MAX_POINTS = 10_000


def _legendre_nodes(m, tol=1e-14, max_iter=100):
    """Roots and weights of P_m on [-1, 1] by Newton's method."""
    k = np.arange(1, m // 2 + 1)
    # Tricomi initial guess, accurate to O(m^-4)
    t = (1 - (m - 1) / (8.0 * m ** 3)) * np.cos(np.pi * (4 * k - 1) / (4 * m + 2))
    for _ in range(max_iter):
        p0, p1 = np.ones_like(t), t.copy()
        for n in range(2, m + 1):
            p0, p1 = p1, ((2 * n - 1) * t * p1 - (n - 1) * p0) / n
        dp = m * (t * p1 - p0) / (t * t - 1)
        step = p1 / dp
        t = t - step
        if np.all(np.abs(p1) < tol) or np.all(np.abs(step) < 1e-16):
            break
    p0, p1 = np.ones_like(t), t.copy()
    for n in range(2, m + 1):
        p0, p1 = p1, ((2 * n - 1) * t * p1 - (n - 1) * p0) / n
    dp = m * (t * p1 - p0) / (t * t - 1)
    w = 2.0 / ((1 - t * t) * dp * dp)
    if m % 2:
        # centre node 0; P_m'(0) from the recurrence of P_{m-1}(0)
        pm1 = 1.0
        for n in range(2, m, 2):
            pm1 *= -(n - 1) / n
        w0 = 2.0 / (m * pm1) ** 2
        nodes = np.concatenate([-t, [0.0], t[::-1]])
        weights = np.concatenate([w, [w0], w[::-1]])
    else:
        nodes = np.concatenate([-t, t[::-1]])
        weights = np.concatenate([w, w[::-1]])
    return nodes, weights


_CACHE = {}


def gauss_legendre_1d(m, a=-1.0, b=1.0):
    """``m``-point Gauss-Legendre nodes and weights mapped to ``[a, b]``.

    Exact for polynomials of degree ``2m - 1``.
    """
    m = int(m)
    if m < 1:
        raise InvalidInterval(f"need at least one node, got m={m}")
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise InvalidInterval(f"invalid interval [{a}, {b}]")
    if m not in _CACHE:
        _CACHE[m] = _legendre_nodes(m) if m > 1 else (np.zeros(1), np.full(1, 2.0))
    t, w = _CACHE[m]
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * t, half * w


@dataclass(frozen=True)
class Box:
    """Rectangle ``[lo0, hi0] x [lo1, hi1]`` with an optional common breakpoint."""

    lo0: float
    hi0: float
    lo1: float
    hi1: float
    split: Optional[float] = None

    @property
    def area(self):
        return (self.hi0 - self.lo0) * (self.hi1 - self.lo1)

    def as_dict(self):
        return {"lo0": self.lo0, "hi0": self.hi0, "lo1": self.lo1, "hi1": self.hi1, "split": self.split}


def standard_units(innovation, eps):
    """Half-width ``c`` (in stationary standard deviations) of the retained range.

    The larger of the Gaussian quantile and the standardised innovation
    quantile; a weighted sum of innovations has lighter relative tails than a
    single innovation, so this is conservative for non-Gaussian laws.
    """
    from scipy.special import ndtri

    c_norm = -float(ndtri(eps))
    c_innov = (innovation.tail_quantile(0.5) - innovation.tail_quantile(eps)) / innovation.std
    return max(c_norm, c_innov)


def truncation_box(innovation, params, x, eps=1e-8):
    """Finite integration box for the kernel operator at threshold ``x``.

    The lower edges sit ``c`` stationary standard deviations below the mean,
    where every initial or iterated CDF is below ``eps``.  The upper edges must
    reach further than the stationary range: the kernel acts on CDFs, so
    ``K(y, z) G(z)`` lives on the band ``r1 z0 + r2 z1 <= x - q`` (``q`` the
    innovation's eps-quantile), which extends to large z1 when r2 is small.
    """
    from .model import stationary_moments

    if not (0 < eps < 1e-2):
        raise InvalidInterval(f"eps must lie in (0, 1e-2), got {eps}")
    r1, r2 = params.r1, params.r2
    if r2 <= 0:
        raise UnsupportedKernelRegime(
            f"r2={r2} <= 0: the kernel's support is not bounded in z and the "
            "truncated-box discretisation does not apply")
    var_x, _, _ = stationary_moments(params)
    sd = math.sqrt(var_x)
    c = standard_units(innovation, eps)
    lo = -c * sd
    top = max(x, c * sd)
    q_lo = innovation.tail_quantile(eps)
    hi0 = max(top, (x - q_lo - r2 * lo) / r1)
    hi1 = max(top, (x - q_lo - r1 * lo) / r2)
    split = float(x) if lo < x < min(hi0, hi1) else None
    return Box(lo, hi0, lo, hi1, split)


def _axis_rule(m, lo, hi, split, split_fraction):
    if split is None or not (lo < split < hi) or m < 2:
        return gauss_legendre_1d(m, lo, hi)
    m_lo = min(m - 1, max(1, int(round(m * split_fraction))))
    n1, w1 = gauss_legendre_1d(m_lo, lo, split)
    n2, w2 = gauss_legendre_1d(m - m_lo, split, hi)
    return np.concatenate([n1, n2]), np.concatenate([w1, w2])


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray  # (r, 2)
    weights: np.ndarray  # (r,)
    box: Box
    m: int
    axis0: tuple
    axis1: tuple

    @property
    def size(self):
        return self.weights.shape[0]

    @property
    def z0(self):
        return self.nodes[:, 0]

    @property
    def z1(self):
        return self.nodes[:, 1]


def tensor_grid(m, box, max_points=DEFAULT_MAX_POINTS, split_fraction=0.5):
    """Cartesian product of two ``m``-point rules (composite at ``box.split``)."""
    m = int(m)
    if m < 2:
        raise InvalidInterval(f"tensor grid needs m >= 2, got {m}")
    if m * m > max_points:
        raise GridTooLarge(f"{m}x{m} = {m * m} nodes exceeds the cap of {max_points}")
    a0 = _axis_rule(m, box.lo0, box.hi0, box.split, split_fraction)
    a1 = _axis_rule(m, box.lo1, box.hi1, box.split, split_fraction)
    z0, z1 = np.meshgrid(a0[0], a1[0], indexing="ij")
    nodes = np.column_stack([z0.ravel(), z1.ravel()])
    weights = np.outer(a0[1], a1[1]).ravel()
    return QuadratureGrid(nodes, weights, box, m, a0, a1)


def integrate(grid, fn):
    """``sum_k w_k fn(z_k)``; ``fn`` is called once with the node coordinate arrays."""
    return float(np.dot(grid.weights, np.asarray(fn(grid.z0, grid.z1), dtype=float)))
