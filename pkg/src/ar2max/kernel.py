"""The two-step kernel of the clipped AR(2) recursion.

Two steps of the process map the joint CDF ``G_{n-2}`` of
``(X_{n-2}, X_{n-3})`` (restricted to ``M_{n-2} <= x``) into ``G_n`` through

    (K r)(y) = integral K(y, z) r(z) dz,

    K(y, z) = (r1 + r2/r1) r2 int_{w0 > delta} f'(alpha1(w0)) f(w0) dw0
              + r1 r2 F(delta) f'(alpha2),

with ``delta = y0x - r1 y1x - r2 z0``, ``alpha2 = y1x - r1 z0 - r2 z1``,
``alpha1(w0) = (y0x - (r1^2 + r2) z0 - r1 r2 z1 - w0) / r1`` and
``y_ix = min(y_i, x)``.  ``K = -d gamma / d z1`` for the function computed by
:func:`gamma`, which is how the kernel is tested.

Points are passed as array-likes whose last axis has length 2.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import _accel, _kernels
from .errors import BetaUndefined, InvalidParameter, NonFiniteEntry
from .quadrature import gauss_legendre_1d


@dataclass(frozen=True)
class KernelContext:
    params: object
    innovation: object
    x: float
    inner_rule: int = 32
    eps: float = 1e-8

    def __post_init__(self):
        if not np.isfinite(self.x):
            raise InvalidParameter(f"threshold x must be finite, got {self.x}")
        if self.inner_rule < 8:
            raise InvalidParameter(f"inner_rule must be >= 8, got {self.inner_rule}")

    @cached_property
    def cutoffs(self):
        """Innovation quantiles bounding the inner integral."""
        return (self.innovation.tail_quantile(self.eps), self.innovation.tail_quantile(1.0 - self.eps))

    @cached_property
    def inner_nodes(self):
        return gauss_legendre_1d(self.inner_rule)


def _split(p):
    p = np.asarray(p, dtype=float)
    return p[..., 0], p[..., 1]


def clip(y, x):
    return np.minimum(np.asarray(y, dtype=float), x)


def g_values(z1, e1, e0, y, ctx):
    """The two constraints ``g1``, ``g2`` on ``X_{n-2}`` given ``(z1, e1, e0)``."""
    r1, r2 = ctx.params.r1, ctx.params.r2
    y0x, y1x = _split(clip(y, ctx.x))
    g1 = (y0x - e0 - r1 * e1 - r1 * r2 * z1) / (r1 * r1 + r2)
    g2 = (y1x - e1 - r2 * z1) / r1
    return g1, g2


def g_min(z1, e1, e0, y, ctx):
    g1, g2 = g_values(z1, e1, e0, y, ctx)
    return np.minimum(g1, g2)


def h_boundary(e0, z1, y, ctx):
    """Value of ``e1`` at which ``g1 == g2``."""
    r1, r2 = ctx.params.r1, ctx.params.r2
    y0x, y1x = _split(clip(y, ctx.x))
    return ((r1 * r1 + r2) * y1x - r1 * y0x + r1 * e0 - r2 * r2 * z1) / r2


class Geometry(NamedTuple):
    delta: object
    beta: object
    c: object
    alpha1: object
    alpha2: object
    h: object


def geometry(y, z, w0, ctx, need_beta=True):
    r1, r2 = ctx.params.r1, ctx.params.r2
    y0x, y1x = _split(clip(y, ctx.x))
    z0, z1 = _split(z)
    delta = y0x - r1 * y1x - r2 * z0
    c = (y0x - r1 * r2 * z1 - (r1 * r1 + r2) * z0 - w0) / r1
    alpha1 = ((y0x - (r1 * r1 + r2) * z0 - r1 * r2 * z1) - w0) / r1
    alpha2 = y1x - r1 * z0 - r2 * z1
    if r2 == 0:
        if need_beta:
            raise BetaUndefined("beta is undefined for r2 = 0")
        beta = h = None
    else:
        beta = (y0x - r1 * y1x - w0) / r2
        h = h_boundary(w0, z1, y, ctx)
    return Geometry(delta, beta, c, alpha1, alpha2, h)


def _pointwise(fn, y, z, ctx):
    p = ctx.params
    q_lo, q_hi = ctx.cutoffs
    t, w = ctx.inner_nodes
    y0x, y1x = _split(clip(y, ctx.x))
    z0, z1 = _split(z)
    y0x, y1x, z0, z1 = np.broadcast_arrays(y0x, y1x, z0, z1)
    out = fn(ctx.innovation, p.r1, p.r2, y0x, y1x, z0, z1, q_lo, q_hi, t, w)
    return out if out.ndim else float(out)


def gamma(y, z, ctx):
    """``gamma_y(z)``, the z0-density of the two-step transition in CDF form."""
    return _pointwise(_kernels.gamma_values_np, y, z, ctx)


def kernel_K(y, z, ctx):
    return _pointwise(_kernels.kernel_values_np, y, z, ctx)


def kernel_row_at_infinity(z, ctx):
    """``K(inf, z)``; clipping sends ``(inf, inf)`` to ``(x, x)``."""
    return kernel_K((ctx.x, ctx.x), z, ctx)


def kernel_matrix(ctx, y_pts, z_pts, use_numba=None):
    """Dense matrix ``K(y_i, z_j)``.

    Uses the compiled loop for the built-in innovation families unless
    ``use_numba`` is False or acceleration is disabled.
    """
    y0, y1 = (np.ascontiguousarray(a) for a in _split(y_pts))
    z0, z1 = (np.ascontiguousarray(a) for a in _split(z_pts))
    p, innov = ctx.params, ctx.innovation
    q_lo, q_hi = ctx.cutoffs
    t, w = ctx.inner_nodes
    if use_numba is None:
        use_numba = _accel.numba_enabled()
    if use_numba and innov.family >= 0:
        out = _kernels.kernel_matrix_nb(innov.family, innov.scale, p.r1, p.r2, float(ctx.x),
                                        q_lo, q_hi, t, w, y0, y1, z0, z1)
    else:
        out = _kernels.kernel_matrix_np(innov, p.r1, p.r2, float(ctx.x), q_lo, q_hi, t, w,
                                        y0, y1, z0, z1)
    bad = ~np.isfinite(out)
    if bad.any():
        idx = np.argwhere(bad)
        raise NonFiniteEntry(f"{len(idx)} non-finite kernel entries, first at {tuple(idx[0])}", idx)
    return out
