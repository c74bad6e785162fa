"""Hot loops: kernel matrix assembly and AR(2) path stepping.

Every routine has a compiled version (suffix ``_nb``) and a vectorised numpy
version (suffix ``_np``).  The two must agree to rounding; the path kernels
agree bitwise because the innovations are always drawn outside the kernel.

Innovation families understood by the compiled code: 0 = Gaussian, 1 = logistic,
each parameterised by a single scale.  Any other innovation model goes through
the numpy path with its own callables.
"""
import math

import numpy as np

from ._accel import njit

GAUSSIAN = 0
LOGISTIC = 1

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


@njit
def _pdf(fam, s, t):
    if fam == GAUSSIAN:
        u = t / s
        return math.exp(-0.5 * u * u) * _INV_SQRT_2PI / s
    e = math.exp(-abs(t) / s)
    return e / ((1.0 + e) * (1.0 + e) * s)


@njit
def _cdf(fam, s, t):
    if fam == GAUSSIAN:
        return 0.5 * math.erfc(-t / (s * _SQRT2))
    u = t / s
    if u >= 0.0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


@njit
def _dpdf(fam, s, t):
    if fam == GAUSSIAN:
        return -t / (s * s) * _pdf(fam, s, t)
    return -math.tanh(0.5 * t / s) * _pdf(fam, s, t) / s


@njit
def _kernel_entry(fam, s, r1, r2, y0x, y1x, z0, z1, qlo, qhi, gl_t, gl_w):
    a = r1 * r1 + r2
    delta = y0x - r1 * y1x - r2 * z0
    alpha2 = y1x - r1 * z0 - r2 * z1
    cc = y0x - r1 * r2 * z1 - a * z0
    # w0 > delta, and both w0 and c = (cc - w0)/r1 inside the innovation's bulk
    lo = max(delta, qlo, cc - r1 * qhi)
    hi = min(qhi, cc - r1 * qlo)
    inner = 0.0
    if hi > lo:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        for k in range(gl_t.shape[0]):
            w0 = mid + half * gl_t[k]
            inner += gl_w[k] * _dpdf(fam, s, (cc - w0) / r1) * _pdf(fam, s, w0)
        inner *= half
    return (a / r1) * r2 * inner + r1 * r2 * _cdf(fam, s, delta) * _dpdf(fam, s, alpha2)


@njit
def kernel_matrix_nb(fam, s, r1, r2, x, qlo, qhi, gl_t, gl_w, y0, y1, z0, z1):
    ny = y0.shape[0]
    nz = z0.shape[0]
    out = np.empty((ny, nz))
    for i in range(ny):
        y0x = min(y0[i], x)
        y1x = min(y1[i], x)
        for j in range(nz):
            out[i, j] = _kernel_entry(fam, s, r1, r2, y0x, y1x, z0[j], z1[j], qlo, qhi, gl_t, gl_w)
    return out


def _inner_interval(delta, cc, r1, qlo, qhi):
    lo = np.maximum(np.maximum(delta, qlo), cc - r1 * qhi)
    hi = np.minimum(qhi, cc - r1 * qlo)
    return lo, np.maximum(hi, lo)


def kernel_values_np(innov, r1, r2, y0x, y1x, z0, z1, qlo, qhi, gl_t, gl_w):
    """Elementwise kernel for broadcastable, already clipped ``y`` arrays."""
    a = r1 * r1 + r2
    delta = y0x - r1 * y1x - r2 * z0
    alpha2 = y1x - r1 * z0 - r2 * z1
    cc = y0x - r1 * r2 * z1 - a * z0
    lo, hi = _inner_interval(delta, cc, r1, qlo, qhi)
    half = 0.5 * (hi - lo)
    w0 = (0.5 * (hi + lo))[..., None] + half[..., None] * gl_t
    vals = innov.pdf_deriv((cc[..., None] - w0) / r1) * innov.pdf(w0)
    inner = half * (vals @ gl_w)
    return (a / r1) * r2 * inner + r1 * r2 * innov.cdf(delta) * innov.pdf_deriv(alpha2)


def gamma_values_np(innov, r1, r2, y0x, y1x, z0, z1, qlo, qhi, gl_t, gl_w):
    """Elementwise gamma function whose negative z1-derivative is the kernel."""
    a = r1 * r1 + r2
    delta = y0x - r1 * y1x - r2 * z0
    alpha2 = y1x - r1 * z0 - r2 * z1
    cc = y0x - r1 * r2 * z1 - a * z0
    lo, hi = _inner_interval(delta, cc, r1, qlo, qhi)
    half = 0.5 * (hi - lo)
    w0 = (0.5 * (hi + lo))[..., None] + half[..., None] * gl_t
    inner = half * ((innov.pdf((cc[..., None] - w0) / r1) * innov.pdf(w0)) @ gl_w)
    return (a / r1) * inner + r1 * innov.pdf(alpha2) * innov.cdf(delta)


def kernel_matrix_np(innov, r1, r2, x, qlo, qhi, gl_t, gl_w, y0, y1, z0, z1, block=None):
    ny, nz = y0.shape[0], z0.shape[0]
    if block is None:
        # keep the (block, nz, inner) temporaries around 64 MB
        block = max(1, int(8e6 // max(1, nz * gl_t.shape[0])))
    out = np.empty((ny, nz))
    y0x = np.minimum(y0, x)
    y1x = np.minimum(y1, x)
    for start in range(0, ny, block):
        sl = slice(start, start + block)
        out[sl] = kernel_values_np(innov, r1, r2, y0x[sl, None], y1x[sl, None],
                                   z0[None, :], z1[None, :], qlo, qhi, gl_t, gl_w)
    return out


# --- AR(2) paths -------------------------------------------------------------
# x1 holds the latest value X_t, x2 the one before it, one entry per path.


@njit
def advance_nb(x1, x2, e, r1, r2):
    for p in range(e.shape[0]):
        a = x1[p]
        b = x2[p]
        for t in range(e.shape[1]):
            xn = e[p, t] + r1 * a + r2 * b
            b = a
            a = xn
        x1[p] = a
        x2[p] = b


def advance_np(x1, x2, e, r1, r2):
    a = x1.copy()
    b = x2.copy()
    for t in range(e.shape[1]):
        xn = e[:, t] + r1 * a + r2 * b
        b = a
        a = xn
    x1[:] = a
    x2[:] = b


@njit
def tally_nb(x1, x2, runmax, e, r1, r2, slot, thresholds, counts):
    """Advance paths and count ``running max <= threshold`` at marked steps.

    ``slot[t]`` is the row of ``counts`` to update after step ``t`` (or -1).
    """
    nx = thresholds.shape[0]
    for p in range(e.shape[0]):
        a = x1[p]
        b = x2[p]
        mx = runmax[p]
        for t in range(e.shape[1]):
            xn = e[p, t] + r1 * a + r2 * b
            b = a
            a = xn
            if xn > mx:
                mx = xn
            k = slot[t]
            if k >= 0:
                for j in range(nx):
                    if mx <= thresholds[j]:
                        counts[k, j] += 1
        x1[p] = a
        x2[p] = b
        runmax[p] = mx


def tally_np(x1, x2, runmax, e, r1, r2, slot, thresholds, counts):
    a = x1.copy()
    b = x2.copy()
    mx = runmax.copy()
    for t in range(e.shape[1]):
        xn = e[:, t] + r1 * a + r2 * b
        b = a
        a = xn
        np.maximum(mx, xn, out=mx)
        k = slot[t]
        if k >= 0:
            counts[k] += (mx[:, None] <= thresholds[None, :]).sum(axis=0)
    x1[:] = a
    x2[:] = b
    runmax[:] = mx
