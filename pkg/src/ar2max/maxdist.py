"""P(M_n <= x) from the spectral expansion and by direct operator iteration.

With ``u_n = P(M_n <= x)``, ``u_0 = 1`` and ``u_1 = H(x, inf)``.  For k >= 1

    u_{2k}   = [K^k H](inf)   = sum_j r_j(inf) B_j(H)  lambda_j^k,
    u_{2k+1} = [K^k G1](inf)  = sum_j r_j(inf) B_j(G1) lambda_j^k,

where ``G1(y) = H(min(y0, x), y1)`` is the law of ``(X_1, X_0)`` on ``{M_1 <= x}``.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ComplexLeadingEigenvalue, ImaginaryResidueTooLarge, InvalidParameter
from .kernel import KernelContext
from .model import clipped_initial
from .quadrature import tensor_grid, truncation_box
from .spectral import build_operator, eig, require_conditioned, weighted_projections

IMAG_TOL = 1e-10
J_CAP = 50
J_TOL = 1e-10


@dataclass(frozen=True)
class MaxCdfExpansion:
    x: float
    lam: np.ndarray
    c_even: np.ndarray  # r_j(inf) B_j(H)
    c_odd: np.ndarray  # r_j(inf) B_j(G1)
    b0: float  # H(x, inf) = u_1
    M: int
    lam_c_even: np.ndarray  # lambda_j c_even_j, used for evaluation
    lam_c_odd: np.ndarray
    grid: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def B_H(self):
        return complex(self.c_even[: self.M].sum())

    @property
    def B_G1(self):
        return complex(self.c_odd[: self.M].sum())

    def to_json(self):
        def cpx(a):
            return [{"re": float(v.real), "im": float(v.imag)} for v in np.asarray(a, dtype=complex)]

        return {
            "x": float(self.x),
            "lambda": cpx(self.lam),
            "c_even": cpx(self.c_even),
            "c_odd": cpx(self.c_odd),
            "lambda_c_even": cpx(self.lam_c_even),
            "lambda_c_odd": cpx(self.lam_c_odd),
            "b0": float(self.b0),
            "M": int(self.M),
            "grid": self.grid,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_json(cls, data):
        def cpx(key):
            return np.array([complex(v["re"], v["im"]) for v in data[key]])

        lam = cpx("lambda")
        c_even, c_odd = cpx("c_even"), cpx("c_odd")
        lce = cpx("lambda_c_even") if "lambda_c_even" in data else lam * c_even
        lco = cpx("lambda_c_odd") if "lambda_c_odd" in data else lam * c_odd
        return cls(float(data["x"]), lam, c_even, c_odd, float(data["b0"]), int(data["M"]),
                   lce, lco, data.get("grid", {}), data.get("diagnostics", {}))


@dataclass
class Discretization:
    """Context, grid and operator for one threshold (shared by both evaluators)."""

    ctx: KernelContext
    grid: object
    op: object


def discretize(params, innovation, x, m=40, eps=1e-8, inner_rule=32, max_points=10_000):
    ctx = KernelContext(params, innovation, float(x), inner_rule, eps)
    grid = tensor_grid(m, truncation_box(innovation, params, float(x), eps), max_points=max_points)
    return Discretization(ctx, grid, build_operator(ctx, grid))


def _default_J(lam, pe, po):
    """Smallest J (capped) whose truncated u_2 and u_3 are within J_TOL of the
    full sums, extended so that conjugate pairs are never split."""
    full_e, full_o = pe.sum(), po.sum()
    err = np.maximum(np.abs(full_e - np.cumsum(pe)), np.abs(full_o - np.cumsum(po)))
    ok = np.flatnonzero(err < J_TOL)
    J = int(ok[0]) + 1 if ok.size else lam.size
    J = min(J, J_CAP, lam.size)
    return _complete_pairs(lam, J)


def _complete_pairs(lam, J):
    if 0 < J < lam.size and abs(lam[J - 1].imag) > 0 and np.isclose(lam[J], lam[J - 1].conjugate(), rtol=1e-12, atol=0):
        J += 1
    return J


def build_expansion(params, innovation, law, x, m=40, J=None, eps=1e-8, inner_rule=32, disc=None):
    """Spectral expansion of ``u_n`` at threshold ``x``.

    ``J=None`` picks the truncation automatically (at most 50 terms, plus a
    conjugate partner); ``J="all"`` keeps every non-trivial eigenpair.
    """
    if disc is None:
        disc = discretize(params, innovation, x, m, eps, inner_rule)
    op, grid = disc.op, disc.grid
    spec = eig(op, cond_limit=None)
    g1_fn, _ = clipped_initial(law, float(x))
    h_vals = np.asarray(law(grid.z0, grid.z1), dtype=float)
    g1_vals = np.asarray(g1_fn(grid.z0, grid.z1), dtype=float)
    pe = weighted_projections(spec, op, h_vals)
    po = weighted_projections(spec, op, g1_vals)
    lam = spec.eigenvalues

    if J is None:
        J = _default_J(lam, pe, po)
    elif J == "all":
        J = lam.size
    else:
        J = _complete_pairs(lam, max(1, min(int(J), lam.size)))

    cond = require_conditioned(spec, J)
    with np.errstate(divide="ignore", invalid="ignore"):
        c_even = np.where(lam != 0, pe / lam, 0)
        c_odd = np.where(lam != 0, po / lam, 0)
    a1_direct = float(np.sum(op.weights * op.row_at_inf * h_vals))
    a1_trunc = pe[:J].sum()
    if abs(a1_trunc - a1_direct) > 1e-6:
        warnings.warn(f"truncated expansion with J={J} misses u_2 by {abs(a1_trunc - a1_direct):.2e}; "
                      "increase J", RuntimeWarning, stacklevel=2)

    M = spec.leading_multiplicity() if J else 0
    resolved_J = min(spec.n_resolved, J)
    diagnostics = {
        "J": int(J),
        "n_eigen": int(lam.size),
        "n_resolved": int(spec.n_resolved),
        "cond_retained": cond,
        "cond_all": spec.cond_all,
        "max_residual": float(spec.residuals[:J].max()),
        "biorthonormality_defect": spec.biorthonormality_defect(resolved_J),
        "u2_direct": a1_direct,
        "u2_truncation_error": float(abs(a1_trunc - a1_direct)),
        "nodes": int(grid.size),
        "classes": int(op.n_classes),
    }
    return MaxCdfExpansion(
        x=float(x), lam=lam[:J].copy(), c_even=c_even[:J], c_odd=c_odd[:J],
        b0=float(law.marginal(float(x))), M=M,
        lam_c_even=pe[:J].copy(), lam_c_odd=po[:J].copy(),
        grid={"m": int(grid.m), "box": grid.box.as_dict()},
        diagnostics=diagnostics,
    )


def _check_imag(value, n):
    if abs(value.imag) >= IMAG_TOL * max(1.0, abs(value.real)):
        raise ImaginaryResidueTooLarge(f"u_{n} has imaginary part {value.imag:.3e}")


def cdf_complex(exp, n):
    """Un-rounded complex value of the expansion at ``n`` (n >= 2)."""
    k = n // 2
    weights = exp.lam_c_even if n % 2 == 0 else exp.lam_c_odd
    return complex(np.sum(weights * exp.lam ** (k - 1)))


def cdf_at(exp, n, clamp=False):
    """``u_n = P(M_n <= x)``; raw by default, clamped to [0, 1] on request."""
    n = int(n)
    if n < 0:
        raise InvalidParameter(f"n must be >= 0, got {n}")
    if n == 0:
        value = 1.0
    elif n == 1:
        value = exp.b0
    else:
        z = cdf_complex(exp, n)
        _check_imag(z, n)
        value = z.real
    return min(max(value, 0.0), 1.0) if clamp else value


def cdf_values(exp, ns, clamp=False):
    return np.array([cdf_at(exp, n, clamp) for n in ns])


def cdf_direct(params, innovation, law, x, n, grid=None, m=40, eps=1e-8, inner_rule=32, disc=None):
    """``u_n`` by repeated application of the Nystrom matrix (no eigenvectors).

    ``n`` may be an int or a sequence; the chains are iterated once up to the
    largest requested ``n``.
    """
    if disc is None:
        if grid is None:
            disc = discretize(params, innovation, x, m, eps, inner_rule)
        else:
            ctx = KernelContext(params, innovation, float(x), inner_rule, eps)
            disc = Discretization(ctx, grid, build_operator(ctx, grid))
    op, grid = disc.op, disc.grid
    scalar = np.isscalar(n)
    ns = [int(v) for v in np.atleast_1d(n)]
    g1_fn, _ = clipped_initial(law, float(x))
    wk = op.weights * op.row_at_inf
    chains = {0: np.asarray(law(grid.z0, grid.z1), dtype=float),
              1: np.asarray(g1_fn(grid.z0, grid.z1), dtype=float)}
    k_max = max([v // 2 for v in ns] + [1])
    values = {0: [None], 1: [None]}
    for parity, v in chains.items():
        for _ in range(k_max):
            values[parity].append(float(wk @ v))
            v = op.apply(v)
    out = []
    for v in ns:
        if v < 0:
            raise InvalidParameter(f"n must be >= 0, got {v}")
        if v == 0:
            out.append(1.0)
        elif v == 1:
            out.append(float(law.marginal(float(x))))
        else:
            out.append(values[v % 2][v // 2])
    return out[0] if scalar else np.array(out)


@dataclass(frozen=True)
class DecayLaw:
    lambda1: float
    B_H: float
    B_G1: float
    M: int


def decay_law(exp, tol=1e-10):
    """Leading eigenvalue and the weights of ``u_2n ~ B(H) lambda_1^n``."""
    lam1 = exp.lam[0]
    if abs(lam1.imag) > tol:
        raise ComplexLeadingEigenvalue(
            f"leading eigenvalue {lam1:.6g} is complex; the pair {lam1:.6g}, {lam1.conjugate():.6g} "
            "dominates jointly", pair=(lam1, lam1.conjugate()))
    return DecayLaw(float(lam1.real), float(exp.B_H.real), float(exp.B_G1.real), int(exp.M))


def ratio_settles(exp, lambda1, tol=1e-3, n_max=500):
    """Smallest n with ``|u_{2(n+1)} / u_{2n} - lambda_1| < tol`` (None if not by n_max)."""
    prev = cdf_at(exp, 2)
    for n in range(1, n_max + 1):
        nxt = cdf_at(exp, 2 * n + 2)
        if prev != 0 and abs(nxt / prev - lambda1) < tol:
            return n
        prev = nxt
    return None


def log_slope(exp, n_lo=30, n_hi=100):
    """Least-squares slope of ``log u_{2n}`` against n on ``[n_lo, n_hi]``."""
    ns = np.arange(n_lo, n_hi + 1)
    logs = np.log([cdf_at(exp, 2 * n) for n in ns])
    return float(np.polyfit(ns, logs, 1)[0])


def is_finite_expansion(exp):
    return all(math.isfinite(abs(v)) for v in np.concatenate([exp.lam, exp.c_even, exp.c_odd]))
