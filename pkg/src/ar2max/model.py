"""AR(2) parameters, innovation laws and the joint law of the initial state.

The process is ``X_i = e_i + r1 X_{i-1} + r2 X_{i-2}`` with i.i.d. innovations
``e_i``.  The initial law ``H(y0, y1) = P(X_0 <= y0, X_{-1} <= y1)`` is taken to
be the stationary one.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from . import _kernels
from .errors import InvalidParameter, ModeMismatch, NonStationary, SignConditionViolated
from .quadrature import gauss_legendre_1d

GAUSSIAN_STATIONARY = "gaussian-stationary"
EMPIRICAL_BURNIN = "empirical-burnin"
INIT_MODES = (GAUSSIAN_STATIONARY, EMPIRICAL_BURNIN)


@dataclass(frozen=True)
class ARParams:
    r1: float
    r2: float
    sigma_e: float = 1.0


def validate_params(r1, r2, sigma_e=1.0):
    """Check the coefficients and return an :class:`ARParams`.

    ``r1 > 0`` and ``r1**2 + r2 > 0`` are needed for the max recursion to be
    expressed through a single kernel; stationarity is needed for ``H``.
    """
    r1, r2, sigma_e = float(r1), float(r2), float(sigma_e)
    if not all(math.isfinite(v) for v in (r1, r2, sigma_e)):
        raise InvalidParameter(f"parameters must be finite, got r1={r1}, r2={r2}, sigma_e={sigma_e}")
    if sigma_e <= 0:
        raise InvalidParameter(f"sigma_e must be positive, got {sigma_e}")
    if r1 <= 0 or r1 * r1 + r2 <= 0:
        raise SignConditionViolated(
            f"sign condition r1 > 0 and r1^2 + r2 > 0 violated (r1={r1}, r2={r2})")
    if not (r1 + r2 < 1 and r2 - r1 < 1 and abs(r2) < 1):
        raise NonStationary(
            f"(r1, r2) = ({r1}, {r2}) lies outside the stationarity triangle; "
            "no stationary initial law exists")
    return ARParams(r1, r2, sigma_e)


@dataclass(frozen=True)
class InnovationModel:
    """A smooth innovation law with its density and density derivative.

    ``family`` selects the compiled kernel implementation (see ``_kernels``);
    a negative value means only the Python callables are available.
    """

    name: str
    scale: float
    cdf: Callable
    pdf: Callable
    pdf_deriv: Callable
    sampler: Callable  # (numpy Generator, size) -> ndarray
    tail_quantile: Callable
    variance: float
    family: int = -1

    def sample(self, rng, size):
        return self.sampler(rng, size)

    @property
    def std(self):
        return math.sqrt(self.variance)


def gaussian_innovation(sigma_e=1.0):
    s = float(sigma_e)
    if not s > 0:
        raise InvalidParameter(f"sigma_e must be positive, got {sigma_e}")
    c = 1.0 / (s * math.sqrt(2.0 * math.pi))

    def pdf(t):
        u = np.asarray(t, dtype=float) / s
        return c * np.exp(-0.5 * u * u)

    def pdf_deriv(t):
        t = np.asarray(t, dtype=float)
        return -t / (s * s) * pdf(t)

    return InnovationModel(
        name="gaussian",
        scale=s,
        cdf=lambda t: special.ndtr(np.asarray(t, dtype=float) / s),
        pdf=pdf,
        pdf_deriv=pdf_deriv,
        sampler=lambda rng, size: rng.normal(0.0, s, size),
        tail_quantile=lambda p: s * float(special.ndtri(p)),
        variance=s * s,
        family=_kernels.GAUSSIAN,
    )


def logistic_innovation(scale_s=1.0):
    s = float(scale_s)
    if not s > 0:
        raise InvalidParameter(f"scale_s must be positive, got {scale_s}")

    def pdf(t):
        e = np.exp(-np.abs(np.asarray(t, dtype=float)) / s)
        return e / ((1.0 + e) ** 2 * s)

    def pdf_deriv(t):
        t = np.asarray(t, dtype=float)
        return -np.tanh(0.5 * t / s) * pdf(t) / s

    return InnovationModel(
        name="logistic",
        scale=s,
        cdf=lambda t: special.expit(np.asarray(t, dtype=float) / s),
        pdf=pdf,
        pdf_deriv=pdf_deriv,
        sampler=lambda rng, size: rng.logistic(0.0, s, size),
        tail_quantile=lambda p: s * float(special.logit(p)),
        variance=(math.pi * s) ** 2 / 3.0,
        family=_kernels.LOGISTIC,
    )


def logistic_scale_for_sd(sd):
    """Logistic scale ``s`` giving standard deviation ``sd``."""
    return sd * math.sqrt(3.0) / math.pi


def make_innovation(name, sigma_e):
    """Innovation law by name, parameterised by its standard deviation."""
    if name == "gaussian":
        return gaussian_innovation(sigma_e)
    if name == "logistic":
        return logistic_innovation(logistic_scale_for_sd(sigma_e))
    raise InvalidParameter(f"unknown innovation law {name!r} (expected 'gaussian' or 'logistic')")


def stationary_moments(params):
    """Stationary variance and lag-1/lag-2 autocorrelations (Yule-Walker)."""
    r1, r2 = params.r1, params.r2
    var_x = params.sigma_e ** 2 * (1 - r2) / ((1 + r2) * ((1 - r2) ** 2 - r1 ** 2))
    rho1 = r1 / (1 - r2)
    rho2 = r2 + r1 * rho1
    return var_x, rho1, rho2


def bivariate_normal_cdf(y0, y1, variance, rho, nodes=64, cutoff=8.5):
    """P(U <= y0, V <= y1) for a centred normal pair with common variance.

    Integrates the conditional normal CDF of U given V = sigma*t against the
    standard normal density of t with an ``nodes``-point Gauss-Legendre rule on
    the part of the t-range where the integrand is not negligible.
    """
    y0, y1 = np.broadcast_arrays(np.asarray(y0, dtype=float), np.asarray(y1, dtype=float))
    sig = math.sqrt(variance)
    cs = math.sqrt(1.0 - rho * rho)
    a = y0 / sig
    b = y1 / sig
    # conditional argument (a - rho t)/cs leaves [-cutoff, cutoff] outside [t_a, t_b]
    with np.errstate(invalid="ignore", over="ignore"):
        if rho > 0:
            t_a = (a - cutoff * cs) / rho
            t_b = (a + cutoff * cs) / rho
        elif rho < 0:
            t_a = (a + cutoff * cs) / rho
            t_b = (a - cutoff * cs) / rho
        else:
            return special.ndtr(a) * special.ndtr(b)
    hi = np.minimum(np.minimum(b, t_b), cutoff)
    lo = np.maximum(t_a, -cutoff)
    lo = np.where(np.isnan(lo), -cutoff, lo)
    hi = np.where(np.isnan(hi), cutoff, hi)
    width = np.maximum(hi - lo, 0.0)
    tn, tw = gauss_legendre_1d(nodes, -1.0, 1.0)
    t = lo[..., None] + 0.5 * width[..., None] * (tn + 1.0)
    with np.errstate(invalid="ignore"):  # infinite arguments are patched below
        integrand = special.ndtr((a[..., None] - rho * t) / cs) * np.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)
    out = 0.5 * width * (integrand @ tw)
    if rho > 0:
        # below t_a the conditional CDF is 1
        out = out + special.ndtr(np.minimum(np.maximum(t_a, -cutoff), b)) - special.ndtr(-cutoff)
    elif rho < 0:
        # above t_b the conditional CDF is 1
        start = np.maximum(t_b, -cutoff)
        out = out + np.maximum(special.ndtr(b) - special.ndtr(start), 0.0)
    out = np.where(np.isposinf(y0), special.ndtr(b), out)
    out = np.where(np.isposinf(y1), special.ndtr(a), out)
    out = np.where(np.isneginf(y0) | np.isneginf(y1), 0.0, out)
    return np.clip(out, 0.0, 1.0)


class EmpiricalJointCdf:
    """Plain empirical CDF of a sample of pairs, vectorised over query points."""

    def __init__(self, samples, max_cells=4_000_000):
        samples = np.asarray(samples, dtype=float)
        self.s0 = samples[:, 0].copy()
        self.s1 = samples[:, 1].copy()
        self.size = samples.shape[0]
        self.max_cells = max_cells

    def __call__(self, y0, y1):
        y0, y1 = np.broadcast_arrays(np.asarray(y0, dtype=float), np.asarray(y1, dtype=float))
        flat0, flat1 = y0.ravel(), y1.ravel()
        out = np.empty(flat0.shape[0])
        # Chunk so the cumulative count table stays bounded.
        step = max(1, int(math.sqrt(self.max_cells)))
        for start in range(0, flat0.shape[0], step):
            sl = slice(start, start + step)
            out[sl] = self._eval(flat0[sl], flat1[sl])
        return out.reshape(y0.shape)

    def _eval(self, q0, q1):
        u0, i0 = np.unique(q0, return_inverse=True)
        u1, i1 = np.unique(q1, return_inverse=True)
        # sample counts towards every query with u0 >= s0 and u1 >= s1
        a = np.searchsorted(u0, self.s0, side="left")
        b = np.searchsorted(u1, self.s1, side="left")
        shape = (u0.shape[0] + 1, u1.shape[0] + 1)
        table = np.bincount(a * shape[1] + b, minlength=shape[0] * shape[1]).reshape(shape)
        cum = table.cumsum(axis=0).cumsum(axis=1)
        return cum[i0.ravel(), i1.ravel()] / self.size


@dataclass(frozen=True)
class InitialLaw:
    joint_cdf: Callable
    mode: str
    variance: Optional[float] = None
    correlation: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __call__(self, y0, y1):
        return self.joint_cdf(y0, y1)

    def marginal(self, y0):
        """P(X_0 <= y0)."""
        return self.joint_cdf(y0, np.inf)


def initial_law(params, innovation, mode=GAUSSIAN_STATIONARY, burnin_steps=1000, reps=10**6, seed=0):
    """Stationary joint law of ``(X_0, X_{-1})``.

    ``gaussian-stationary`` is exact but only valid for Gaussian innovations.
    ``empirical-burnin`` simulates ``reps`` paths started at zero, runs
    ``burnin_steps`` steps and uses the empirical CDF of the last two values.
    """
    var_x, rho1, _ = stationary_moments(params)
    if mode == GAUSSIAN_STATIONARY:
        if innovation.name != "gaussian":
            raise ModeMismatch(
                f"mode {GAUSSIAN_STATIONARY!r} needs Gaussian innovations, got {innovation.name!r}")
        return InitialLaw(
            joint_cdf=lambda y0, y1: bivariate_normal_cdf(y0, y1, var_x, rho1),
            mode=mode, variance=var_x, correlation=rho1)
    if mode == EMPIRICAL_BURNIN:
        from .simulate import stationary_pairs

        pairs = stationary_pairs(params, innovation, reps, burnin_steps, seed)
        return InitialLaw(
            joint_cdf=EmpiricalJointCdf(pairs), mode=mode, variance=var_x, correlation=rho1,
            meta={"burnin_steps": int(burnin_steps), "reps": int(reps), "seed": int(seed)})
    raise InvalidParameter(f"unknown initial-law mode {mode!r}; expected one of {INIT_MODES}")


def clipped_initial(law, x):
    """The clipped laws ``G1(y) = H(min(y0,x), y1)`` and ``G2(y) = H(min(y0,x), min(y1,x))``."""

    def g1(y0, y1):
        return law(np.minimum(y0, x), y1)

    def g2(y0, y1):
        return law(np.minimum(y0, x), np.minimum(y1, x))

    return g1, g2
