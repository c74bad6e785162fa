"""Self-checks shared by ``ar2max validate`` and the test-suite.

Each check returns a :class:`CheckResult` with the measured discrepancy so a
report can point at the layer that broke (kernel, linear algebra, or the
discretization as seen by Monte Carlo).
"""
from dataclasses import asdict, dataclass

import numpy as np

from .kernel import gamma, kernel_K
from .maxdist import build_expansion, cdf_at, cdf_direct
from .model import stationary_moments
from .mc import compare, simulate_max_cdf

PASS, FAIL, SKIP = "pass", "fail", "skipped"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    measured: float
    tolerance: float
    detail: str = ""

    @property
    def ok(self):
        return self.status != FAIL

    def as_dict(self):
        return asdict(self)


def random_kernel_points(ctx, count, seed=0):
    """Random (y, z) pairs spread over the part of the plane where K is not negligible."""
    rng = np.random.default_rng(seed)
    sx = float(np.sqrt(stationary_moments(ctx.params)[0])) * ctx.innovation.std / ctx.params.sigma_e
    y = rng.uniform(-3 * sx, ctx.x + 2 * sx, size=(count, 2))
    z = rng.uniform(-4 * sx, 4 * sx, size=(count, 2))
    return y, z


def kernel_fd_errors(ctx, count=200, h=1e-4, seed=0):
    """Scaled residual ``|K + d gamma / d z1| / (1 + |K|)`` at random pairs."""
    y, z = random_kernel_points(ctx, count, seed)
    step = np.array([0.0, h])
    k = kernel_K(y, z, ctx)
    dg = (gamma(y, z + step, ctx) - gamma(y, z - step, ctx)) / (2 * h)
    return np.abs(k + dg) / (1 + np.abs(k)), k


def check_kernel(ctx, count=200, h=1e-4, tol=1e-5, seed=0):
    err, _ = kernel_fd_errors(ctx, count, h, seed)
    worst = float(err.max())
    return CheckResult("kernel_fd", PASS if worst <= tol else FAIL, worst, tol,
                       f"{count} random pairs, central difference h={h:g}")


def spectral_direct_gap(params, innovation, law, disc, n_max=20):
    exp = build_expansion(params, innovation, law, disc.ctx.x, J="all", disc=disc)
    ns = list(range(n_max + 1))
    direct = cdf_direct(params, innovation, law, disc.ctx.x, ns, disc=disc)
    spectral = np.array([cdf_at(exp, n) for n in ns])
    return np.abs(spectral - direct), exp


def check_identity(params, innovation, law, disc, n_max=20, tol=1e-8):
    gap, _ = spectral_direct_gap(params, innovation, law, disc, n_max)
    worst = float(gap.max())
    return CheckResult("spectral_direct", PASS if worst <= tol else FAIL, worst, tol,
                       f"n=0..{n_max}, full spectrum, m={disc.grid.m}")


def check_monte_carlo(params, innovation, law_mode, exp, n_list, reps, seed, burnin=1000, z_max=4.0, workers=1):
    if reps <= 0:
        return CheckResult("monte_carlo", SKIP, float("nan"), z_max, "reps=0"), []
    est = simulate_max_cdf(params, innovation, law_mode, n_list, [exp.x], reps, seed, burnin, workers)
    rows = compare(exp, est, z_max)
    worst = max(abs(r.z) for r in rows)
    status = FAIL if any(r.flagged for r in rows) else PASS
    return CheckResult("monte_carlo", status, float(worst), z_max,
                       f"max |z| over n={list(n_list)}, reps={reps}"), rows
