"""Monte Carlo estimates of P(M_n <= x) and their comparison with an expansion."""
import csv
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidParameter, MismatchedThreshold, ModeMismatch
from .maxdist import cdf_at
from .model import GAUSSIAN_STATIONARY, INIT_MODES
from .simulate import RNG_DESCRIPTION, max_tallies

MIN_REPS = 1000
CSV_HEADER = ("n", "x", "p_hat", "se", "reps", "seed")


@dataclass(frozen=True)
class McEstimate:
    n: int
    x: float
    p_hat: float
    se: float
    reps: int
    seed: int


def simulate_max_cdf(params, innovation, law_mode, n_list, x_list, reps, seed, burnin=1000, workers=1):
    if reps < MIN_REPS:
        raise InvalidParameter(f"reps must be >= {MIN_REPS}, got {reps}")
    if law_mode not in INIT_MODES:
        raise InvalidParameter(f"unknown initial-law mode {law_mode!r}")
    if law_mode == GAUSSIAN_STATIONARY and innovation.name != "gaussian":
        raise ModeMismatch("exact stationary start needs Gaussian innovations")
    n_list = [int(n) for n in n_list]
    if min(n_list) < 1:
        raise InvalidParameter("n must be >= 1 for a simulated maximum")
    x_list = [float(x) for x in x_list]
    counts = max_tallies(params, innovation, law_mode, n_list, x_list, reps, seed, burnin, workers)
    out = []
    for i, n in enumerate(n_list):
        for j, x in enumerate(x_list):
            p = counts[i, j] / reps
            out.append(McEstimate(n, x, float(p), math.sqrt(p * (1 - p) / reps), int(reps), int(seed)))
    return out


@dataclass
class ComparisonRow:
    n: int
    x: float
    u_n: float
    p_hat: float
    se: float
    z: float
    flagged: bool


def compare(expansion, estimates, z_max=4.0):
    """z-scores ``(u_n - p_hat) / se`` for every estimate; ``|z| > z_max`` is flagged.

    With ``se == 0`` (``p_hat`` in {0, 1}) only exact agreement passes.
    """
    rows = []
    for est in estimates:
        if not math.isclose(est.x, expansion.x, rel_tol=1e-12, abs_tol=1e-12):
            raise MismatchedThreshold(f"estimate at x={est.x} compared with expansion at x={expansion.x}")
        u = cdf_at(expansion, est.n)
        if est.se > 0:
            z = (u - est.p_hat) / est.se
        else:
            z = 0.0 if u == est.p_hat else math.copysign(math.inf, u - est.p_hat)
        rows.append(ComparisonRow(est.n, est.x, u, est.p_hat, est.se, z, abs(z) > z_max))
    return rows


def write_csv(estimates, stream, metadata=None):
    """CSV with a fixed header; ``metadata`` lines are written first as ``# key: value``."""
    for key, value in (metadata or {}).items():
        stream.write(f"# {key}: {value}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for est in estimates:
        d = asdict(est)
        writer.writerow([d["n"], repr(d["x"]), repr(d["p_hat"]), repr(d["se"]), d["reps"], d["seed"]])


def rng_metadata():
    return {"rng": RNG_DESCRIPTION, "numpy": np.__version__}
