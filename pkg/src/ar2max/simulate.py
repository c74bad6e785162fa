"""Seeded AR(2) path simulation shared by the Monte Carlo oracle and the
empirical initial law.

Replications are split into fixed-size chunks; chunk ``i`` draws from
``PCG64(SeedSequence(seed).spawn(n_chunks)[i])``.  Results therefore depend
only on ``(seed, reps)`` and not on the number of workers or on whether the
compiled kernels are enabled.
"""
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _accel, _kernels
from .model import stationary_moments

CHUNK = 1 << 15
STEP_BLOCK = 256
RNG_DESCRIPTION = (f"numpy.random.PCG64 per chunk from SeedSequence(seed).spawn; "
                   f"chunk={CHUNK} paths, innovations drawn {STEP_BLOCK} steps at a time")


def _chunks(reps, seed):
    n_chunks = max(1, math.ceil(reps / CHUNK))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    for i, child in enumerate(children):
        size = min(CHUNK, reps - i * CHUNK)
        yield size, np.random.Generator(np.random.PCG64(child))


def _map_chunks(fn, reps, seed, workers):
    jobs = list(_chunks(reps, seed))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: fn(*job), jobs))
    return [fn(*job) for job in jobs]


def _advance(x1, x2, e, r1, r2):
    if _accel.numba_enabled():
        _kernels.advance_nb(x1, x2, e, r1, r2)
    else:
        _kernels.advance_np(x1, x2, e, r1, r2)


def _burn_in(params, innovation, size, burnin, rng):
    x1 = np.zeros(size)
    x2 = np.zeros(size)
    done = 0
    while done < burnin:
        nb = min(STEP_BLOCK, burnin - done)
        _advance(x1, x2, innovation.sample(rng, (size, nb)), params.r1, params.r2)
        done += nb
    return x1, x2


def _gaussian_start(params, size, rng):
    var_x, rho1, _ = stationary_moments(params)
    z = rng.standard_normal((size, 2))
    x1 = math.sqrt(var_x) * z[:, 0]
    x2 = math.sqrt(var_x) * (rho1 * z[:, 0] + math.sqrt(1 - rho1 * rho1) * z[:, 1])
    return x1, x2


def stationary_pairs(params, innovation, reps, burnin, seed, workers=1):
    """``reps`` draws of ``(X_0, X_{-1})`` after ``burnin`` steps from zero."""
    def run(size, rng):
        x1, x2 = _burn_in(params, innovation, size, burnin, rng)
        return np.column_stack([x1, x2])

    return np.concatenate(_map_chunks(run, int(reps), seed, workers))


def max_tallies(params, innovation, law_mode, n_list, x_list, reps, seed, burnin=1000, workers=1):
    """Counts of ``M_n <= x`` over ``reps`` paths, shape ``(len(n_list), len(x_list))``.

    Each path starts from the stationary law (exact bivariate normal for
    ``gaussian-stationary``, ``burnin`` steps from zero otherwise) and is run
    once to ``max(n_list)`` steps; all cells share the same paths.
    """
    from .model import GAUSSIAN_STATIONARY

    n_arr = np.asarray(n_list, dtype=np.int64)
    thresholds = np.ascontiguousarray(np.asarray(x_list, dtype=float))
    n_max = int(n_arr.max())
    slot = np.full(n_max, -1, dtype=np.int64)
    slot[n_arr - 1] = np.arange(n_arr.size)
    r1, r2 = params.r1, params.r2

    def run(size, rng):
        if law_mode == GAUSSIAN_STATIONARY:
            x1, x2 = _gaussian_start(params, size, rng)
        else:
            x1, x2 = _burn_in(params, innovation, size, burnin, rng)
        runmax = np.full(size, -np.inf)
        counts = np.zeros((n_arr.size, thresholds.size), dtype=np.int64)
        done = 0
        while done < n_max:
            nb = min(STEP_BLOCK, n_max - done)
            e = innovation.sample(rng, (size, nb))
            sl = np.ascontiguousarray(slot[done:done + nb])
            if _accel.numba_enabled():
                _kernels.tally_nb(x1, x2, runmax, e, r1, r2, sl, thresholds, counts)
            else:
                _kernels.tally_np(x1, x2, runmax, e, r1, r2, sl, thresholds, counts)
            done += nb
        return counts

    return sum(_map_chunks(run, int(reps), seed, workers))
