"""Nystrom discretisation of the kernel operator and its eigen-decomposition.

The Nystrom matrix is ``A[i, j] = w_j K(z_i, z_j)``.  Because ``K(y, z)`` only
sees ``y`` through ``min(y, x)``, every node beyond the threshold repeats the
row of its clipped representative, so ``A = E R`` with ``E`` the 0/1 matrix
mapping nodes to clipping classes and ``R`` the distinct rows.  All non-zero
eigenpairs of ``A`` come from the small matrix ``R E``; the remaining
eigenvalues are exact zeros whose components never reach ``K^n G`` at
``y = inf``.  Working with ``R E`` is what keeps the eigenvector matrix
invertible.
"""
import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg
from scipy import sparse

from .errors import DefectiveOrIllConditioned, EigenvalueNearZero, NonFiniteEntry
from .kernel import kernel_matrix

COND_LIMIT = 1e10
# eigenvalues below this fraction of |lambda_1| are treated as numerical zeros
RESOLVED_REL = 1e-12


@dataclass
class DiscreteOperator:
    class_rows: np.ndarray  # (nc, r): w_j K(rep_c, z_j)
    weights: np.ndarray
    row_at_inf: np.ndarray  # K((x, x), z_j), unweighted
    classes: np.ndarray  # node -> class
    corner: Optional[int] = None  # class whose representative is (x, x)
    grid: object = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_matrix(cls, matrix, weights=None, row_at_inf=None):
        """Operator with every node its own class (toy problems, tests)."""
        matrix = np.asarray(matrix, dtype=float)
        r = matrix.shape[0]
        weights = np.ones(r) if weights is None else np.asarray(weights, dtype=float)
        row_at_inf = np.zeros(r) if row_at_inf is None else np.asarray(row_at_inf, dtype=float)
        return cls(matrix, weights, row_at_inf, np.arange(r))

    @property
    def size(self):
        return self.weights.shape[0]

    @property
    def n_classes(self):
        return self.class_rows.shape[0]

    @cached_property
    def matrix(self):
        return self.class_rows[self.classes]

    @cached_property
    def class_counts(self):
        return np.bincount(self.classes, minlength=self.n_classes)

    def reduced_matrix(self):
        """``R E``: column sums of the class rows over each class."""
        r = self.size
        E = sparse.csr_matrix((np.ones(r), (np.arange(r), self.classes)), shape=(r, self.n_classes))
        return np.asarray((E.T @ self.class_rows.T).T)

    def apply(self, v):
        """``A v`` without forming ``A``."""
        return (self.class_rows @ v)[self.classes]

    def symmetrized(self):
        """``D^(1/2) K D^(1/2)``, similar to ``A = K D`` with ``D = diag(w)``."""
        s = np.sqrt(self.weights)
        return self.matrix * (s[:, None] / s[None, :])


def clip_classes(nodes, x):
    clipped = np.minimum(np.asarray(nodes, dtype=float), x)
    uniq, first, inverse = np.unique(clipped, axis=0, return_index=True, return_inverse=True)
    corner = np.flatnonzero((uniq[:, 0] == x) & (uniq[:, 1] == x))
    return first, inverse.ravel(), (int(corner[0]) if corner.size else None)


def build_operator(ctx, grid, use_numba=None):
    reps, classes, corner = clip_classes(grid.nodes, ctx.x)
    rows = kernel_matrix(ctx, grid.nodes[reps], grid.nodes, use_numba=use_numba)
    k_inf = kernel_matrix(ctx, np.array([[ctx.x, ctx.x]]), grid.nodes, use_numba=use_numba)[0]
    class_rows = rows * grid.weights[None, :]
    if not np.all(np.isfinite(class_rows)):
        raise NonFiniteEntry("non-finite weighted kernel entries", np.argwhere(~np.isfinite(class_rows)))
    meta = {"x": float(ctx.x), "innovation": ctx.innovation.name, "scale": ctx.innovation.scale,
            "r1": ctx.params.r1, "r2": ctx.params.r2, "inner_rule": ctx.inner_rule,
            "eps": ctx.eps, "m": grid.m}
    return DiscreteOperator(class_rows, grid.weights, k_inf, classes, corner, grid, meta)


@dataclass
class Spectrum:
    eigenvalues: np.ndarray  # (J,) complex, descending |lambda|
    right_fns: np.ndarray  # (r, J) r_j(z_k)
    left_fns: np.ndarray  # (r, J) l_j(z_k); sum_k w_k r_j conj(l_i) = delta_ij
    weights: np.ndarray
    residuals: np.ndarray  # ||A v - lambda v|| / (||A||_F ||v||)
    cond: float  # right-eigenvector condition number over returned resolved pairs
    cond_all: float
    n_resolved: int
    reduced_right: np.ndarray  # (nc, J)
    reduced_left: np.ndarray  # (J, nc), rows of the inverse eigenvector matrix
    classes: np.ndarray

    @property
    def size(self):
        return self.eigenvalues.shape[0]

    def is_complex(self, tol=1e-10):
        return np.abs(self.eigenvalues.imag) > tol * np.maximum(1.0, np.abs(self.eigenvalues))

    def leading_multiplicity(self, rel=1e-8):
        lam = np.abs(self.eigenvalues)
        return int(np.count_nonzero(lam >= (1 - rel) * lam[0])) if lam.size else 0

    def biorthonormality_defect(self, count=None):
        """max |sum_m w_m r_j conj(l_k) - delta_jk| over the first ``count`` pairs
        (default: resolved pairs)."""
        count = min(self.n_resolved, self.size) if count is None else count
        r = self.right_fns[:, :count]
        l = self.left_fns[:, :count]
        gram = (l.conj() * self.weights[:, None]).T @ r
        return float(np.abs(gram - np.eye(count)).max()) if count else 0.0


def _sort_order(lam):
    return np.lexsort((-lam.imag, -lam.real, -np.abs(lam)))


def condition_number(S, lam, count=None):
    """2-norm condition number of the first ``count`` eigenvector columns,
    ignoring pairs below the resolution floor ``RESOLVED_REL * |lambda_1|``."""
    count = lam.size if count is None else count
    lam_abs = np.abs(lam[:count])
    keep = lam_abs > RESOLVED_REL * lam_abs.max() if count else lam_abs > 0
    return float(np.linalg.cond(S[:, :count][:, keep])) if keep.any() else 1.0


def require_conditioned(spec, count=None, limit=COND_LIMIT):
    """Raise unless the retained resolved eigenvectors are well conditioned."""
    cond = condition_number(spec.reduced_right, spec.eigenvalues, count)
    if not np.isfinite(cond) or cond > limit:
        raise DefectiveOrIllConditioned(
            f"eigenvector matrix condition number {cond:.3g} exceeds {limit:.0e} over the "
            f"{count if count is not None else spec.size} leading pairs: the discretised kernel "
            "is numerically not diagonalisable there")
    return cond


def eig(op, J=None, cond_limit=COND_LIMIT):
    """Eigenpairs of the Nystrom matrix, sorted by descending magnitude.

    Right functions are the lifted right eigenvectors of ``R E``; left
    functions come from the inverse eigenvector matrix and are scaled so that
    the weighted biorthonormality holds.  ``J=None`` keeps every pair.  The
    conditioning guard covers the returned resolved pairs; pass
    ``cond_limit=None`` to defer it to :func:`require_conditioned`.
    """
    reduced = op.reduced_matrix()
    lam, S = scipy.linalg.eig(reduced)
    order = _sort_order(lam)
    lam, S = lam[order], S[:, order]
    S_inv = scipy.linalg.inv(S)

    lam_abs = np.abs(lam)
    resolved = lam_abs > RESOLVED_REL * lam_abs[0] if lam.size else lam_abs > 0
    cond_all = float(np.linalg.cond(S))

    J = lam.size if J is None else max(1, min(int(J), lam.size))
    cond = condition_number(S, lam, J)
    if cond_limit is not None and (not np.isfinite(cond) or cond > cond_limit):
        raise DefectiveOrIllConditioned(
            f"eigenvector matrix condition number {cond:.3g} exceeds {cond_limit:.0e}: "
            "the discretised kernel is numerically not diagonalisable")
    lam, S_J, S_inv_J = lam[:J], S[:, :J], S_inv[:J]

    right = S_J[op.classes]
    # left eigenvector of A for lambda: s R / lambda (s a left eigenvector of R E)
    with np.errstate(divide="ignore", invalid="ignore"):
        ell = (S_inv_J @ op.class_rows) / lam[:, None]
    ell[~np.isfinite(ell)] = 0.0
    left = ell.T.conj() / op.weights[:, None]

    counts = op.class_counts
    diff = reduced @ S_J - S_J * lam[None, :]
    norm_a = np.sqrt(np.sum(counts * np.sum(op.class_rows ** 2, axis=1)))
    v_norm = np.sqrt(counts @ np.abs(S_J) ** 2)
    residuals = np.sqrt(counts @ np.abs(diff) ** 2) / (norm_a * v_norm)

    return Spectrum(lam, right, left, op.weights, residuals, cond, cond_all,
                    int(np.count_nonzero(resolved[:J])), S_J, S_inv_J, op.classes)


def r_at_infinity(spec, op, j, tol=1e-12):
    """``r_j(inf) = lambda_j^-1 sum_k w_k K(inf, z_k) r_j(z_k)``."""
    lam = spec.eigenvalues[j]
    if abs(lam) < tol:
        raise EigenvalueNearZero(f"|lambda_{j}| = {abs(lam):.3g} below {tol}")
    return complex(np.sum(op.weights * op.row_at_inf * spec.right_fns[:, j]) / lam)


def _node_values(grid, G):
    if callable(G):
        return np.asarray(G(grid.z0, grid.z1), dtype=float)
    return np.asarray(G)


def weight_B(spec, grid, G, j):
    """``B_j(G) = sum_k w_k G(z_k) conj(l_j(z_k))``; ``G`` is callable or node values."""
    g = _node_values(grid, G)
    return complex(np.sum(spec.weights * g * spec.left_fns[:, j].conj()))


def weighted_projections(spec, op, g):
    """``lambda_j r_j(inf) B_j(G)`` for all retained j, without dividing by lambda_j.

    Uses ``lambda_j r_j(inf) = (R E u_j)[corner] = lambda_j u_j[corner]`` when
    the grid has a class clipped to ``(x, x)``.
    """
    b = spec.reduced_left @ (op.class_rows @ g)  # lambda_j B_j(G)
    if op.corner is not None:
        return spec.reduced_right[op.corner] * b
    a = (op.weights * op.row_at_inf) @ spec.right_fns  # lambda_j r_j(inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a * b / spec.eigenvalues
    out[~np.isfinite(out)] = 0.0
    return out


def dump_csv(spec, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["re", "im", "residual"])
    for lam, res in zip(spec.eigenvalues, spec.residuals):
        writer.writerow([repr(float(lam.real)), repr(float(lam.imag)), repr(float(res))])
