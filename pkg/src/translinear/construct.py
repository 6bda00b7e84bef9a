"""Regularly varying vectors built as ``A o Z`` from independent heavy-tailed noise.

For a ``p x q`` coefficient matrix ``A`` whose columns each carry a positive
entry, ``A o Z`` has a discrete angular measure with one mass point per
column, located at the normalized nonnegative part of that column. This
module computes those measures in closed form, simulates the construction
(and its max-linear counterpart), evaluates limit measures of extreme
regions, and discretizes continuous angular densities into such matrices.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from ._rng import block_uniforms
from .tpdm import Tpdm, radii_of


class CoefMatrix:
    """Coefficient matrix ``A`` together with its tail index.

    Every column must contain at least one strictly positive entry.
    """

    def __init__(self, entries, alpha=2.0):
        A = np.array(entries, dtype=float)
        if A.ndim == 1:
            A = A[:, None]
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError(f"coefficient matrix must be 2-d and nonempty, got {A.shape}")
        if not np.isfinite(A).all():
            raise ValueError("coefficient matrix has non-finite entries")
        bad = np.flatnonzero(~(A > 0).any(axis=0))
        if bad.size:
            raise ValueError(f"columns {bad.tolist()} have no strictly positive entry")
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        A.setflags(write=False)
        self.entries = A
        self.alpha = float(alpha)

    @property
    def shape(self):
        return self.entries.shape

    @property
    def nonneg(self):
        """``A^(0) = max(A, 0)``."""
        return np.maximum(self.entries, 0.0)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self):
        return f"CoefMatrix(shape={self.shape}, alpha={self.alpha:g})"

    def to_dict(self):
        return {"p": self.shape[0], "q": self.shape[1], "alpha": self.alpha,
                "A": self.entries.tolist()}


def as_coef(A, alpha=None):
    if isinstance(A, CoefMatrix):
        if alpha is not None and float(alpha) != A.alpha:
            return CoefMatrix(A.entries, alpha)
        return A
    return CoefMatrix(A, 2.0 if alpha is None else alpha)


@dataclass(frozen=True)
class AngularMeasure:
    """Discrete measure on the nonnegative unit sphere.

    ``points`` is ``(m, p)`` with unit-norm nonnegative rows; ``masses`` is
    ``(m,)`` and strictly positive.
    """
    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        W = np.atleast_2d(np.array(self.points, dtype=float))
        m = np.atleast_1d(np.array(self.masses, dtype=float))
        if W.shape[0] != m.shape[0]:
            raise ValueError("points and masses differ in length")
        if (W < 0).any():
            raise ValueError("mass points must be nonnegative")
        if np.abs(np.linalg.norm(W, axis=1) - 1.0).max(initial=0.0) > 1e-10:
            raise ValueError("mass points must have unit L2 norm")
        if not (m > 0).all():
            raise ValueError("masses must be positive")
        object.__setattr__(self, "points", W)
        object.__setattr__(self, "masses", m)

    @property
    def p(self):
        return self.points.shape[1]

    @property
    def total_mass(self):
        return float(self.masses.sum())

    def merged(self, tol=1e-9):
        """Combine mass points closer than ``tol``, summing their masses."""
        pts, ms = [], []
        for w, m in zip(self.points, self.masses):
            for j, v in enumerate(pts):
                if np.linalg.norm(w - v) < tol:
                    ms[j] += m
                    break
            else:
                pts.append(w)
                ms.append(m)
        return AngularMeasure(np.array(pts), np.array(ms))

    def second_moments(self):
        """``int w w^T dH``; equals the TPDM when the tail index is 2."""
        W = self.points
        return (W * self.masses[:, None]).T @ W

    def as_coef(self, alpha=2.0):
        """Columns ``m_j^(1/alpha) w_j``, which reproduce this measure."""
        return CoefMatrix((self.points * self.masses[:, None] ** (1.0 / alpha)).T, alpha)


@dataclass(frozen=True)
class TailSample:
    values: np.ndarray
    seed: object
    margin: str = "frechet"
    alpha: float = 2.0


def angular_of_construction(A, alpha=None):
    """Angular measure of ``A o Z``: mass ``||a_j^(0)||^alpha`` at ``a_j^(0)/||a_j^(0)||``.

    Columns with the same direction are kept as separate points; see
    ``AngularMeasure.merged``.
    """
    A = as_coef(A, alpha)
    A0 = A.nonneg
    norms = np.linalg.norm(A0, axis=0)
    return AngularMeasure((A0 / norms).T, norms ** A.alpha)


def tpdm_of_construction(A):
    """Closed-form TPDM of ``A o Z`` for tail index 2: ``A^(0) (A^(0))^T``."""
    A = as_coef(A)
    if A.alpha != 2.0:
        raise ValueError("the TPDM is defined for tail index 2 only")
    A0 = A.nonneg
    return Tpdm(A0 @ A0.T)


def frechet_noise(n, q, seed, alpha=2.0):
    """i.i.d. Frechet(alpha) draws by inverse CDF, ``z = (-log U)^(-1/alpha)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    U = block_uniforms(seed, n, q)
    return (-np.log(U)) ** (-1.0 / alpha)


def simulate_construction(A, n, seed):
    """``n`` rows of ``A o Z`` with unit-Frechet(2) noise ``Z``."""
    A = as_coef(A)
    Z = frechet_noise(n, A.shape[1], seed, A.alpha)
    X = _kernels.translinear_rows(np.ascontiguousarray(A.entries), Z)
    return TailSample(X, seed, "frechet", A.alpha)


def simulate_max_linear(A, n, seed):
    """``n`` rows of ``A x_max Z``: ``X_i = max_j a_ij Z_j``. Requires ``A >= 0``."""
    A = as_coef(A)
    if (A.entries < 0).any():
        raise ValueError("max-linear construction needs a nonnegative coefficient matrix")
    Z = frechet_noise(n, A.shape[1], seed, A.alpha)
    X = _kernels.max_linear_rows(np.ascontiguousarray(A.entries), Z)
    return TailSample(X, seed, "frechet", A.alpha)


def _measure_and_alpha(H, alpha):
    if isinstance(H, AngularMeasure):
        return H, 2.0 if alpha is None else float(alpha)
    A = as_coef(H, alpha)
    return angular_of_construction(A), A.alpha


def _thresholds(u, p):
    u = np.asarray(u, dtype=float).ravel()
    if u.shape != (p,):
        raise ValueError(f"need {p} thresholds, got {u.size}")
    if not (u > 0).all():
        raise ValueError("thresholds must be strictly positive")
    return u


def measure_joint_exceedance(H, u, alpha=None):
    """``nu{x : x_i > u_i for all i} = sum_j m_j min_i (w_ij / u_i)^alpha``."""
    H, alpha = _measure_and_alpha(H, alpha)
    u = _thresholds(u, H.p)
    ratios = (H.points / u[None, :]) ** alpha
    return float(H.masses @ ratios.min(axis=1))


def measure_union_exceedance(H, u, alpha=None):
    """``nu([0, u]^c) = sum_j m_j max_i (w_ij / u_i)^alpha``."""
    H, alpha = _measure_and_alpha(H, alpha)
    u = _thresholds(u, H.p)
    ratios = (H.points / u[None, :]) ** alpha
    return float(H.masses @ ratios.max(axis=1))


def mc_exceedance_measure(sample, u, *, joint=True, scale=None, quantile=0.98, alpha=2.0):
    """Monte Carlo estimate of the limit measure of ``{x > u}`` or ``[0, u]^c``.

    Uses ``b^alpha * P_hat(X in b C)`` with cutoff ``b``. By default ``b`` puts
    the nearest point of ``b C`` at the empirical ``quantile`` of the radii.
    """
    X = np.ascontiguousarray(sample.values if isinstance(sample, TailSample) else sample,
                             dtype=float)
    u = _thresholds(u, X.shape[1])
    if scale is None:
        scale = float(np.quantile(radii_of(X), quantile)) / np.linalg.norm(u)
    hits = _kernels.count_exceed(X, np.ascontiguousarray(scale * u), bool(joint))
    return scale ** alpha * hits / X.shape[0]


def _conditional_noise(U, level, alpha):
    """Frechet rows conditioned on ``max_j Z_j > level``, from ``(N, q + 1)`` uniforms.

    The first exceeding index ``K`` is drawn from its truncated geometric law;
    ``Z_j`` is conditioned below ``level`` for ``j < K``, above it for
    ``j = K`` and unconstrained for ``j > K``.
    """
    N, q = U.shape[0], U.shape[1] - 1
    s = -np.expm1(-level ** -alpha)           # P(Z > level)
    log_keep = np.log1p(-s)                  # log P(Z <= level)
    D = -np.expm1(q * log_keep)              # P(max Z > level)
    K = np.ceil(np.log1p(-U[:, 0] * D) / log_keep).astype(np.int64) - 1
    K = np.clip(K, 0, q - 1)
    V = U[:, 1:]
    cols = np.arange(q)[None, :]
    below = -np.log(V) - log_keep            # -log(V F(level))
    above = -np.log1p(-V * s)                # survival scaled into (0, s)
    free = -np.log(V)
    E = np.where(cols < K[:, None], below, np.where(cols == K[:, None], above, free))
    return E ** (-1.0 / alpha), D


def mc_limit_measure(A, u, *, n=10**6, draws=10**6, seed=0):
    """``n P_hat(n^(-1/alpha) X in C)`` for ``X = A o Z`` and both exceedance regions.

    ``P(X in b C)`` with ``b = n^(1/alpha)`` is of order ``1/n``, so plain
    sampling would see only a handful of hits. Because
    ``t(y) <= max(y, 0) + log 2`` and ``t^{-1}(z) < z``, every point of
    ``b C`` needs some ``Z_j`` above ``L = min_i (b u_i - log 2) / sum_j a_ij^+``;
    sampling ``Z`` conditionally on that event and multiplying by its
    probability is unbiased with a high hit rate.

    Returns ``(joint, union)``.
    """
    A = as_coef(A)
    u = _thresholds(u, A.shape[0])
    b = n ** (1.0 / A.alpha)
    s = A.nonneg.sum(axis=1)
    live = s > 0
    level = float(np.min((b * u[live] - math.log(2.0)) / s[live]))
    if not level > 0:
        raise ValueError("n is too small for the conditioning bound; increase n")
    Z, p_cond = _conditional_noise(block_uniforms(seed, draws, A.shape[1] + 1), level, A.alpha)
    X = _kernels.translinear_rows(np.ascontiguousarray(A.entries), Z)
    bu = np.ascontiguousarray(b * u)
    factor = n * p_cond / draws
    return (factor * _kernels.count_exceed(X, bu, True),
            factor * _kernels.count_exceed(X, bu, False))


# ------------------------------------------------------------ discretization

def _quarter_circle_cells(q):
    edges = np.linspace(0.0, np.pi / 2, q + 1)
    return edges[:-1], edges[1:]


def _discretize_p2(density, q, nodes):
    lo, hi = _quarter_circle_cells(q)
    x, wts = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (hi - lo)
    theta = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
    pts = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    dens = np.asarray(density(pts.reshape(-1, 2)), dtype=float).reshape(q, nodes)
    masses = (dens * wts[None, :]).sum(axis=1) * half
    mid = 0.5 * (lo + hi)
    centers = np.stack([np.cos(mid), np.sin(mid)], axis=1)
    return centers, masses


def _octant_triangles(depth):
    tris = [np.eye(3)]
    for _ in range(depth):
        nxt = []
        for a, b, c in tris:
            ab, bc, ca = (v / np.linalg.norm(v) for v in (a + b, b + c, c + a))
            nxt += [np.array([a, ab, ca]), np.array([ab, b, bc]),
                    np.array([ca, bc, c]), np.array([ab, bc, ca])]
        tris = nxt
    return np.array(tris)


def _spherical_area(T):
    a, b, c = T[:, 0], T[:, 1], T[:, 2]
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) \
        + np.einsum("ij,ij->i", c, a)
    return 2.0 * np.arctan2(num, den)


def _discretize_p3(density, q):
    depth = 0
    while 4 ** depth < q:
        depth += 1
    if 4 ** depth != q:
        raise ValueError(f"for p=3 the cell count must be a power of 4, got {q}")
    T = _octant_triangles(depth)
    centers = T.sum(axis=1)
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    dens = np.asarray(density(centers), dtype=float).reshape(-1)
    return centers, dens * _spherical_area(T)


def discretize_angular(density, q, p=2, alpha=2.0, nodes=4):
    """Approximate an angular measure by ``q`` point masses.

    ``density`` maps an ``(m, p)`` array of unit vectors to nonnegative
    densities with respect to surface measure on the nonnegative sphere.
    For ``p=2`` the quarter circle is cut into ``q`` equal-angle arcs (masses
    by ``nodes``-point Gauss-Legendre per arc, points at arc midpoints); for
    ``p=3`` the octant is recursively split into ``q = 4^d`` spherical
    triangles (centroid rule). An ``AngularMeasure`` is passed through.

    Returns the ``CoefMatrix`` whose columns are ``m_j^(1/alpha) w_j``; cells
    with zero mass are dropped.
    """
    if isinstance(density, AngularMeasure):
        return density.as_coef(alpha)
    if q < 1:
        raise ValueError("q must be at least 1")
    if p == 2:
        centers, masses = _discretize_p2(density, q, nodes)
    elif p == 3:
        centers, masses = _discretize_p3(density, q)
    else:
        raise ValueError(f"discretization supports p in (2, 3), got {p}")
    if (masses < 0).any():
        raise ValueError("density must be nonnegative")
    keep = masses > 0
    if not keep.any():
        raise ValueError("density integrates to zero")
    return AngularMeasure(centers[keep], masses[keep]).as_coef(alpha)
