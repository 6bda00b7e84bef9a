"""Completely positive factorization ``Sigma = A A^T`` with ``A >= 0``.

Alternating projections in the style of Groetzner and Duer: starting from
any factor ``B`` with ``B B^T = Sigma``, look for an orthogonal ``Q`` that
makes ``B Q`` entrywise nonnegative. Each sweep projects ``B Q`` onto the
nonnegative orthant and then solves the orthogonal Procrustes problem for
the closest ``Q``.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._rng import seed_sequence
from .construct import CoefMatrix
from .tpdm import Tpdm

NEG_CLAMP = 1e-10


class FactorizationError(RuntimeError):
    pass


def cp_rank_bound(p):
    """Upper bound on the cp-rank of a ``p x p`` completely positive matrix."""
    full = p * (p + 1) // 2
    return full - 4 if p >= 5 else full


def default_q(p):
    return min(2 * p, cp_rank_bound(p))


@dataclass(frozen=True)
class CpFactorization:
    A: np.ndarray
    residual: float
    iterations: int
    converged: bool
    restarts: int

    @property
    def q(self):
        return self.A.shape[1]

    def to_dict(self):
        p, q = self.A.shape
        return {"p": p, "q": q, "A": self.A.tolist(), "residual": self.residual,
                "converged": self.converged, "restarts": self.restarts,
                "iterations": self.iterations}

    @classmethod
    def from_dict(cls, d):
        A = np.asarray(d["A"], dtype=float).reshape(int(d["p"]), int(d["q"]))
        return cls(A, float(d["residual"]), int(d.get("iterations", 0)),
                   bool(d["converged"]), int(d["restarts"]))


def _psd_factor(S):
    """``B`` with ``B B^T = S`` and the numerical rank of ``S``."""
    lam, U = np.linalg.eigh(S)
    top = max(lam[-1], 0.0)
    if lam[0] < -1e-8 * max(top, 1e-300):
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {lam[0]:.3g})")
    lam = np.clip(lam, 0.0, None)
    rank = int((lam > 1e-10 * max(top, 1e-300) * len(lam)).sum())
    order = np.argsort(-lam)
    return U[:, order] * np.sqrt(lam[order]), rank


def random_orthogonal(q, rng):
    Z = rng.standard_normal((q, q))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def _as_sigma(Sigma):
    S = Sigma.sigma if isinstance(Sigma, Tpdm) else np.asarray(Sigma, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("Sigma must be square")
    if np.abs(S - S.T).max() > 1e-10 * max(1.0, np.abs(S).max()):
        raise ValueError("Sigma must be symmetric")
    return 0.5 * (S + S.T)


def cp_factorize(Sigma, q=None, tol=1e-8, max_iter=5000, restarts=20, seed=0):
    """Search for a nonnegative ``p x q`` factor of ``Sigma``.

    Each restart starts from ``B = U D^(1/2)`` (padded to ``q`` columns) and
    a random orthogonal ``Q`` from its own seed stream, and iterates until
    ``||A A^T - Sigma||_F <= tol`` or ``max_iter``. Restarts stop at the first
    success; otherwise the restart with the smallest residual is kept
    (ties go to the earliest).

    ``converged`` is true iff ``residual <= tol * (1 + ||Sigma||_F)``.
    """
    S = _as_sigma(Sigma)
    p = S.shape[0]
    q = default_q(p) if q is None else int(q)
    B0, rank = _psd_factor(S)
    if q < rank:
        raise ValueError(f"q={q} is below rank(Sigma)={rank}")
    if restarts < 1 or max_iter < 0:
        raise ValueError("restarts must be >= 1 and max_iter >= 0")
    width = min(p, q)
    B = np.zeros((p, q))
    B[:, :width] = B0[:, :width]
    Bt = np.ascontiguousarray(B.T)
    ss = seed_sequence(seed)
    target = tol * (1.0 + np.linalg.norm(S))

    best = None
    for r in range(restarts):
        child = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (r,))
        Q = random_orthogonal(q, np.random.default_rng(child))
        P, _, iters, resid = _kernels.cp_iterate(B, Bt, Q, S, float(tol), int(max_iter))
        if best is None or resid < best[1]:
            best = (P, resid, iters, r + 1)
        if resid <= tol:
            break
    P, _, iters, used = best
    A = np.where(P < NEG_CLAMP, np.maximum(P, 0.0), P)
    resid = float(np.linalg.norm(A @ A.T - S))
    return CpFactorization(A, resid, int(iters), bool(resid <= target), used)


def cp_rank_search(Sigma, q_min=None, q_max=None, **options):
    """Smallest ``q`` in ``[q_min, q_max]`` for which ``cp_factorize`` converges.

    Failure to converge is reported (``converged=False`` on the best attempt)
    but is not a proof that no factorization of that width exists.
    """
    S = _as_sigma(Sigma)
    p = S.shape[0]
    _, rank = _psd_factor(S)
    q_min = rank if q_min is None else int(q_min)
    q_max = cp_rank_bound(p) if q_max is None else int(q_max)
    if q_min > q_max:
        raise ValueError(f"empty range [{q_min}, {q_max}]")
    if q_max > cp_rank_bound(p):
        raise ValueError(f"q_max={q_max} exceeds the cp-rank bound {cp_rank_bound(p)}")
    best = None
    for q in range(max(q_min, rank), q_max + 1):
        fac = cp_factorize(S, q, **options)
        if fac.converged:
            return fac
        if best is None or fac.residual < best.residual:
            best = fac
    if best is None:
        raise ValueError(f"range [{q_min}, {q_max}] lies below rank(Sigma)={rank}")
    return best


def construct_from_tpdm(Sigma, **options):
    """Coefficient matrix ``A >= 0`` with ``A A^T = Sigma`` (tail index 2).

    Raises ``FactorizationError`` if no restart converges.
    """
    fac = cp_factorize(Sigma, **options)
    if not fac.converged:
        raise FactorizationError(
            f"no completely positive factorization found (best residual {fac.residual:.3g})")
    keep = (fac.A > 0).any(axis=0)
    return CoefMatrix(fac.A[:, keep], alpha=2.0)
