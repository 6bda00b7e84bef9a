"""Eigendecomposition of a TPDM and extremal principal components.

``Sigma = U diag(lambdas) U^T`` gives an orthonormal basis ``e_i = t(u_i)``
of the transformed space. Scores ``v = U^T t^{-1}(x)`` are the coefficients
of ``x`` in that basis, and ``x = U o t(v)`` recovers it exactly.
"""
from dataclasses import dataclass

import numpy as np

from .tpdm import Tpdm, radii_of, resolve_threshold, angular_second_moment
from .xspace import check_symmetric, inverse_transform, transform

TIE_TOL = 1e-10


@dataclass(frozen=True)
class EigenBasis:
    lambdas: np.ndarray
    U: np.ndarray
    names: tuple = None

    @property
    def p(self):
        return len(self.lambdas)

    @property
    def E(self):
        """Transformed basis vectors ``e_i = t(u_i)`` as columns."""
        return transform(self.U)

    def fractions(self):
        return self.lambdas / self.lambdas.sum()

    def to_dict(self):
        return {"p": self.p, "names": list(self.names) if self.names else None,
                "lambdas": self.lambdas.tolist(), "U": self.U.tolist()}

    @classmethod
    def from_dict(cls, d):
        p = int(d["p"])
        return cls(np.asarray(d["lambdas"], dtype=float),
                   np.asarray(d["U"], dtype=float).reshape(p, p),
                   tuple(d["names"]) if d.get("names") else None)


def _sigma(T):
    if isinstance(T, Tpdm):
        return T.sigma, T.names
    return check_symmetric(np.asarray(T, dtype=float)), None


def _canonical_eigenspace(V):
    """Orthonormal basis of span(V) that depends only on the subspace."""
    P = V @ V.T
    basis = []
    for col in P.T:
        v = col.copy()
        for b in basis:
            v -= (b @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-3:
            basis.append(v / nv)
        if len(basis) == V.shape[1]:
            return np.column_stack(basis)
    return V


def _fix_sign(u):
    j = int(np.argmax(np.abs(u)))
    return -u if u[j] < 0 else u


def eigen_decompose(T):
    """Eigenpairs in descending order with a deterministic sign convention.

    Each eigenvector is flipped so that its largest-magnitude entry is
    positive (hence no eigenvector is entrywise nonpositive). Within a group
    of tied eigenvalues the basis is canonicalized and ordered
    lexicographically (descending), which is an arbitrary but reproducible
    choice.
    """
    S, names = _sigma(T)
    lam, V = np.linalg.eigh(S)
    order = np.argsort(-lam, kind="stable")
    lam, V = lam[order], V[:, order]
    scale = max(1.0, abs(lam[0]))
    out = np.empty_like(V)
    i = 0
    p = len(lam)
    while i < p:
        j = i + 1
        while j < p and lam[i] - lam[j] <= TIE_TOL * scale:
            j += 1
        block = V[:, i:j] if j - i == 1 else _canonical_eigenspace(V[:, i:j])
        cols = [_fix_sign(c) for c in block.T]
        if len(cols) > 1:
            cols.sort(key=lambda c: tuple(-np.round(c, 12)))
            lam[i:j] = lam[i:j].mean()
        out[:, i:j] = np.column_stack(cols)
        i = j
    lam = np.where(np.abs(lam) < 1e-15 * scale, 0.0, lam)
    return EigenBasis(lam, out, names)


def _finite_rows(X):
    X = np.asarray(X, dtype=float)
    if not (np.isfinite(X) & (X > 0)).all():
        raise ValueError("observations must be finite and strictly positive")
    return X


def project(X, basis):
    """Extremal principal components ``v_t = U^T t^{-1}(x_t)`` for each row."""
    X = _finite_rows(X)
    if X.shape[-1] != basis.p:
        raise ValueError(f"rows have length {X.shape[-1]}, basis is {basis.p}-dimensional")
    return inverse_transform(X) @ basis.U


def reconstruct(v, basis, k=None):
    """``U[:, :k] o t(v[:k])``: the first ``k`` terms of the basis expansion."""
    v = np.asarray(v, dtype=float)
    k = basis.p if k is None else int(k)
    if not 1 <= k <= basis.p:
        raise ValueError(f"k must be in [1, {basis.p}], got {k}")
    return transform(v[..., :k] @ basis.U[:, :k].T)


def pc_tpdm_check(T, basis):
    """``U^T Sigma U``, which should be ``diag(lambdas)``."""
    S, _ = _sigma(T)
    if S.shape != basis.U.shape:
        raise ValueError("dimension mismatch between TPDM and basis")
    M = basis.U.T @ S @ basis.U
    return 0.5 * (M + M.T)


def scree(basis):
    """Rows ``(i, lambda_i, fraction_i, cumulative_i)`` with 1-based ``i``."""
    frac = basis.fractions()
    cum = np.cumsum(frac)
    return [(i + 1, float(basis.lambdas[i]), float(frac[i]), float(cum[i]))
            for i in range(basis.p)]


def estimate_score_tpdm(V, r0=None, *, quantile=None, mass="empirical"):
    """TPDM-type second moments of real-valued scores.

    Angular parts live on the full unit sphere, so signs are kept.
    """
    V = np.ascontiguousarray(V, dtype=float)
    r = radii_of(V)
    r0 = resolve_threshold(r, r0, quantile)
    S, n_exc = angular_second_moment(V, r, r0)
    if n_exc < 2:
        raise ValueError("fewer than 2 radial exceedances")
    m = r0 ** 2 * n_exc / V.shape[0] if mass == "empirical" else float(mass)
    return m / n_exc * S


def balance_diagnostic(V, i, k, r0_quantile=0.95):
    """Positive- and negative-quadrant sums of ``omega_i omega_k`` over exceedances.

    Returns ``(s_plus, s_minus)`` with ``s_minus`` taken with its sign flipped;
    when the PC pair has a vanishing tail cross-moment, both estimate the
    same limit. Indices are 0-based.
    """
    if i == k:
        raise ValueError("i and k must differ")
    V = np.asarray(V, dtype=float)
    r = radii_of(V)
    r0 = np.quantile(r, r0_quantile)
    sel = r > r0
    omega = V[sel] / r[sel, None]
    prod = omega[:, i] * omega[:, k]
    return float(prod[prod > 0].sum()), float(-prod[prod < 0].sum())
