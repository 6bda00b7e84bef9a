"""Tail pairwise dependence matrix (TPDM).

For ``X`` regularly varying with tail index 2 and angular measure ``H`` on
the nonnegative part of the L2 unit sphere, the TPDM collects the second
moments ``sigma_ik = int w_i w_k dH(w)``. Its trace is the total mass of
``H``, its diagonal holds squared marginal scales, and a zero off-diagonal
entry is equivalent to asymptotic independence of that pair.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class Tpdm:
    """Symmetric, PSD, entrywise nonnegative ``p x p`` matrix.

    ``n_exc`` and ``r0`` record how an estimate was obtained; they are 0 and
    ``None`` for closed-form matrices.
    """
    sigma: np.ndarray
    total_mass: float = None
    n_exc: int = 0
    r0: float = None
    names: tuple = None

    def __post_init__(self):
        S = np.array(self.sigma, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] < 1:
            raise ValueError(f"TPDM must be a nonempty square matrix, got {S.shape}")
        if not np.isfinite(S).all():
            raise ValueError("TPDM has non-finite entries")
        scale = max(1.0, np.abs(S).max())
        if np.abs(S - S.T).max() > 1e-12 * scale:
            raise ValueError("TPDM is not symmetric")
        S = 0.5 * (S + S.T)
        if S.min() < -1e-12 * scale:
            raise ValueError("TPDM has negative entries")
        S = np.maximum(S, 0.0)
        ev = np.linalg.eigvalsh(S)
        if ev[0] < -1e-8 * max(ev[-1], 1e-300):
            raise ValueError(f"TPDM is not positive semidefinite (min eigenvalue {ev[0]:.3g})")
        trace = float(np.trace(S))
        mass = trace if self.total_mass is None else float(self.total_mass)
        if abs(mass - trace) > 1e-8 * max(1.0, abs(trace)):
            raise ValueError(f"total mass {mass} does not match trace {trace}")
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != S.shape[0]:
                raise ValueError("names length does not match dimension")
            object.__setattr__(self, "names", names)
        S.setflags(write=False)
        object.__setattr__(self, "sigma", S)
        object.__setattr__(self, "total_mass", mass)
        object.__setattr__(self, "n_exc", int(self.n_exc))
        if self.r0 is not None:
            object.__setattr__(self, "r0", float(self.r0))

    @property
    def p(self):
        return self.sigma.shape[0]

    def to_dict(self):
        return {
            "p": self.p,
            "names": list(self.names) if self.names is not None else None,
            "sigma": self.sigma.tolist(),
            "total_mass": self.total_mass,
            "n_exc": self.n_exc,
            "r0": self.r0,
        }

    @classmethod
    def from_dict(cls, d):
        sigma = np.asarray(d["sigma"], dtype=float)
        p = int(d.get("p", sigma.shape[0]))
        sigma = sigma.reshape(p, p)
        return cls(sigma, total_mass=d.get("total_mass"), n_exc=d.get("n_exc", 0),
                   r0=d.get("r0"), names=d.get("names"))


@dataclass(frozen=True)
class ExceedanceSet:
    """Radial exceedances ``r_t > r0`` with their angular parts ``w_t``."""
    radii: np.ndarray
    angles: np.ndarray
    r0: float
    n_samp: int
    index: np.ndarray = field(default=None, repr=False)

    @property
    def n_exc(self):
        return len(self.radii)

    def factor(self, mass):
        """The (inefficient) nonnegative factor ``A`` with ``A A^T = sigma_hat``."""
        return np.sqrt(mass / self.n_exc) * self.angles.T


def _validate_sample(sample, allow_negative=False):
    X = np.ascontiguousarray(sample, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"sample must be a 2-d (n, p) array, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("sample has non-finite entries")
    if not allow_negative and (X < 0).any():
        raise ValueError("sample has negative entries")
    return X


def radii_of(X):
    return np.sqrt(np.einsum("ij,ij->i", X, X))


def resolve_threshold(radii, r0=None, quantile=None):
    if (r0 is None) == (quantile is None):
        raise ValueError("give exactly one of r0 or quantile")
    if quantile is not None:
        if not 0.0 < quantile < 1.0:
            raise ValueError("quantile must lie in (0, 1)")
        return float(np.quantile(radii, quantile))
    return float(r0)


def exceedances(sample, r0=None, *, quantile=None):
    X = _validate_sample(sample)
    r = radii_of(X)
    if (r == 0).any():
        raise ValueError(f"{int((r == 0).sum())} rows have zero radius")
    r0 = resolve_threshold(r, r0, quantile)
    idx = np.flatnonzero(r > r0)
    return ExceedanceSet(r[idx], X[idx] / r[idx, None], r0, X.shape[0], idx)


def angular_second_moment(X, radii, r0):
    """``(sum_t w_t w_t^T 1{r_t > r0}, n_exc)``, accelerated."""
    S, n_exc = _kernels.angular_moments(np.ascontiguousarray(X, dtype=float),
                                        np.ascontiguousarray(radii, dtype=float), float(r0))
    return S, int(n_exc)


def estimate_tpdm(sample, r0=None, *, quantile=None, mass=None, unit_scale=False, names=None):
    """Empirical TPDM from radial exceedances.

    ``sigma_hat = m_hat / n_exc * sum_t w_t w_t^T 1(r_t > r0)``.

    Parameters
    ----------
    sample : (n, p) array of nonnegative observations
    r0 : float, optional
        Radial threshold; the comparison is strict.
    quantile : float, optional
        Alternative to ``r0``: empirical quantile level of the radii.
    mass : float or "empirical", optional
        Known total mass of the angular measure, or ``"empirical"`` for
        ``m_hat = r0**2 * n_exc / n``. Defaults to ``p`` when ``unit_scale``
        is set and to the empirical estimate otherwise.
    """
    X = _validate_sample(sample)
    n, p = X.shape
    r = radii_of(X)
    if (r == 0).any():
        raise ValueError(f"{int((r == 0).sum())} rows have zero radius")
    r0 = resolve_threshold(r, r0, quantile)
    S, n_exc = angular_second_moment(X, r, r0)
    if n_exc < 2:
        raise ValueError(f"only {n_exc} radial exceedances above r0={r0:.6g}; need at least 2")
    if mass is None:
        mass = float(p) if unit_scale else "empirical"
    if isinstance(mass, str):
        if mass != "empirical":
            raise ValueError(f"unknown mass mode {mass!r}")
        m_hat = r0 ** 2 * n_exc / n
    else:
        m_hat = float(mass)
        if not m_hat > 0:
            raise ValueError("known mass must be positive")
    sigma = m_hat / n_exc * S
    # trace(S) == n_exc up to rounding; pin it so trace == total mass
    sigma *= m_hat / np.trace(sigma)
    return Tpdm(sigma, total_mass=m_hat, n_exc=n_exc, r0=r0, names=names)


def _index(T, i):
    if not -T.p <= i < T.p:
        raise IndexError(f"index {i} out of range for p={T.p}")
    return i


def check_asymptotic_independence(T, i, k, tol=1e-8):
    """True iff ``|sigma_ik| <= tol`` (0-based indices)."""
    return bool(abs(T.sigma[_index(T, i), _index(T, k)]) <= tol)


def marginal_scale(T, i):
    """Scale of component ``i``: ``sqrt(sigma_ii)``."""
    return float(np.sqrt(T.sigma[_index(T, i), _index(T, i)]))
