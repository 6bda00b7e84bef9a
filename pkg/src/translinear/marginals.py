"""Marginal preprocessing to unit-scale, tail-index-2 margins.

Two pipelines are provided:

* ``"frechet"``: nonparametric transform ``g(x) = (-log F(x))^(-1/2)`` with
  ``F`` a linearly interpolated empirical CDF on plotting positions
  ``rank / (n + 1)``;
* ``"loss"``: for returns, ``t(max(-x, 0))`` followed by a Hill estimate of
  the tail index and the power rescaling ``c^(-1/2) x^(alpha/2)``.
"""
from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy.stats import rankdata

from .xspace import transform


@dataclass(frozen=True)
class MarginalModel:
    """Fitted transform for one series; replayable on new data via ``apply``."""
    kind: str
    reference: np.ndarray = None
    probs: np.ndarray = None
    alpha: float = None
    scale: float = None
    tail_quantile: float = None
    name: str = None
    meta: dict = field(default_factory=dict)

    def cdf(self, x):
        """Interpolated empirical CDF; values outside the reference range are clamped."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.reference[0], self.reference[-1]
        clipped = bool(((x < lo) | (x > hi)).any())
        if clipped:
            warnings.warn(f"{self.name or 'series'}: values outside the fitted range were clamped",
                          RuntimeWarning, stacklevel=2)
        return np.interp(x, self.reference, self.probs)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "frechet":
            return (-np.log(self.cdf(x))) ** -0.5
        if self.kind == "loss":
            return rescale_alpha2(loss_pretransform(x), self.alpha, self.scale)
        raise ValueError(f"unknown marginal kind {self.kind!r}")

    def to_dict(self):
        d = {"kind": self.kind, "name": self.name, "alpha": self.alpha, "scale": self.scale,
             "tail_quantile": self.tail_quantile, "meta": dict(self.meta)}
        if self.reference is not None:
            d["reference"] = self.reference.tolist()
            d["probs"] = self.probs.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        ref = d.get("reference")
        return cls(d["kind"],
                   None if ref is None else np.asarray(ref, dtype=float),
                   None if ref is None else np.asarray(d["probs"], dtype=float),
                   d.get("alpha"), d.get("scale"), d.get("tail_quantile"), d.get("name"),
                   dict(d.get("meta") or {}))


def _column(x, min_len=1):
    x = np.asarray(x, dtype=float).ravel()
    if np.isnan(x).any():
        raise ValueError("column contains NaN")
    if x.size < min_len:
        raise ValueError(f"need at least {min_len} values, got {x.size}")
    return x


def fit_ecdf(column, name=None):
    """Empirical CDF at plotting positions (midranks for ties) over ``n + 1``."""
    x = _column(column, 2)
    if np.ptp(x) == 0:
        raise ValueError("constant column")
    n = x.size
    ranks = rankdata(x, method="average")
    ref, first = np.unique(x, return_index=True)
    probs = ranks[first] / (n + 1)
    return MarginalModel("frechet", ref, probs, alpha=2.0, scale=1.0, name=name)


def ecdf_frechet_transform(column, name=None):
    """Map a column to approximately unit-Frechet(2) margins.

    Returns ``(values, model)``.
    """
    model = fit_ecdf(column, name)
    return model.apply(column), model


def hill_estimate(column, k=None, *, quantile=None):
    """Hill estimate of the tail index from the ``k`` largest order statistics.

    ``alpha = [mean_j log(x_(n-j+1) / x_(n-k))]^(-1)``. With ``quantile``,
    ``k`` is the number of observations strictly above the empirical
    quantile.
    """
    x = np.sort(_column(column))
    if (x <= 0).any():
        raise ValueError("Hill estimator needs strictly positive data")
    n = x.size
    if (k is None) == (quantile is None):
        raise ValueError("give exactly one of k or quantile")
    if quantile is not None:
        k = int((x > np.quantile(x, quantile)).sum())
    k = int(k)
    if k < 10 or k >= n:
        raise ValueError(f"need at least 10 exceedances (and k < n); got k={k}, n={n}")
    u = x[n - k - 1]
    return float(1.0 / np.mean(np.log(x[n - k:] / u)))


def tail_scale(column, alpha, k=None, *, quantile=None):
    """Scale ``c`` in ``P(X > x) ~ c x^(-alpha)``: ``c = (k/n) u^alpha`` at the threshold ``u``."""
    x = np.sort(_column(column))
    n = x.size
    if quantile is not None:
        k = int((x > np.quantile(x, quantile)).sum())
    k = int(k)
    return float(k / n * x[n - k - 1] ** alpha)


def loss_pretransform(returns):
    """``t(max(-r, 0))``: losses as positive values bounded away from zero."""
    r = _column(returns)
    return transform(np.maximum(-r, 0.0))


def rescale_alpha2(column, alpha, scale):
    """``scale^(-1/2) x^(alpha/2)``: tail index ``alpha`` and scale ``c`` to 2 and 1."""
    x = _column(column)
    if not (alpha > 0 and scale > 0):
        raise ValueError("alpha and scale must be positive")
    if (x <= 0).any():
        raise ValueError("rescaling needs strictly positive data")
    return scale ** -0.5 * x ** (alpha / 2.0)


def fit_loss_model(returns, quantile=0.99, name=None):
    temp = loss_pretransform(returns)
    alpha = hill_estimate(temp, quantile=quantile)
    c = tail_scale(temp, alpha, quantile=quantile)
    meta = {"scale_estimator": "c = (k/n) * u**alpha at the Hill threshold u"}
    return MarginalModel("loss", alpha=alpha, scale=c, tail_quantile=quantile, name=name,
                         meta=meta)


def fit_marginals(data, pipeline="frechet", quantile=0.99, names=None):
    """Fit one model per column and return ``(transformed, models)``."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValueError("data must be 2-d")
    names = names or [f"x{i}" for i in range(X.shape[1])]
    models = []
    for i in range(X.shape[1]):
        if pipeline == "frechet":
            models.append(fit_ecdf(X[:, i], names[i]))
        elif pipeline == "loss":
            models.append(fit_loss_model(X[:, i], quantile, names[i]))
        else:
            raise ValueError(f"unknown pipeline {pipeline!r}")
    out = np.column_stack([m.apply(X[:, i]) for i, m in enumerate(models)])
    return out, models
