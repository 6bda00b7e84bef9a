"""Monte Carlo checks of the limit results behind the closed-form operations.

Every check simulates from ``A o Z`` (or its max-linear counterpart) and
compares an empirical quantity with its closed-form limit. The comparisons
carry finite-threshold bias of order ``1/r0`` on top of sampling noise, so
coefficient matrices are normalized to unit angular mass and tolerances are
absolute on that scale.
"""
from dataclasses import dataclass, asdict

import numpy as np

from ._rng import substream
from .construct import (angular_of_construction, measure_joint_exceedance,
                        measure_union_exceedance, simulate_construction, simulate_max_linear,
                        tpdm_of_construction)
from .marginals import hill_estimate
from .spectral import balance_diagnostic, eigen_decompose, estimate_score_tpdm, project
from .tpdm import estimate_tpdm, radii_of
from .xspace import scalar_mul, vector_add

BASE_A = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]])


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.4g} (tol {self.tolerance:g}) {self.detail}"

    def to_dict(self):
        return asdict(self)


def unit_mass(A):
    """Rescale ``A`` so that its angular measure has total mass 1."""
    A = np.asarray(A, dtype=float)
    return A / np.linalg.norm(np.maximum(A, 0.0))


def _maxabs(a, b):
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


def check_estimator(A, n, seed, quantile=0.98, tol=0.1, name="estimator"):
    A = unit_mass(A)
    S = tpdm_of_construction(A).sigma
    X = simulate_construction(A, n, seed).values
    E = estimate_tpdm(X, quantile=quantile, mass=float(np.trace(S))).sigma
    err = _maxabs(E, S)
    return CheckResult(name, err, tol, err <= tol, f"p={A.shape[0]} q={A.shape[1]} n={n}")


def check_sum(A1, A2, n, seed, quantile=0.98, tol=0.15):
    """TPDM of ``X1 (+) X2`` against ``Sigma_1 + Sigma_2``."""
    A1, A2 = unit_mass(A1), unit_mass(A2)
    S = tpdm_of_construction(A1).sigma + tpdm_of_construction(A2).sigma
    X1 = simulate_construction(A1, n, substream(seed, "sum/1")).values
    X2 = simulate_construction(A2, n, substream(seed, "sum/2")).values
    E = estimate_tpdm(vector_add(X1, X2), quantile=quantile, mass=float(np.trace(S))).sigma
    err = _maxabs(E, S)
    return CheckResult("sum_preserves_rv", err, tol, err <= tol, f"n={n}")


def check_scalar(A, a, n, seed, quantile=0.98, tol=0.15):
    """TPDM of ``a o X`` against ``a^2 Sigma``.

    The mass of ``a o X`` is estimated as ``a_hat^2 * trace(Sigma)`` where
    ``a_hat^2`` is the ratio of empirical masses of ``a o X`` and ``X`` at the
    same quantile level; the ratio cancels most of the bias of the plain
    empirical mass estimator.
    """
    A = unit_mass(A)
    S = tpdm_of_construction(A).sigma
    X = simulate_construction(A, n, substream(seed, "scalar")).values
    Y = scalar_mul(a, X)
    ratio = estimate_tpdm(Y, quantile=quantile).total_mass / estimate_tpdm(X, quantile=quantile).total_mass
    E = estimate_tpdm(Y, quantile=quantile, mass=ratio * float(np.trace(S))).sigma
    err = _maxabs(E, a * a * S)
    return CheckResult(f"scalar_mult_a={a:g}", err, tol, err <= tol,
                       f"mass ratio {ratio:.4f} vs a^2={a * a:g}")


def check_negative_scalar(A, n, seed, a=-1.0, level=0.9999, bound_neg=10.0, bound_pos=50.0):
    """For ``a <= 0`` the upper tail of ``a o X`` vanishes."""
    X = simulate_construction(A, n, substream(seed, "negative")).values
    qy = float(np.quantile(scalar_mul(a, X), level, axis=0).max())
    qx = float(np.quantile(X, level, axis=0).min())
    ok = qy < bound_neg and qx > bound_pos
    return CheckResult(f"scalar_mult_a={a:g}", qy, bound_neg, ok,
                       f"q{level} of a o X = {qy:.3g}, of X = {qx:.3g} (> {bound_pos:g})")


def check_max_linear_agreement(A, n, seed, quantile=0.98, tol=0.1):
    A = unit_mass(A)
    m = float(np.trace(tpdm_of_construction(A).sigma))
    Xt = simulate_construction(A, n, substream(seed, "ml/t")).values
    Xm = simulate_max_linear(A, n, substream(seed, "ml/m")).values
    Et = estimate_tpdm(Xt, quantile=quantile, mass=m).sigma
    Em = estimate_tpdm(Xm, quantile=quantile, mass=m).sigma
    err = _maxabs(Et, Em)
    return CheckResult("max_linear_vs_transformed", err, tol, err <= tol)


def angular_offsets(X, A, quantile=0.999):
    """Distance from each large realization's angle to the nearest mass point."""
    H = angular_of_construction(A)
    r = radii_of(X)
    sel = r > np.quantile(r, quantile)
    W = X[sel] / r[sel, None]
    d = np.linalg.norm(W[:, None, :] - H.points[None, :, :], axis=2)
    return d.min(axis=1)


def check_max_linear_exactness(n, seed, A=None, quantile=0.999):
    A = np.array([[1.0, 2.0], [2.0, 1.0]]) if A is None else np.asarray(A, dtype=float)
    om = angular_offsets(simulate_max_linear(A, n, substream(seed, "exact/m")).values, A, quantile)
    ot = angular_offsets(simulate_construction(A, n, substream(seed, "exact/t")).values, A, quantile)
    return CheckResult("max_linear_exact_angles", float(om.max()), 1e-12, bool(om.max() <= 1e-12),
                       f"transformed-linear median offset {np.median(ot):.3g} (not asserted)")


def check_total_mass(A):
    H = angular_of_construction(A)
    T = tpdm_of_construction(A)
    err = abs(H.total_mass - float(np.trace(T.sigma)))
    return CheckResult("total_mass_identity", err, 1e-10, err <= 1e-10 * max(1.0, H.total_mass))


def check_joint_le_union(A, u):
    j, un = measure_joint_exceedance(A, u), measure_union_exceedance(A, u)
    return CheckResult("joint_le_union", j - un, 0.0, j <= un, f"joint {j:.4g}, union {un:.4g}")


def check_score_tail(A, n, seed, k_frac=0.01, band=(1.7, 2.3)):
    A = unit_mass(A)
    X = simulate_construction(A, n, substream(seed, "scores")).values
    basis = eigen_decompose(tpdm_of_construction(A))
    V = project(X, basis)
    alpha = hill_estimate(radii_of(V), k=int(k_frac * n))
    return CheckResult("score_tail_index", alpha, band[1] - 2.0, band[0] <= alpha <= band[1])


def check_score_tpdm(A, n, seed, quantile=0.98, tol=0.15):
    A = unit_mass(A)
    T = tpdm_of_construction(A)
    basis = eigen_decompose(T)
    V = project(simulate_construction(A, n, substream(seed, "scores")).values, basis)
    E = estimate_score_tpdm(V, quantile=quantile, mass=T.total_mass)
    err = _maxabs(E, np.diag(basis.lambdas))
    return CheckResult("score_tpdm_diagonal", err, tol, err <= tol)


def check_score_scale(A, n, seed, quantile=0.999, rtol=0.25, top=2):
    """``n P(n^(-1/2)|V_i| > x) x^2 -> lambda_i``, checked at a high cutoff."""
    A = unit_mass(A)
    basis = eigen_decompose(tpdm_of_construction(A))
    V = project(simulate_construction(A, n, substream(seed, "scores")).values, basis)
    worst = 0.0
    for i in range(top):
        b = float(np.quantile(np.abs(V[:, i]), quantile))
        est = b * b * float((np.abs(V[:, i]) > b).mean())
        worst = max(worst, abs(est / basis.lambdas[i] - 1.0))
    return CheckResult("score_scale_law", worst, rtol, worst <= rtol)


def check_balance(A, n, seed, quantile=0.98, rtol=0.25):
    basis = eigen_decompose(tpdm_of_construction(A))
    V = project(simulate_construction(A, n, substream(seed, "balance")).values, basis)
    sp, sm = balance_diagnostic(V, 0, 1, quantile)
    gap = abs(sp - sm) / max(sp, sm)
    return CheckResult("pc_balance", gap, rtol, gap < rtol, f"s+={sp:.4g} s-={sm:.4g}")


def run_suite(seed=0, n=100000):
    """All invariant checks with their default tolerances."""
    u = np.array([1.0, 1.0])
    A2 = np.array([[1.0, 0.5], [0.5, 1.0]])
    return [
        check_total_mass(BASE_A),
        check_joint_le_union(BASE_A, u),
        check_estimator(BASE_A, 2 * n, substream(seed, "estimator")),
        check_sum(A2, np.array([[0.5], [1.0]]), n, seed),
        check_scalar(A2, 0.5, n, seed),
        check_scalar(A2, 2.0, n, seed),
        check_negative_scalar(BASE_A, n, seed),
        check_max_linear_agreement(BASE_A, n, seed),
        check_max_linear_exactness(n, seed),
        check_score_tail(BASE_A, n, seed),
        check_score_tpdm(BASE_A, n, seed),
        check_score_scale(BASE_A, n, seed),
        check_balance(BASE_A, n, seed),
    ]
