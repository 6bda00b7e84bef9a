"""Transformed-linear vector space on the positive orthant.

Points of the space are plain ``numpy`` arrays with entries in ``[0, inf]``.
Every operation maps to ordinary linear algebra on the preimages
``inverse_transform(x)`` and back through the softplus ``transform``.
Functions accept a single vector of shape ``(p,)`` or a stack of row
vectors of shape ``(n, p)`` wherever that is unambiguous.
"""
import numpy as np

from . import _kernels

LOG2 = float(np.log(2.0))


def _check_nan(a, what):
    if np.isnan(a).any():
        raise ValueError(f"{what} contains NaN")


def transform(y):
    """Softplus ``log(1 + exp(y))`` extended to ``[-inf, inf]``.

    Stable for arbitrarily large ``|y|``; ``transform(-inf) == 0`` and
    ``transform(inf) == inf``.
    """
    y = np.asarray(y, dtype=float)
    _check_nan(y, "input")
    out = _kernels.softplus(y)
    return out[()] if out.ndim == 0 else out


def inverse_transform(x):
    """Inverse softplus ``log(exp(x) - 1)`` on ``[0, inf]``.

    ``inverse_transform(0) == -inf``. Negative input raises ``ValueError``.
    """
    x = np.asarray(x, dtype=float)
    _check_nan(x, "input")
    if (x < 0).any():
        raise ValueError("inverse_transform is defined on [0, inf] only")
    out = _kernels.softplus_inv(x)
    return out[()] if out.ndim == 0 else out


def additive_zero(p):
    """The zero vector, every entry ``log 2``."""
    return np.full(p, LOG2)


def as_xvector(x):
    x = np.asarray(x, dtype=float)
    _check_nan(x, "vector")
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ValueError("a transformed vector needs at least one component")
    if (x < 0).any():
        raise ValueError("transformed vectors have nonnegative components")
    return x


def _preimage(x, what="vector"):
    y = inverse_transform(as_xvector(x))
    return np.asarray(y)


def _finite_preimage(x, what="vector"):
    x = as_xvector(x)
    if not ((x > 0) & np.isfinite(x)).all():
        raise ValueError(f"{what} must have finite, strictly positive components")
    return np.asarray(inverse_transform(x))


def _from_preimage(y):
    if np.isnan(y).any():
        raise ValueError("indeterminate form (0*inf or inf-inf) in transformed-linear operation")
    return transform(y)


def vector_add(x1, x2):
    y1, y2 = _preimage(x1), _preimage(x2)
    if y1.shape[-1] != y2.shape[-1]:
        raise ValueError(f"length mismatch: {y1.shape[-1]} vs {y2.shape[-1]}")
    with np.errstate(invalid="ignore"):
        return _from_preimage(y1 + y2)


def additive_inverse(x):
    return _from_preimage(-_preimage(x))


def scalar_mul(a, x):
    y = _preimage(x)
    a = float(a)
    if a == 0.0:
        # 0 * (+-inf) is indeterminate; the zero scalar still maps every
        # finite point to the additive zero
        if not np.isfinite(y).all():
            raise ValueError("0 times a boundary point (0 or inf) is indeterminate")
    with np.errstate(invalid="ignore"):
        return _from_preimage(a * y)


def matrix_mul(A, x):
    """``A o x = t(A t^{-1}(x))``.

    ``x`` may be a single length-``q`` vector or an ``(n, q)`` stack of rows,
    in which case each row is mapped.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a 2-d matrix")
    y = _preimage(x)
    if y.shape[-1] != A.shape[1]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, x has length {y.shape[-1]}")
    if np.isfinite(y).all():
        return transform(y @ A.T)
    # numpy BLAS does not reliably propagate 0*inf as NaN, so expand explicitly
    with np.errstate(invalid="ignore"):
        prod = np.einsum("...j,ij->...ij", y, A)
        return _from_preimage(prod.sum(axis=-1))


def lin_combo(coeffs, basis):
    """``a_1 o x_1 (+) ... (+) a_q o x_q`` evaluated as ``Y o t(a)``."""
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    basis = [as_xvector(b) for b in basis]
    if len(basis) != coeffs.size:
        raise ValueError(f"{coeffs.size} coefficients for {len(basis)} vectors")
    if len({b.shape for b in basis}) != 1 or basis[0].ndim != 1:
        raise ValueError("basis vectors must be 1-d and of equal length")
    Y = np.column_stack([_preimage(b) for b in basis])
    with np.errstate(invalid="ignore"):
        prod = Y * coeffs[None, :]
        return _from_preimage(prod.sum(axis=1))


def inner_product(x1, x2):
    y1 = _finite_preimage(x1, "x1")
    y2 = _finite_preimage(x2, "x2")
    if y1.shape != y2.shape:
        raise ValueError(f"shape mismatch: {y1.shape} vs {y2.shape}")
    return float(np.dot(y1, y2))


def norm(x):
    return float(np.sqrt(inner_product(x, x)))


def check_symmetric(S, tol=1e-10):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    scale = max(1.0, float(np.abs(S).max(initial=0.0)))
    if np.abs(S - S.T).max(initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return S


def quadratic_form(S, x, tol=1e-10):
    """``Q(S, x) = <x, S o x>``, which equals ``y^T S y`` for ``y = t^{-1}(x)``."""
    S = check_symmetric(S, tol)
    y = _finite_preimage(x)
    if y.shape != (S.shape[0],):
        raise ValueError(f"x has shape {y.shape}, S is {S.shape}")
    return float(y @ S @ y)
