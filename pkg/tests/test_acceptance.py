"""Acceptance criteria, one test each, at their stated tolerances.

Every test prints a single ``[PASS]`` / ``[FAIL]`` line (``[SKIP]`` for the
data-dependent reproduction when the data are absent) before asserting.
Run with ``pytest tests/test_acceptance.py -v``.
"""
import filecmp
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from translinear import montecarlo as mc
from translinear._rng import substream
from translinear.cli import main
from translinear.construct import (mc_limit_measure, measure_joint_exceedance,
                                   measure_union_exceedance, simulate_construction,
                                   tpdm_of_construction)
from translinear.cpfact import construct_from_tpdm, cp_factorize
from translinear.io import ingest_csv
from translinear.marginals import ecdf_frechet_transform, fit_marginals, hill_estimate
from translinear.spectral import eigen_decompose, pc_tpdm_check, project, reconstruct
from translinear.tpdm import estimate_tpdm
from translinear.xspace import inverse_transform, transform

FF30_ENV = "TRANSLINEAR_FF30_CSV"
FF30_DEFAULT = Path(__file__).resolve().parents[1] / "data" / "ff30_daily.csv"


@pytest.fixture
def report(capsys):
    def emit(tag, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {tag}: {detail}")
        return ok
    return emit


def test_c01_transform(report):
    t0 = time.perf_counter()
    y = np.linspace(-30, 30, 200001)
    back = inverse_transform(transform(y))
    rel = float((np.abs(back - y) / np.maximum(np.abs(y), 1e-300)).max())
    zero = abs(float(transform(0.0)) - math.log(2.0))
    big = np.linspace(30, 700, 100001)
    neutral = float(np.abs(transform(big) - big).max())
    dt = time.perf_counter() - t0
    ok = rel <= 1e-10 and zero <= 1e-15 and neutral < 1e-12 and dt < 1.0
    report("C1 transform", ok, f"roundtrip rel {rel:.2e}, |t(0)-log2| {zero:.1e}, "
                               f"tail {neutral:.1e}, {dt:.3f}s")
    assert ok


def _tpdm_oracle(A):
    """Sum over columns of outer products of the nonnegative part, column by column."""
    p, q = A.shape
    S = np.zeros((p, p))
    for j in range(q):
        a = np.array([max(v, 0.0) for v in A[:, j]])
        S += np.outer(a, a)
    return S


def test_c02_closed_form_tpdm(report):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        p, q = rng.integers(1, 21, size=2)
        A = rng.normal(size=(p, q))
        A[rng.integers(p), :] = np.abs(A[rng.integers(p), :]) + 0.1  # every column usable
        S = tpdm_of_construction(A).sigma
        O = _tpdm_oracle(A)
        worst = max(worst, float(np.abs(S - O).max() / max(1.0, np.abs(O).max())))
    dt = time.perf_counter() - t0
    ok = worst <= 16 * np.finfo(float).eps and dt < 1.0
    report("C2 closed-form TPDM", ok, f"max scaled deviation {worst:.1e} over 100 matrices, {dt:.3f}s")
    assert ok


def criterion3_matrices():
    rng = np.random.default_rng(2024)
    return [mc.BASE_A] + [rng.random(shape) for shape in ((2, 6), (3, 8), (4, 7), (5, 8))]


def test_c03_estimator_consistency(report):
    t0 = time.perf_counter()
    res = [mc.check_estimator(A, 200000, substream(3, f"c3/{i}"), quantile=0.98, tol=0.1)
           for i, A in enumerate(criterion3_matrices())]
    dt = time.perf_counter() - t0
    worst = max(r.value for r in res)
    ok = all(r.passed for r in res) and dt < 60
    report("C3 estimator consistency", ok,
           f"max abs error {worst:.3f} (tol 0.1) over {len(res)} unit-mass matrices, {dt:.1f}s")
    assert ok


def test_c04_sum_and_scalar_limits(report):
    A = np.array([[1.0, 0.5], [0.5, 1.0]])
    res = [mc.check_sum(A, np.array([[0.5], [1.0]]), 100000, 4, tol=0.15),
           mc.check_scalar(A, 0.5, 100000, 4, tol=0.15),
           mc.check_scalar(A, 2.0, 100000, 4, tol=0.15),
           mc.check_negative_scalar(mc.BASE_A, 100000, 4, a=-1.0)]
    ok = all(r.passed for r in res)
    detail = "; ".join(f"{r.name} {r.value:.3g}" for r in res[:3]) + f"; {res[3].detail}"
    report("C4 sum/scalar Monte Carlo", ok, detail)
    assert ok


def test_c05_basis_diagonalizes(report):
    rng = np.random.default_rng(5)
    worst_d = worst_t = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 31))
        G = rng.random((p, int(rng.integers(1, 2 * p + 1))))
        S = G @ G.T
        B = eigen_decompose(S)
        worst_d = max(worst_d, float(np.abs(pc_tpdm_check(S, B) - np.diag(B.lambdas)).max()))
        worst_t = max(worst_t, abs(float(B.lambdas.sum() - np.trace(S))))
    ok = worst_d <= 1e-8 and worst_t <= 1e-8
    report("C5 U^T Sigma U = diag", ok, f"off-diag {worst_d:.1e}, trace {worst_t:.1e}")
    assert ok


def test_c06_reconstruction(report):
    rng = np.random.default_rng(6)
    p = 10
    G = rng.random((p, 15))
    B = eigen_decompose(G @ G.T)
    X = transform(rng.normal(scale=4, size=(1000, p)))
    V = project(X, B)
    full = float(np.abs(reconstruct(V, B, p) - X).max())
    Y = inverse_transform(X)
    errs = np.array([np.linalg.norm(Y - inverse_transform(reconstruct(V, B, k)), axis=1)
                     for k in range(1, p + 1)])
    rises = float(np.diff(errs, axis=0).max())
    ok = full <= 1e-8 and rises <= 1e-12 * float(np.abs(Y).max())
    report("C6 reconstruction", ok, f"k=p error {full:.1e}, max increase in k {rises:.1e}")
    assert ok


def test_c07_cp_factorization(report):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    ok_count, min_entry, worst_rt = 0, np.inf, 0.0
    for i in range(50):
        p = int(rng.integers(2, 11))
        q = int(rng.integers(1, 2 * p + 1))
        S = (G := rng.random((p, q))) @ G.T
        fac = cp_factorize(S, tol=1e-8, restarts=20, seed=substream(7, f"c7/{i}"))
        ok_count += fac.residual <= 1e-8
        min_entry = min(min_entry, float(fac.A.min()))
        if fac.converged:
            A = construct_from_tpdm(S, seed=substream(7, f"c7/{i}"))
            worst_rt = max(worst_rt, float(np.linalg.norm(tpdm_of_construction(A).sigma - S)))
    dt = time.perf_counter() - t0
    ok = ok_count >= 45 and min_entry >= -1e-10 and worst_rt <= 1e-8 and dt < 120
    report("C7 CP factorization", ok, f"{ok_count}/50 residual <= 1e-8, min entry {min_entry:.1e}, "
                                      f"round trip {worst_rt:.1e}, {dt:.1f}s")
    assert ok


RISK_PAIRS = [
    (np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]]), (1.0, 1.0)),
    (np.array([[2.0, 1.0], [1.0, 2.0]]), (1.0, 2.0)),
    (np.array([[3.0, 1.0], [4.0, 2.0]]), (2.0, 3.0)),
    (np.array([[1.0, 1.0, 0.5], [1.0, 0.5, 1.0]]), (1.0, 1.0)),
    (np.array([[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0]]), (1.0, 1.0, 1.0)),
]


def test_c08_risk_measures(report):
    worst, ordered = 0.0, True
    for i, (A, u) in enumerate(RISK_PAIRS):
        exact = measure_joint_exceedance(A, u), measure_union_exceedance(A, u)
        est = mc_limit_measure(A, u, n=10**6, draws=10**6, seed=substream(8, f"c8/{i}"))
        worst = max(worst, *(abs(e / x - 1.0) for e, x in zip(est, exact)))
        ordered &= exact[0] <= exact[1]
    ok = worst <= 0.15 and ordered
    report("C8 risk measures", ok, f"max relative error {worst:.3f} (tol 0.15), joint <= union {ordered}")
    assert ok


def test_c09_hill_and_marginals(report):
    n = 10000
    grid = (np.arange(1, n + 1) / n) ** -0.5
    a_grid = hill_estimate(grid, k=100)
    A = np.array([[1.0, 0.5, 0.0], [0.2, 1.0, 0.7]])
    X = simulate_construction(A, 100000, substream(9, "c9/frechet")).values
    Yf, _ = fit_marginals(X, "frechet")
    rng = np.random.default_rng(substream(9, "c9/loss"))
    returns = rng.standard_t(3.0, size=(100000, 2)) * 0.01
    Yl, _ = fit_marginals(returns, "loss", quantile=0.99)
    post = [hill_estimate(c, quantile=0.99) for c in np.column_stack([Yf, Yl]).T]
    x = np.random.default_rng(9).normal(size=100001)
    g, _ = ecdf_frechet_transform(x)
    med = abs(float(np.median(g)) - math.log(2.0) ** -0.5)
    ok = abs(a_grid - 2.0) <= 0.05 and all(1.8 <= a <= 2.2 for a in post) and med <= 1e-10
    report("C9 Hill/marginals", ok, f"grid {a_grid:.4f}, post-pipeline {min(post):.3f}..{max(post):.3f}, "
                                    f"median deviation {med:.1e}")
    assert ok


def test_c10_financial_reproduction(report, capsys):
    path = Path(os.environ.get(FF30_ENV, FF30_DEFAULT))
    if not path.exists():
        with capsys.disabled():
            print(f"\n[SKIP] C10 financial reproduction: no data at {path} "
                  f"(see scripts/fetch_french_30.py or set {FF30_ENV})")
        pytest.skip("30-industry daily returns not available")
    ds = ingest_csv(path, missing="drop-row", index_col="date")
    keep = np.array([19500101 <= int(d) <= 20151231 for d in ds.index])
    R = ds.values[keep]
    Y, models = fit_marginals(R, "loss", quantile=0.99)
    T = estimate_tpdm(Y, quantile=0.99, unit_scale=True)
    frac = eigen_decompose(T).fractions()[:3]
    alphas = [m.alpha for m in models]
    target = np.array([0.680, 0.052, 0.036])
    ok = (np.abs(frac - target).max() <= 0.02 and min(alphas) >= 2.6 and max(alphas) <= 4.0)
    report("C10 financial reproduction", ok,
           f"n={R.shape[0]}, fractions {np.round(frac, 3).tolist()}, "
           f"Hill {min(alphas):.2f}..{max(alphas):.2f}")
    assert ok


def test_c11_determinism(report, tmp_path, monkeypatch):
    coef = '{"p": 3, "q": 4, "A": [[1, 0.5, 0, 0.2], [0, 1, 0.5, 0.2], [0.3, 0, 1, 0.2]]}\n'
    for run in ("run1", "run2"):
        d = tmp_path / run
        d.mkdir()
        (d / "A.json").write_text(coef)
        monkeypatch.chdir(d)
        assert main(["pipeline", "--input", "A.json", "--seed", "11", "--n", "50000",
                     "--output-dir", "out"]) == 0
    cmp = filecmp.dircmp(tmp_path / "run1" / "out", tmp_path / "run2" / "out")

    def identical(c):
        same = not (c.left_only or c.right_only)
        _, mismatch, errors = filecmp.cmpfiles(c.left, c.right, c.common_files, shallow=False)
        return same and not mismatch and not errors and all(identical(s) for s in c.subdirs.values())

    files = sorted(str(p.relative_to(tmp_path / "run1" / "out"))
                   for p in (tmp_path / "run1" / "out").rglob("*") if p.is_file())
    ok = identical(cmp)
    report("C11 determinism", ok, f"{len(files)} artifacts byte-identical across two runs")
    assert ok
