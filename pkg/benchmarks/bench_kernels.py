"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

The first numba call compiles (or loads from the on-disk cache); it is run
once before timing. Results are printed as a table of best-of-``repeat``
wall times and the speedup of the numba path.
"""
import argparse
import timeit

import numpy as np

from translinear import _accel, _kernels as K


def cases(n, rng):
    A = rng.random((5, 10))
    Z = rng.pareto(2.0, size=(n, 10)) + 1.0
    X = K._translinear_rows_numpy(A, Z)
    r = np.sqrt(np.einsum("ij,ij->i", X, X))
    r0 = float(np.quantile(r, 0.98))
    u = np.full(5, float(np.quantile(X, 0.99)))
    y = rng.normal(scale=10, size=n)
    G = rng.random((10, 20))
    S = G @ G.T
    lam, U = np.linalg.eigh(S)
    B = np.zeros((10, 20))
    B[:, :10] = U * np.sqrt(np.clip(lam, 0, None))
    Q, _ = np.linalg.qr(rng.normal(size=(20, 20)))
    Bt = np.ascontiguousarray(B.T)
    return {
        "softplus": (y,),
        "softplus_inv": (K._softplus_numpy(y),),
        "translinear_rows": (A, Z),
        "max_linear_rows": (A, Z),
        "angular_moments": (X, r, r0),
        "count_exceed": (X, u, True),
        "cp_iterate": (B, Bt, Q, S, 0.0, 200),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, call_args in cases(args.n, rng).items():
        f_np = getattr(K, f"_{name}_numpy")
        f_nb = getattr(K, f"_{name}_numba")
        f_nb(*call_args)  # compile or load cache
        t_np = min(timeit.repeat(lambda: f_np(*call_args), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: f_nb(*call_args), number=1, repeat=args.repeat))
        print(f"{name:<18}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.2f}")


if __name__ == "__main__":
    main()
