"""Command-line front end: ``translinear <subcommand> [options]``.

Each subcommand reads its input, writes its artifacts into ``--output-dir``
together with a ``manifest.json`` recording the full configuration, input
hashes and library versions. Failures exit nonzero with a JSON error object
on stderr.
"""
import argparse
import json
import logging
import os
import platform
import sys
from dataclasses import dataclass, asdict, replace

import numpy as np

from . import __version__, _accel
from ._rng import substream
from .construct import (CoefMatrix, measure_joint_exceedance, measure_union_exceedance,
                        simulate_construction, simulate_max_linear)
from .cpfact import CpFactorization, cp_factorize
from .io import ingest_csv, sha256, write_csv, write_json
from .marginals import MarginalModel, fit_marginals
from .montecarlo import run_suite
from .spectral import EigenBasis, eigen_decompose, project, reconstruct, scree
from .tpdm import Tpdm, estimate_tpdm

log = logging.getLogger("translinear")

STOCHASTIC = {"simulate", "factorize", "mccheck", "pipeline"}
PATH_FIELDS = ("input", "eigen", "marginals")


@dataclass
class RunConfig:
    command: str
    input: str = None
    output_dir: str = "."
    r0_quantile: float = 0.95
    r0: float = None
    mass_mode: str = "known"
    mass: float = None
    pipeline: str = "frechet"
    tail_quantile: float = 0.99
    missing: str = "error"
    index_col: str = None
    eigen: str = None
    k: int = None
    q: int = None
    tol: float = 1e-8
    max_iter: int = 5000
    restarts: int = 20
    seed: int = None
    n: int = 10000
    max_linear: bool = False
    thresholds: list = None
    marginals: str = None

    def validate(self):
        if not 0.0 < self.r0_quantile < 1.0:
            raise ValueError("--r0-quantile must lie in (0, 1)")
        if self.command in STOCHASTIC and self.seed is None:
            raise ValueError(f"'{self.command}' is stochastic and needs --seed")
        if self.command == "reconstruct" and self.k is None:
            raise ValueError("--k is required")
        if self.command != "mccheck" and self.input is None:
            raise ValueError("--input is required")


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _load_tpdm(path):
    return Tpdm.from_dict(_read_json(path))


def _load_factor(path):
    d = _read_json(path)
    if "A" not in d:
        raise ValueError(f"{path} does not contain a coefficient matrix 'A'")
    A = np.asarray(d["A"], dtype=float).reshape(int(d["p"]), int(d["q"]))
    # factorizations may carry unused all-zero columns; they contribute no mass
    return CoefMatrix(A[:, (A > 0).any(axis=0)])


def _matrix_rows(M):
    return [[float(v) for v in row] for row in np.atleast_2d(M)]


def cmd_transform(cfg, out):
    ds = ingest_csv(cfg.input, cfg.missing, cfg.index_col)
    X, models = fit_marginals(ds.values, cfg.pipeline, cfg.tail_quantile, ds.names)
    write_csv(os.path.join(out, "transformed.csv"), ds.names, _matrix_rows(X), ds.index,
              cfg.index_col or "index")
    write_json(os.path.join(out, "marginals.json"),
               {"pipeline": cfg.pipeline, "names": ds.names,
                "models": [m.to_dict() for m in models]})
    return ["transformed.csv", "marginals.json"]


def cmd_estimate(cfg, out):
    ds = ingest_csv(cfg.input, cfg.missing, cfg.index_col)
    if cfg.mass_mode == "known":
        mass = float(ds.p) if cfg.mass is None else cfg.mass
    else:
        mass = "empirical"
    kw = {"r0": cfg.r0} if cfg.r0 is not None else {"quantile": cfg.r0_quantile}
    T = estimate_tpdm(ds.values, mass=mass, names=ds.names, **kw)
    write_json(os.path.join(out, "tpdm.json"), T.to_dict())
    return ["tpdm.json"]


def cmd_eigen(cfg, out):
    basis = eigen_decompose(_load_tpdm(cfg.input))
    write_json(os.path.join(out, "eigen.json"), basis.to_dict())
    write_csv(os.path.join(out, "scree.csv"), ["component", "eigenvalue", "fraction", "cumulative"],
              scree(basis))
    return ["eigen.json", "scree.csv"]


def _basis(cfg):
    if cfg.eigen is None:
        raise ValueError("--eigen is required")
    return EigenBasis.from_dict(_read_json(cfg.eigen))


def cmd_project(cfg, out):
    ds = ingest_csv(cfg.input, cfg.missing, cfg.index_col)
    V = project(ds.values, _basis(cfg))
    write_csv(os.path.join(out, "scores.csv"), [f"pc{i + 1}" for i in range(V.shape[1])],
              _matrix_rows(V), ds.index, cfg.index_col or "index")
    return ["scores.csv"]


def cmd_reconstruct(cfg, out):
    ds = ingest_csv(cfg.input, cfg.missing, cfg.index_col)
    basis = _basis(cfg)
    Xk = reconstruct(project(ds.values, basis), basis, cfg.k)
    write_csv(os.path.join(out, "reconstruction.csv"), ds.names, _matrix_rows(Xk), ds.index,
              cfg.index_col or "index")
    return ["reconstruction.csv"]


def cmd_factorize(cfg, out):
    T = _load_tpdm(cfg.input)
    fac = cp_factorize(T, q=cfg.q, tol=cfg.tol, max_iter=cfg.max_iter, restarts=cfg.restarts,
                       seed=substream(cfg.seed, "factorize"))
    d = fac.to_dict()
    d["names"] = list(T.names) if T.names else None
    write_json(os.path.join(out, "factor.json"), d)
    if not fac.converged:
        raise RuntimeError(f"factorization did not converge (residual {fac.residual:.3g}); "
                           "factor.json holds the best attempt")
    return ["factor.json"]


def cmd_simulate(cfg, out):
    A = _load_factor(cfg.input)
    sim = simulate_max_linear if cfg.max_linear else simulate_construction
    sample = sim(A, cfg.n, substream(cfg.seed, "simulate"))
    names = _read_json(cfg.input).get("names") or [f"x{i}" for i in range(A.shape[0])]
    write_csv(os.path.join(out, "sample.csv"), names, _matrix_rows(sample.values))
    return ["sample.csv"]


def _thresholds(cfg, p):
    if cfg.thresholds is None:
        raise ValueError("--thresholds is required")
    u = np.asarray(cfg.thresholds, dtype=float)
    if u.size == 1:
        u = np.full(p, u[0])
    if cfg.marginals is not None:
        models = [MarginalModel.from_dict(m) for m in _read_json(cfg.marginals)["models"]]
        if len(models) != p:
            raise ValueError("marginal models do not match the factor dimension")
        u = np.array([float(m.apply(np.array([ui]))[0]) for m, ui in zip(models, u)])
    return u


def cmd_riskprob(cfg, out):
    A = _load_factor(cfg.input)
    u = _thresholds(cfg, A.shape[0])
    joint = measure_joint_exceedance(A, u)
    union = measure_union_exceedance(A, u)
    write_json(os.path.join(out, "risk.json"), {
        "thresholds": u.tolist(),
        "original_scale_thresholds": cfg.thresholds if cfg.marginals else None,
        "joint": joint,
        "union": union,
        # with unit normalization nu(C) is itself the tail probability estimate
        "probability_joint": joint,
        "probability_union": min(union, 1.0),
    })
    return ["risk.json"]


def cmd_mccheck(cfg, out):
    results = run_suite(cfg.seed, cfg.n)
    for r in results:
        log.info(r.line())
    write_json(os.path.join(out, "mccheck.json"),
               {"n": cfg.n, "checks": [r.to_dict() for r in results],
                "all_passed": all(r.passed for r in results)})
    if not all(r.passed for r in results):
        failed = [r.name for r in results if not r.passed]
        raise RuntimeError(f"Monte Carlo checks failed: {', '.join(failed)}")
    return ["mccheck.json"]


def cmd_pipeline(cfg, out):
    """simulate -> estimate -> eigen -> factorize -> riskprob, one subdirectory each."""
    def step(command, sub, **kw):
        run(replace(cfg, command=command, output_dir=os.path.join(out, sub), **kw))
        return sub

    sim = step("simulate", "sim")
    est = step("estimate", "est", input=os.path.join(out, sim, "sample.csv"))
    tp = os.path.join(out, est, "tpdm.json")
    eig = step("eigen", "eig", input=tp)
    fac = step("factorize", "fac", input=tp)
    risk = step("riskprob", "risk", input=os.path.join(out, fac, "factor.json"),
                thresholds=cfg.thresholds or [1.0])
    return [os.path.join(sim, "sample.csv"), os.path.join(est, "tpdm.json"),
            os.path.join(eig, "eigen.json"), os.path.join(eig, "scree.csv"),
            os.path.join(fac, "factor.json"), os.path.join(risk, "risk.json")]


def config_from_manifest(path, output_dir):
    """Rebuild the ``RunConfig`` recorded in a manifest; paths are relative to it."""
    base = os.path.dirname(os.path.abspath(path))
    m = _read_json(path)
    config = dict(m["config"])
    for key in PATH_FIELDS:
        if config.get(key) is not None:
            config[key] = os.path.normpath(os.path.join(base, config[key]))
    return RunConfig(output_dir=output_dir, **config), m


def cmd_replay(cfg, out):
    """Regenerate a run from its manifest alone and compare artifact hashes."""
    rerun, m = config_from_manifest(cfg.input, out)
    run(rerun)
    fresh = _read_json(os.path.join(out, "manifest.json"))["artifacts"]
    status = {a: {"expected": h, "actual": fresh.get(a), "match": fresh.get(a) == h}
              for a, h in m["artifacts"].items()}
    write_json(os.path.join(out, "replay.json"), {"manifest": os.path.relpath(cfg.input, out),
                                                  "artifacts": status})
    bad = [a for a, st in status.items() if not st["match"]]
    if bad:
        raise RuntimeError(f"replayed artifacts differ: {', '.join(bad)}")
    return None


COMMANDS = {
    "transform": cmd_transform,
    "estimate": cmd_estimate,
    "eigen": cmd_eigen,
    "project": cmd_project,
    "reconstruct": cmd_reconstruct,
    "factorize": cmd_factorize,
    "simulate": cmd_simulate,
    "riskprob": cmd_riskprob,
    "mccheck": cmd_mccheck,
    "pipeline": cmd_pipeline,
    "replay": cmd_replay,
}


def _versions():
    v = {"translinear": __version__, "numpy": np.__version__,
         "python": platform.python_version(), "numba_enabled": _accel.USE_NUMBA}
    if _accel.HAVE_NUMBA:
        v["numba"] = _accel.nb.__version__
    return v


def write_manifest(cfg, out, artifacts):
    """Record everything needed to regenerate the artifacts in ``out``.

    Input paths are stored relative to ``out`` so that a run directory can be
    moved, and two runs in different directories produce identical bytes.
    """
    config = asdict(cfg)
    config.pop("output_dir")
    inputs = {}
    for key in PATH_FIELDS:
        path = getattr(cfg, key)
        if path is not None:
            config[key] = os.path.relpath(path, out).replace(os.sep, "/")
            inputs[key] = {"path": config[key], "sha256": sha256(path)}
    write_json(os.path.join(out, "manifest.json"), {
        "command": cfg.command,
        "config": config,
        "seed": cfg.seed,
        "inputs": inputs,
        "artifacts": {a: sha256(os.path.join(out, a)) for a in artifacts},
        "versions": _versions(),
    })


def _floats(s):
    return [float(v) for v in s.split(",") if v.strip()]


def build_parser():
    ap = argparse.ArgumentParser(prog="translinear", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--input", help="input CSV or JSON artifact")
        p.add_argument("--output-dir", default=".", help="directory for artifacts")
        p.add_argument("--missing", choices=["error", "drop-row"], default="error")
        p.add_argument("--index-col", help="label column (e.g. a date) excluded from values")
        p.add_argument("--seed", type=int)
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    p = add("transform", "marginal preprocessing to unit-scale tail index 2")
    p.add_argument("--pipeline", choices=["frechet", "loss"], default="frechet")
    p.add_argument("--tail-quantile", type=float, default=0.99)

    p = add("estimate", "estimate the TPDM from preprocessed data")
    p.add_argument("--r0-quantile", type=float, default=0.95)
    p.add_argument("--r0", type=float, help="absolute radial threshold (overrides quantile)")
    p.add_argument("--mass-mode", choices=["known", "empirical"], default="known")
    p.add_argument("--mass", type=float, help="known total mass (default p)")

    add("eigen", "eigendecomposition and scree table of a TPDM")

    p = add("project", "extremal principal component scores")
    p.add_argument("--eigen", help="eigen.json")

    p = add("reconstruct", "truncated basis reconstruction of observations")
    p.add_argument("--eigen", help="eigen.json")
    p.add_argument("--k", type=int)

    p = add("factorize", "completely positive factorization of a TPDM")
    p.add_argument("--q", type=int)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--restarts", type=int, default=20)

    p = add("simulate", "simulate A o Z from a factor")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--max-linear", action="store_true")

    p = add("riskprob", "limit measures of joint and union exceedance regions")
    p.add_argument("--thresholds", type=_floats, help="comma-separated thresholds a,b,c,...")
    p.add_argument("--marginals", help="marginals.json; thresholds are then on the original scale")

    p = add("mccheck", "Monte Carlo invariant suite")
    p.add_argument("--n", type=int, default=100000)

    p = add("pipeline", "simulate, estimate, eigen, factorize and riskprob in one run")
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--max-linear", action="store_true")
    p.add_argument("--r0-quantile", type=float, default=0.95)
    p.add_argument("--mass-mode", choices=["known", "empirical"], default="empirical")
    p.add_argument("--mass", type=float)
    p.add_argument("--q", type=int)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--thresholds", type=_floats, default=[1.0])

    add("replay", "regenerate a run from its manifest.json and verify artifact hashes")
    return ap


def _config(args):
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(args).items() if k in fields})


def run(cfg):
    """Validate ``cfg``, run its subcommand and write the manifest."""
    cfg.validate()
    os.makedirs(cfg.output_dir, exist_ok=True)
    artifacts = COMMANDS[cfg.command](cfg, cfg.output_dir)
    if artifacts is not None:
        write_manifest(cfg, cfg.output_dir, artifacts)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = _config(args)
    try:
        run(cfg)
    except Exception as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": cfg.command}
        sys.stderr.write(json.dumps(err) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
