import csv
import json

import numpy as np
import pytest

from translinear.cli import main
from translinear.io import dumps


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def put_json(path, obj):
    path.write_text(dumps(obj))
    return str(path)


@pytest.fixture
def coef(tmp_path):
    return put_json(tmp_path / "A.json", {"p": 2, "q": 3, "A": [[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]],
                                          "names": ["u", "v"]})


def test_eigen_scree(tmp_path):
    T = put_json(tmp_path / "tpdm.json", {"p": 2, "sigma": [[2.0, 1.0], [1.0, 2.0]]})
    assert main(["eigen", "--input", T, "--output-dir", str(tmp_path / "e")]) == 0
    with open(tmp_path / "e" / "scree.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["component", "eigenvalue", "fraction", "cumulative"]
    assert [float(v) for v in rows[1]] == pytest.approx([1, 3.0, 0.75, 0.75])
    assert [float(v) for v in rows[2]] == pytest.approx([2, 1.0, 0.25, 1.0])
    eig = read_json(tmp_path / "e" / "eigen.json")
    assert eig["lambdas"] == pytest.approx([3.0, 1.0])


def test_riskprob_identity_factor(tmp_path):
    T = put_json(tmp_path / "tpdm.json", {"p": 2, "sigma": [[1.0, 0.0], [0.0, 1.0]]})
    assert main(["factorize", "--input", T, "--q", "2", "--seed", "1",
                 "--output-dir", str(tmp_path / "f")]) == 0
    assert read_json(tmp_path / "f" / "factor.json")["converged"] is True
    assert main(["riskprob", "--input", str(tmp_path / "f" / "factor.json"), "--thresholds", "1,1",
                 "--output-dir", str(tmp_path / "r")]) == 0
    risk = read_json(tmp_path / "r" / "risk.json")
    assert risk["joint"] == pytest.approx(0.0, abs=1e-12)
    assert risk["union"] == pytest.approx(2.0, rel=1e-8)


def test_full_pipeline(tmp_path, coef):
    out = tmp_path / "run"
    assert main(["pipeline", "--input", coef, "--seed", "5", "--n", "50000",
                 "--output-dir", str(out)]) == 0
    assert read_json(out / "fac" / "factor.json")["converged"] is True
    man = read_json(out / "manifest.json")
    assert set(man["artifacts"]) >= {"est/tpdm.json", "fac/factor.json", "risk/risk.json"}
    assert man["versions"]["numpy"] == np.__version__
    risk = read_json(out / "risk" / "risk.json")
    assert 0.0 <= risk["joint"] <= risk["union"]


def test_manifest_replay(tmp_path, coef):
    out = tmp_path / "sim"
    assert main(["simulate", "--input", coef, "--seed", "9", "--n", "1000",
                 "--output-dir", str(out)]) == 0
    man = read_json(out / "manifest.json")
    assert man["seed"] == 9 and man["config"]["n"] == 1000
    assert main(["replay", "--input", str(out / "manifest.json"),
                 "--output-dir", str(tmp_path / "again")]) == 0
    assert (out / "sample.csv").read_bytes() == (tmp_path / "again" / "sample.csv").read_bytes()


def test_transform_estimate_project_reconstruct(tmp_path, coef):
    main(["simulate", "--input", coef, "--seed", "2", "--n", "20000", "--output-dir", str(tmp_path)])
    sample = str(tmp_path / "sample.csv")
    assert main(["transform", "--input", sample, "--output-dir", str(tmp_path / "t")]) == 0
    models = read_json(tmp_path / "t" / "marginals.json")["models"]
    assert [m["name"] for m in models] == ["u", "v"]
    assert main(["estimate", "--input", str(tmp_path / "t" / "transformed.csv"),
                 "--output-dir", str(tmp_path / "est")]) == 0
    T = read_json(tmp_path / "est" / "tpdm.json")
    assert T["total_mass"] == 2.0 and T["names"] == ["u", "v"]
    main(["eigen", "--input", str(tmp_path / "est" / "tpdm.json"), "--output-dir", str(tmp_path / "e")])
    eig = str(tmp_path / "e" / "eigen.json")
    assert main(["project", "--input", sample, "--eigen", eig, "--output-dir", str(tmp_path / "p")]) == 0
    assert main(["reconstruct", "--input", sample, "--eigen", eig, "--k", "2",
                 "--output-dir", str(tmp_path / "k")]) == 0
    with open(tmp_path / "k" / "reconstruction.csv") as fh:
        rec = np.array([[float(v) for v in row] for row in list(csv.reader(fh))[1:]])
    with open(sample) as fh:
        orig = np.array([[float(v) for v in row] for row in list(csv.reader(fh))[1:]])
    assert np.allclose(rec, orig, rtol=1e-8)


def test_riskprob_original_scale(tmp_path, coef):
    main(["simulate", "--input", coef, "--seed", "2", "--n", "5000", "--output-dir", str(tmp_path)])
    main(["transform", "--input", str(tmp_path / "sample.csv"), "--output-dir", str(tmp_path / "t")])
    assert main(["riskprob", "--input", coef, "--thresholds", "5,5", "--marginals",
                 str(tmp_path / "t" / "marginals.json"), "--output-dir", str(tmp_path / "r")]) == 0
    risk = read_json(tmp_path / "r" / "risk.json")
    assert risk["original_scale_thresholds"] == [5.0, 5.0]
    assert all(u > 0 for u in risk["thresholds"])


def test_mccheck(tmp_path):
    assert main(["mccheck", "--seed", "0", "--output-dir", str(tmp_path)]) == 0
    assert read_json(tmp_path / "mccheck.json")["all_passed"] is True


@pytest.mark.parametrize("argv", [
    ["estimate", "--input", "does-not-exist.csv"],
    ["simulate", "--input", "x.json"],          # stochastic without --seed
    ["estimate", "--input", "x.csv", "--r0-quantile", "1.5"],
])
def test_errors_are_json(tmp_path, capsys, argv):
    assert main(argv + ["--output-dir", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert {"error", "message", "command"} <= set(err)


def test_not_psd_tpdm_error(tmp_path, capsys):
    T = put_json(tmp_path / "bad.json", {"p": 2, "sigma": [[1.0, 2.0], [2.0, 1.0]]})
    assert main(["eigen", "--input", T, "--output-dir", str(tmp_path)]) == 2
    assert "positive semidefinite" in json.loads(capsys.readouterr().err)["message"]


def test_loss_pipeline_with_dates(tmp_path):
    # same path the financial reproduction takes, on synthetic returns
    rng = np.random.default_rng(3)
    R = rng.standard_t(3.0, size=(5000, 3))
    path = tmp_path / "returns.csv"
    with open(path, "w") as fh:
        fh.write("date,Food,Beer,Smoke\n")
        for i, row in enumerate(R):
            fh.write(f"{19500103 + i}," + ",".join(f"{v:.4f}" for v in row) + "\n")
        fh.write("20160104,,1.0,2.0\n")
    out = tmp_path / "t"
    assert main(["transform", "--input", str(path), "--pipeline", "loss", "--index-col", "date",
                 "--missing", "drop-row", "--output-dir", str(out)]) == 0
    with open(out / "transformed.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["date", "Food", "Beer", "Smoke"] and len(rows) == 5001
    models = read_json(out / "marginals.json")["models"]
    assert all(2.0 < m["alpha"] < 4.5 for m in models)
    assert main(["estimate", "--input", str(out / "transformed.csv"), "--index-col", "date",
                 "--r0-quantile", "0.99", "--output-dir", str(tmp_path / "e")]) == 0
    assert read_json(tmp_path / "e" / "tpdm.json")["total_mass"] == 3.0
