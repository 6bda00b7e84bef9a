import json
import logging

import numpy as np
import pytest

from translinear.io import IngestError, dumps, fmt_float, ingest_csv, write_csv


def write(path, text):
    path.write_text(text)
    return path


def test_basic(tmp_path):
    body = "a,b,c\n" + "\n".join(f"{i},{i + 0.5},{2 * i}" for i in range(10)) + "\n"
    ds = ingest_csv(write(tmp_path / "d.csv", body))
    assert (ds.n, ds.p) == (10, 3)
    assert ds.names == ["a", "b", "c"]


def test_drop_row(tmp_path, caplog):
    body = "a,b\n1,2\n3,\n5,6\n"
    path = write(tmp_path / "d.csv", body)
    with caplog.at_level(logging.WARNING):
        ds = ingest_csv(path, missing="drop-row")
    assert ds.n == 2
    assert "dropped 1" in caplog.text
    with pytest.raises(IngestError):
        ingest_csv(path)


def test_non_numeric(tmp_path):
    path = write(tmp_path / "d.csv", "a,b\n1,2\nx,4\n")
    with pytest.raises(IngestError, match="line 3"):
        ingest_csv(path)
    assert ingest_csv(path, missing="drop-row").n == 1


def test_ragged(tmp_path):
    with pytest.raises(IngestError, match="line 3"):
        ingest_csv(write(tmp_path / "d.csv", "a,b\n1,2\n3,4,5\n"))


def test_index_col(tmp_path):
    ds = ingest_csv(write(tmp_path / "d.csv", "date,a\n19500103,1.5\n19500104,-2\n"),
                    index_col="date")
    assert ds.names == ["a"] and ds.index == ["19500103", "19500104"]
    assert np.array_equal(ds.values, [[1.5], [-2.0]])


def test_float_format():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(3.0) == "3.0"
    assert fmt_float(1e300) == "1.0000000000000001e+300"
    assert float(fmt_float(np.pi)) == np.pi
    assert fmt_float(np.inf) == "null"


def test_dumps_is_valid_json():
    obj = {"a": [1.0, 2, None], "b": {"c": np.array([[0.5, 1.5]])}, "d": True, "e": "x\"y"}
    back = json.loads(dumps(obj))
    assert back == {"a": [1.0, 2, None], "b": {"c": [[0.5, 1.5]]}, "d": True, "e": "x\"y"}


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "o.csv"
    vals = np.random.default_rng(0).normal(size=(4, 2))
    write_csv(path, ["x", "y"], vals.tolist(), ["r1", "r2", "r3", "r4"], "id")
    ds = ingest_csv(path, index_col="id")
    assert np.array_equal(ds.values, vals)
