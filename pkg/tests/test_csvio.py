from causalicm.cate import CateEstimate
from causalicm.csvio import (read_covariates, read_study, write_predictions, write_study)
from causalicm.errors import DataShapeError, UsageError, ValidationError
from helpers import toy_dataset
import numpy as np
from numpy.testing import assert_array_equal
import pytest


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_study_written_and_read_back(tmp_path):
    data = toy_dataset("O", dim=2)
    path = str(tmp_path / "obs.csv")
    write_study(path, data)
    with open(path) as f:
        assert f.readline().strip() == "x1,x2,y,a"
    back = read_study(path, "O")
    assert_array_equal(back.X, data.X)
    assert_array_equal(back.y, data.y)
    assert_array_equal(back.a, data.a)


def test_columns_may_come_in_any_order(tmp_path):
    data = read_study(write(tmp_path, "a,y,x2,x1\n1,0.5,2,1\n0,1.5,4,3\n"), "E")
    assert_array_equal(data.X, [[1.0, 2.0], [3.0, 4.0]])
    assert_array_equal(data.a, [1, 0])


@pytest.mark.parametrize("text, fragment", [
    ("x1,a\n0,1\n", "missing column y"),
    ("x1,y\n0,1\n", "missing column a"),
    ("x2,y,a\n0,1,1\n", "missing column x1"),
    ("x1,y,a\n0,1,1\n0,1\n", "line 3"),
    ("x1,y,a\n0,1,1\n0,abc,1\n", "line 3"),
    ("", "no header"),
])
def test_schema_errors(tmp_path, text, fragment):
    with pytest.raises(ValidationError) as info:
        read_study(write(tmp_path, text), "E")
    assert fragment in info.value.message


def test_non_utf8_file(tmp_path):
    path = tmp_path / "latin1.csv"
    path.write_bytes(b"x1,y,a\n\xff\xfe,1,2\n")
    with pytest.raises(ValidationError) as info:
        read_study(str(path), "E")
    assert "not valid UTF-8" in info.value.message


def test_non_binary_treatment(tmp_path):
    with pytest.raises(DataShapeError):
        read_study(write(tmp_path, "x1,y,a\n0,1,2\n"), "E")


def test_read_covariates(tmp_path):
    path = write(tmp_path, "x1,x2,extra\n1,2,9\n3,4,9\n")
    assert_array_equal(read_covariates(path, 2), [[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(UsageError):
        read_covariates(path, 3)
    with pytest.raises(UsageError):
        read_covariates(str(tmp_path / "absent.csv"))


def test_write_predictions(tmp_path):
    X = np.array([[0.0], [1.0]])
    path = str(tmp_path / "preds.csv")
    write_predictions(path, X, CateEstimate([1.0, 2.0], [0.25, 0.0], 0.9))
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0] == "x1,tau_mean,tau_var,ci_low,ci_high"
    assert lines[2] == "1.0,2.0,0.0,2.0,2.0"
