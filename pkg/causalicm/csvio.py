# Copyright (c) 2026 The causalicm developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this software
# and associated documentation files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to permit persons to whom the
# Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all copies or
# substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING
# BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
# DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

"""Numeric CSV files: study datasets (x1..xp, y, a), test covariates and predictions."""

from causalicm.errors import DataShapeError, UsageError, ValidationError
from causalicm.simgen import Dataset
import csv
import numpy as np
import re

covariate_regex = re.compile(r'^x(?P<index>[1-9]\d*)$')


def read_table(path):
    """Header and float rows of a CSV file. A malformed row names its line number."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            lines = list(csv.reader(f))
    except OSError as e:
        raise UsageError("Cannot read {0}: {1}".format(path, e.strerror))
    except (UnicodeDecodeError, csv.Error) as e:
        raise ValidationError("{0} is not valid UTF-8 CSV: {1}".format(path, e))
    if not lines or not lines[0]:
        raise ValidationError("{0} has no header row.".format(path))
    header = [name.strip() for name in lines[0]]
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        if len(line) != len(header):
            raise ValidationError("{0}, line {1}: expected {2} fields, found {3}.".format(
                path, number, len(header), len(line)))
        try:
            rows.append([float(field) for field in line])
        except ValueError:
            raise ValidationError("{0}, line {1}: non-numeric field.".format(path, number))
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def covariate_columns(header, path, dim=None):
    """Indices of the x1..xp columns in order; a gap names the missing column."""
    found = {}
    for i, name in enumerate(header):
        m = covariate_regex.match(name)
        if m:
            found[int(m.group("index"))] = i
    p = max(found) if found else 0
    if dim is not None and 0 < p != dim:
        raise UsageError("{0} has {1} covariates; expected {2}.".format(path, p, dim))
    for j in range(1, max(p, 1) + 1):
        if j not in found:
            raise ValidationError("{0}: missing column x{1}.".format(path, j))
    return [found[j] for j in range(1, p + 1)]


def read_study(path, study):
    """Dataset from a file with columns x1..xp, y and a."""
    header, table = read_table(path)
    for name in ("y", "a"):
        if name not in header:
            raise ValidationError("{0}: missing column {1}.".format(path, name))
    X = table[:, covariate_columns(header, path)]
    a = table[:, header.index("a")]
    if not np.all((a == 0) | (a == 1)):
        raise DataShapeError("{0}: treatment column a must hold 0 or 1.".format(path))
    return Dataset(X, table[:, header.index("y")], a.astype(int), study)


def read_covariates(path, dim=None):
    header, table = read_table(path)
    return table[:, covariate_columns(header, path, dim)]


def write_study(path, dataset):
    header = ["x{0}".format(j + 1) for j in range(dataset.dim)] + ["y", "a"]
    rows = [[_fmt(v) for v in x] + [_fmt(y), str(a)]
            for x, y, a in zip(dataset.X, dataset.y, dataset.a)]
    write_rows(path, header, rows)


def write_predictions(path, X, estimate):
    header = (["x{0}".format(j + 1) for j in range(X.shape[1])]
              + ["tau_mean", "tau_var", "ci_low", "ci_high"])
    rows = [[_fmt(v) for v in x] + [_fmt(p.mean), _fmt(p.variance), _fmt(p.ci_low),
                                    _fmt(p.ci_high)]
            for x, p in zip(X, estimate)]
    write_rows(path, header, rows)


def write_rows(path, header, rows):
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise UsageError("Cannot write {0}: {1}".format(path, e.strerror))


def _fmt(value):
    # repr gives the shortest string that reads back to the same float
    return repr(float(value))
