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

from causalicm.errors import ValidationError
from causalicm.gp import DEFAULT_RESTARTS
from causalicm.kernels import FAMILIES
from causalicm.simgen import TRIAL_TREATMENT_PROBABILITY
from causalicm.tuning import DEFAULT_FOLDS, DEFAULT_GRID, TUNING_MODES

registry = {}


def estimator(*args):
    """Designates CATE estimators. Args is a list of estimator aliases."""

    def decorator(func):
        registry[func.__name__] = (func, False)
        for name in args:
            registry[name] = (func, True)
        return func

    return decorator


def get_estimator(name):
    """Look up a registered estimator by name or alias."""
    try:
        return registry[name][0]
    except KeyError:
        raise ValidationError("Unknown method '{0}'. Known methods are {1}.".format(
            name, humanize_list(estimator_names())))


def estimator_names(aliases=False):
    """Sorted estimator ids, optionally including aliases."""
    return sorted(key for key, (_, alias) in registry.items() if aliases or not alias)


def humanize_list(l):
    """Return a human-readable list."""
    if len(l) == 1:
        return l[0]
    elif len(l) == 2:
        return "{0} and {1}".format(l[0], l[1])
    else:
        return ", ".join(l[:-1]) + ", and " + l[-1]


class MethodSettings(object):
    """Per-invocation settings handed to every estimator."""

    def __init__(self, kernel_family="rbf", rho="auto", seed=0, grid=DEFAULT_GRID,
                 folds=DEFAULT_FOLDS, tuning_mode="refit", restarts=DEFAULT_RESTARTS,
                 treatment_probability=TRIAL_TREATMENT_PROBABILITY, frozen=None):
        if kernel_family not in FAMILIES:
            raise ValidationError("Unknown kernel family '{0}'. Use {1}.".format(
                kernel_family, humanize_list(list(FAMILIES))))
        if tuning_mode not in TUNING_MODES:
            raise ValidationError("Unknown tuning mode '{0}'.".format(tuning_mode))
        if rho != "auto" and not 0.0 <= float(rho) <= 1.0:
            raise ValidationError("rho must lie in [0, 1], got {0}.".format(rho))
        self.kernel_family = kernel_family
        self.rho = rho if rho == "auto" else float(rho)
        self.seed = int(seed)
        self.grid = tuple(grid)
        self.folds = int(folds)
        self.tuning_mode = tuning_mode
        self.restarts = int(restarts)
        self.treatment_probability = float(treatment_probability)
        # (standardizer, offsets, per-arm hyperparameters) from an earlier fit report
        self.frozen = frozen

    def replace(self, **changes):
        fields = dict(self.__dict__)
        fields.update(changes)
        return MethodSettings(**fields)

    def frozen_kwargs(self):
        if self.frozen is None:
            return {}
        standardizer, offsets, hyperparameters = self.frozen
        return {"standardizer": standardizer, "offsets": offsets,
                "hyperparameters": hyperparameters}
