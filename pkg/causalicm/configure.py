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

from causalicm.errors import UsageError, ValidationError
from causalicm.harness import OVERLAP_LEVELS, SWEEP_KINDS, BenchmarkConfig
from causalicm.kernels import FAMILIES
from causalicm.simgen import SCENARIOS, SimScenario
from causalicm.tuning import TUNING_MODES
import json
import logging
import numbers
import os

FIELDS = ("scenario", "methods", "replications", "rho", "grid_size", "seed", "kernel_family",
          "rho_grid", "folds", "tuning_mode", "restarts", "level", "sweeps")
SCENARIO_FIELDS = ("id", "pool_size", "n_obs", "selection_scale")
OUTPUT_DIR_VARIABLE = "CAUSALICM_OUTPUT_DIR"


def output_dir(default):
    """The output directory, unless overridden by the environment."""
    return os.environ.get(OUTPUT_DIR_VARIABLE) or default


class Configurator(object):
    """Handles the JSON benchmark configuration."""

    def __init__(self, file_path):
        self.file_path = file_path
        self.logger = logging.getLogger("CausalICM")

    def get_settings(self):
        """Load the configuration blob from the file."""
        try:
            with open(self.file_path, "r") as f:
                blob = json.load(f)
        except FileNotFoundError:
            raise ValidationError("No configuration file at {0}.".format(self.file_path))
        except OSError as e:
            raise UsageError("Cannot read {0}: {1}".format(self.file_path, e.strerror))
        except ValueError as e:
            raise ValidationError("Configuration file is formatted incorrectly: {0}".format(e))
        if not isinstance(blob, dict):
            raise ValidationError("The configuration must be a JSON object.", "")
        return blob

    def load(self):
        return self.verify(self.get_settings())

    def verify(self, blob):
        """Validate every field and build the BenchmarkConfig. The first bad field is reported
        with its JSON pointer."""
        for key in blob:
            if key not in FIELDS:
                raise ValidationError("Unknown field.", "/" + key)
        if "scenario" not in blob:
            raise ValidationError("Missing required field.", "/scenario")
        kwargs = {"scenario": self.verify_scenario(blob["scenario"])}
        if "methods" in blob:
            methods = blob["methods"]
            if not isinstance(methods, list) or not methods:
                raise ValidationError("Expected a non-empty list of method ids.", "/methods")
            for i, method in enumerate(methods):
                if not isinstance(method, str):
                    raise ValidationError("Expected a method id.", "/methods/{0}".format(i))
            kwargs["methods"] = methods
        for key, low in (("replications", 1), ("grid_size", 2), ("folds", 2), ("restarts", 1)):
            if key in blob:
                kwargs[key] = _integer(blob[key], "/" + key, low)
        if "seed" in blob:
            kwargs["seed"] = _integer(blob["seed"], "/seed", 0)
        if "rho" in blob:
            kwargs["rho"] = (blob["rho"] if blob["rho"] == "auto"
                             else _unit(blob["rho"], "/rho"))
        if "kernel_family" in blob:
            kwargs["kernel_family"] = _choice(blob["kernel_family"], FAMILIES, "/kernel_family")
        if "tuning_mode" in blob:
            kwargs["tuning_mode"] = _choice(blob["tuning_mode"], TUNING_MODES, "/tuning_mode")
        if "rho_grid" in blob:
            kwargs["rho_grid"] = _unit_list(blob["rho_grid"], "/rho_grid")
        if "level" in blob:
            level = _number(blob["level"], "/level")
            if not 0.0 < level < 1.0:
                raise ValidationError("Expected a number in (0, 1).", "/level")
            kwargs["level"] = level
        if "sweeps" in blob:
            kwargs["sweeps"] = self.verify_sweeps(blob["sweeps"])
        return BenchmarkConfig(**kwargs)

    def verify_scenario(self, scenario):
        if isinstance(scenario, str):
            return SimScenario(_choice(scenario.lower(), SCENARIOS, "/scenario"))
        if not isinstance(scenario, dict):
            raise ValidationError("Expected a scenario id or object.", "/scenario")
        for key in scenario:
            if key not in SCENARIO_FIELDS:
                raise ValidationError("Unknown field.", "/scenario/" + key)
        if "id" not in scenario:
            raise ValidationError("Missing required field.", "/scenario/id")
        kwargs = {"id": _choice(str(scenario["id"]).lower(), SCENARIOS, "/scenario/id")}
        for key in ("pool_size", "n_obs"):
            if key in scenario:
                kwargs[key] = _integer(scenario[key], "/scenario/" + key, 1)
        if "selection_scale" in scenario:
            scale = _number(scenario["selection_scale"], "/scenario/selection_scale")
            if scale < 0:
                raise ValidationError("Expected a non-negative number.",
                                      "/scenario/selection_scale")
            kwargs["selection_scale"] = scale
        return SimScenario(**kwargs)

    def verify_sweeps(self, sweeps):
        if not isinstance(sweeps, dict):
            raise ValidationError("Expected an object of sweeps.", "/sweeps")
        verified = {}
        for kind, values in sweeps.items():
            pointer = "/sweeps/" + kind
            if kind not in SWEEP_KINDS:
                raise ValidationError("Unknown sweep.", pointer)
            if not isinstance(values, list) or not values:
                raise ValidationError("Expected a non-empty list.", pointer)
            if kind == "rho_grid":
                verified[kind] = _unit_list(values, pointer)
            elif kind == "kernel_families":
                verified[kind] = [_choice(v, FAMILIES, "{0}/{1}".format(pointer, i))
                                  for i, v in enumerate(values)]
            elif kind == "n_obs_list":
                verified[kind] = [_integer(v, "{0}/{1}".format(pointer, i), 1)
                                  for i, v in enumerate(values)]
            else:
                for i, v in enumerate(values):
                    if isinstance(v, str):
                        _choice(v, tuple(OVERLAP_LEVELS), "{0}/{1}".format(pointer, i))
                    elif _number(v, "{0}/{1}".format(pointer, i)) < 0:
                        raise ValidationError("Expected a non-negative number.",
                                              "{0}/{1}".format(pointer, i))
                verified[kind] = values
        return verified

    def display(self, config):
        """Log and return a human-readable summary of a configuration."""
        s = config.settings
        sweeps = ", ".join("{0}: {1}".format(k, v) for k, v in config.sweeps.items()) or "none"
        text = ("\n------------------------------\n Scenario: {0}\n Methods: {1}\n"
                " Replications: {2}\n rho: {3}\n Kernel: {4}\n Tuning: {5} ({6} folds)\n"
                " Grid size: {7}\n Seed: {8}\n Sweeps: {9}\n------------------------------\n"
                .format(config.scenario, ", ".join(config.methods), config.replications,
                        s.rho, s.kernel_family, s.tuning_mode, s.folds, config.grid_size,
                        config.seed, sweeps))
        self.logger.info(text)
        return text


def _number(value, pointer):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError("Expected a number.", pointer)
    return float(value)


def _integer(value, pointer, low):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError("Expected an integer.", pointer)
    if value < low:
        raise ValidationError("Expected an integer of at least {0}.".format(low), pointer)
    return int(value)


def _unit(value, pointer):
    value = _number(value, pointer)
    if not 0.0 <= value <= 1.0:
        raise ValidationError("Expected a number in [0, 1].", pointer)
    return value


def _unit_list(values, pointer):
    if not isinstance(values, list) or not values:
        raise ValidationError("Expected a non-empty list.", pointer)
    return [_unit(v, "{0}/{1}".format(pointer, i)) for i, v in enumerate(values)]


def _choice(value, choices, pointer):
    if value not in choices:
        raise ValidationError("Expected one of {0}.".format(", ".join(choices)), pointer)
    return value
