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

"""Replication-level benchmarking of the registered estimators on simulated studies."""

from causalicm.errors import UsageError, ValidationError
from causalicm.estimators import MethodSettings, get_estimator
from causalicm.executor import Executor, TaskFailure
from causalicm.csvio import write_rows
from causalicm.simgen import SUPPORT, GroundTruth, SimScenario, eval_grid, simulate
from collections import namedtuple
import json
import logging
import numpy as np
import os
from time import perf_counter

OVERLAP_LEVELS = {"low": 1.0, "high": 0.5, "full": 0.0}
SWEEP_KINDS = ("rho_grid", "kernel_families", "n_obs_list", "overlap_levels")
DEFAULT_REPLICATIONS = 20
DEFAULT_GRID_SIZE = 50
LML_TOL = 1e-9

logger = logging.getLogger("CausalICM")

Variant = namedtuple("Variant", "label scenario settings")
MethodRecord = namedtuple("MethodRecord", "variant method seed rmse in_mse out_mse seconds rho "
                                          "lml_violations mean ci_low ci_high error")


class BenchmarkConfig(object):
    """Everything a benchmark run depends on. Identical configs give identical results."""

    def __init__(self, scenario, methods=("causal_icm", "gp_exp", "gp_obs",
                                          "experimental_grounding"),
                 replications=DEFAULT_REPLICATIONS, rho="auto", grid_size=DEFAULT_GRID_SIZE,
                 seed=0, kernel_family="rbf", rho_grid=None, folds=5, tuning_mode="refit",
                 restarts=3, level=0.95, sweeps=None):
        if not isinstance(scenario, SimScenario):
            scenario = SimScenario(scenario)
        if int(replications) < 1:
            raise ValidationError("replications must be at least 1.", "/replications")
        if not methods:
            raise ValidationError("At least one method is needed.", "/methods")
        for i, method in enumerate(methods):
            try:
                get_estimator(method)
            except ValidationError as e:
                raise ValidationError(e.message, "/methods/{0}".format(i))
        for kind in (sweeps or {}):
            if kind not in SWEEP_KINDS:
                raise ValidationError("Unknown sweep '{0}'.".format(kind), "/sweeps/" + kind)
        self.scenario = scenario
        self.methods = list(methods)
        self.replications = int(replications)
        self.grid_size = int(grid_size)
        self.seed = int(seed)
        self.level = float(level)
        self.sweeps = dict(sweeps or {})
        settings = {"kernel_family": kernel_family, "rho": rho, "seed": self.seed,
                    "folds": folds, "tuning_mode": tuning_mode, "restarts": restarts}
        if rho_grid is not None:
            settings["grid"] = rho_grid
        self.settings = MethodSettings(**settings)

    def replication_seeds(self):
        """One independent integer seed per replication, spawned from the config seed."""
        children = np.random.SeedSequence(self.seed).spawn(self.replications)
        return [int(child.generate_state(1)[0]) for child in children]

    def variants(self):
        """The base design, or one variant per value of every requested sweep."""
        if not self.sweeps:
            return [Variant("base", self.scenario, self.settings)]
        variants = []
        for kind in SWEEP_KINDS:
            for value in self.sweeps.get(kind, []):
                if kind == "rho_grid":
                    variants.append(Variant("rho={0:g}".format(float(value)), self.scenario,
                                            self.settings.replace(rho=float(value))))
                elif kind == "kernel_families":
                    variants.append(Variant("kernel={0}".format(value), self.scenario,
                                            self.settings.replace(kernel_family=value)))
                elif kind == "n_obs_list":
                    variants.append(Variant("n_obs={0}".format(int(value)),
                                            self.scenario.replace(n_obs=int(value)),
                                            self.settings))
                else:
                    label, scale = overlap_scale(value)
                    variants.append(Variant("overlap={0}".format(label),
                                            self.scenario.replace(selection_scale=scale),
                                            self.settings))
        return variants

    def to_json(self):
        s = self.settings
        return {"scenario": self.scenario.to_json(), "methods": self.methods,
                "replications": self.replications, "rho": s.rho, "grid_size": self.grid_size,
                "seed": self.seed, "kernel_family": s.kernel_family, "rho_grid": list(s.grid),
                "folds": s.folds, "tuning_mode": s.tuning_mode, "restarts": s.restarts,
                "level": self.level, "sweeps": self.sweeps}


def overlap_scale(value):
    """(label, selection-logit multiplier) for a named or numeric overlap level."""
    if isinstance(value, str):
        if value not in OVERLAP_LEVELS:
            raise ValidationError("Unknown overlap level '{0}'. Use low, high or full.".format(
                value))
        return value, OVERLAP_LEVELS[value]
    return "{0:g}".format(float(value)), float(value)


def rmse(predicted_tau, true_tau):
    predicted_tau = np.asarray(predicted_tau, dtype=float).reshape(-1)
    true_tau = np.asarray(true_tau, dtype=float).reshape(-1)
    if predicted_tau.size != true_tau.size or predicted_tau.size == 0:
        raise ValidationError("rmse needs two non-empty vectors of equal length.")
    return float(np.sqrt(np.mean((predicted_tau - true_tau) ** 2)))


def coverage_curve(ci_low, ci_high, true_tau):
    """Per grid point, the fraction of replications whose interval contains the truth.

    ci_low and ci_high are (replications × grid points)."""
    ci_low = np.atleast_2d(np.asarray(ci_low, dtype=float))
    ci_high = np.atleast_2d(np.asarray(ci_high, dtype=float))
    true_tau = np.asarray(true_tau, dtype=float).reshape(1, -1)
    if ci_low.shape[0] < 1:
        raise ValidationError("Coverage needs at least one replication.")
    covered = (ci_low <= true_tau) & (true_tau <= ci_high)
    return covered.mean(axis=0)


def rct_support(X_rct, lower=None):
    """Per-dimension box spanned by the realized trial covariates. A given lower bound
    replaces the empirical minimum."""
    X_rct = np.asarray(X_rct, dtype=float)
    low = X_rct.min(axis=0) if lower is None else np.full(X_rct.shape[1], float(lower))
    return low, X_rct.max(axis=0)


def split_support_mse(predictions, truth, X_grid, support):
    """(in_mse, out_mse) over grid points inside and outside the support box; a side with
    no grid points is None."""
    predictions = np.asarray(predictions, dtype=float).reshape(-1)
    truth = np.asarray(truth, dtype=float).reshape(-1)
    X_grid = np.asarray(X_grid, dtype=float).reshape(predictions.size, -1)
    low, high = support
    if np.any(np.asarray(low) > np.asarray(high)):
        raise ValidationError("The support box has a lower bound above its upper bound.")
    inside = np.all((X_grid >= low) & (X_grid <= high), axis=1)
    squared = (predictions - truth) ** 2
    in_mse = float(np.mean(squared[inside])) if inside.any() else None
    out_mse = float(np.mean(squared[~inside])) if (~inside).any() else None
    return in_mse, out_mse


def lml_violations(model):
    """Count of per-arm fits whose optimized LML fell below the starting LML."""
    hyperparameters = getattr(model, "hyperparameters", None) or {}
    return sum(1 for h in hyperparameters.values() if h.lml < h.initial_lml - LML_TOL)


class BenchmarkResult(object):
    """Per (variant, method, replication) records plus the aggregates derived from them."""

    def __init__(self, config, variants, X_grid, true_tau, records):
        self.config = config
        self.variants = variants
        self.X_grid = X_grid
        self.true_tau = true_tau
        self.records = sorted(records, key=self._order)

    def _order(self, record):
        return ([v.label for v in self.variants].index(record.variant), record.method,
                record.seed)

    def select(self, variant, method, successes=True):
        return [r for r in self.records if r.variant == variant and r.method == method
                and (r.error is None) == successes]

    def rmse_values(self, variant, method):
        return [r.rmse for r in self.select(variant, method)]

    def coverage(self, variant, method):
        """Coverage rates per grid point, or None if every replication failed."""
        done = self.select(variant, method)
        if not done:
            return None
        return coverage_curve([r.ci_low for r in done], [r.ci_high for r in done],
                              self.true_tau[variant])

    def summary(self):
        blob = {"config": self.config.to_json(), "variants": {}}
        for variant in self.variants:
            methods = {}
            for method in self.config.methods:
                done = self.select(variant.label, method)
                failed = self.select(variant.label, method, successes=False)
                entry = {"replications": len(done) + len(failed), "successes": len(done),
                         "failures": len(failed),
                         "lml_violations": sum(r.lml_violations for r in done)}
                if done:
                    entry.update(_stats("rmse", [r.rmse for r in done]))
                    entry["timing"] = _timing([r.seconds for r in done])
                    entry["in_mse"] = _mean_present([r.in_mse for r in done])
                    entry["out_mse"] = _mean_present([r.out_mse for r in done])
                    entry["mean_coverage"] = float(np.mean(self.coverage(variant.label, method)))
                    rhos = [r.rho for r in done if r.rho is not None]
                    if rhos:
                        entry["mean_rho"] = float(np.mean(rhos))
                methods[method] = entry
            blob["variants"][variant.label] = {"scenario": variant.scenario.to_json(),
                                               "methods": methods}
        return blob

    def write(self, out_dir):
        """results.csv, summary.json, coverage.csv and extrapolation.csv in out_dir."""
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as e:
            raise UsageError("Cannot create {0}: {1}".format(out_dir, e.strerror))
        dims = ["x{0}".format(j + 1) for j in range(self.X_grid.shape[1])]
        rows = []
        for r in self.records:
            metrics = [("rmse", r.rmse), ("in_mse", r.in_mse), ("out_mse", r.out_mse),
                       ("seconds", r.seconds), ("rho", r.rho),
                       ("lml_violations", r.lml_violations), ("failed", int(r.error is not None))]
            rows.extend([r.variant, r.method, r.seed, name, repr(float(value))]
                        for name, value in metrics if value is not None)
        write_rows(os.path.join(out_dir, "results.csv"),
                   ["variant", "method", "seed", "metric", "value"], rows)

        rows = []
        for variant in self.variants:
            for method in self.config.methods:
                rates = self.coverage(variant.label, method)
                if rates is None:
                    continue
                for x, rate in zip(self.X_grid, rates):
                    rows.append([variant.label] + [repr(float(v)) for v in x]
                                + [method, repr(float(rate))])
        write_rows(os.path.join(out_dir, "coverage.csv"),
                   ["variant"] + dims + ["method", "rate"], rows)

        rows = []
        for variant in self.variants:
            for method in self.config.methods:
                done = self.select(variant.label, method)
                if not done:
                    continue
                first = done[0]
                for x, tau, m, lo, hi in zip(self.X_grid, self.true_tau[variant.label],
                                             first.mean, first.ci_low, first.ci_high):
                    rows.append([variant.label, method, first.seed]
                                + [repr(float(v)) for v in (tuple(x) + (tau, m, lo, hi))])
        write_rows(os.path.join(out_dir, "extrapolation.csv"),
                   ["variant", "method", "seed"] + dims
                   + ["tau_true", "tau_mean", "ci_low", "ci_high"], rows)

        path = os.path.join(out_dir, "summary.json")
        try:
            with open(path, "w") as f:
                json.dump(self.summary(), f, indent=4)
        except OSError as e:
            raise UsageError("Cannot write {0}: {1}".format(path, e.strerror))


def run_benchmark(config, jobs=1):
    """Simulate, fit every method and score it on the evaluation grid, for every variant
    and replication seed. Method failures are recorded, never dropped."""
    variants = config.variants()
    X_grid = eval_grid(config.scenario, config.grid_size, config.seed)
    seeds = config.replication_seeds()
    true_tau = {}
    tasks = []
    for i, variant in enumerate(variants):
        true_tau[variant.label] = GroundTruth(variant.scenario).tau(X_grid)
        for j, seed in enumerate(seeds):
            tasks.append(((i, j), run_replication, (config, variant, seed, X_grid)))
    logger.info("Running {0} replications of {1} variant(s) with {2} job(s).".format(
        len(seeds), len(variants), jobs))
    records = []
    for (_, _, (_, variant, seed, _)), outcome in zip(tasks, Executor(jobs).run(tasks)):
        if isinstance(outcome, TaskFailure):
            # Simulation itself failed; every method fails with it
            records.extend(_failed(variant.label, method, seed, outcome.error)
                           for method in config.methods)
        else:
            records.extend(outcome)
    return BenchmarkResult(config, variants, X_grid, true_tau, records)


def run_replication(config, variant, seed, X_grid):
    """One simulated dataset scored by every method."""
    rct, obs, truth = simulate(variant.scenario, seed)
    tau = truth.tau(X_grid)
    lower = SUPPORT[0] if variant.scenario.dim == 1 else None
    support = rct_support(rct.X, lower) if rct.n else None
    settings = variant.settings.replace(seed=seed)
    records = []
    for method in config.methods:
        start = perf_counter()
        try:
            model = get_estimator(method)(rct, obs, settings)
            estimate = model.predict(X_grid, config.level)
        except Exception as e:
            logger.warning("{0} failed on {1} seed {2}: {3}".format(method, variant.label,
                                                                   seed, e))
            records.append(_failed(variant.label, method, seed, e))
            continue
        seconds = perf_counter() - start
        in_mse, out_mse = (split_support_mse(estimate.mean, tau, X_grid, support)
                           if support is not None else (None, None))
        records.append(MethodRecord(variant.label, method, seed, rmse(estimate.mean, tau),
                                    in_mse, out_mse, seconds, getattr(model, "rho", None),
                                    lml_violations(model), estimate.mean, estimate.ci_low,
                                    estimate.ci_high, None))
    return records


def runtime_bench(config, repeats=None):
    """Wall-clock seconds per fit + predict on one fixed simulated dataset. A warm-up fit
    per method is run first and not timed."""
    repeats = config.replications if repeats is None else int(repeats)
    seed = config.replication_seeds()[0]
    rct, obs, _ = simulate(config.scenario, seed)
    X_grid = eval_grid(config.scenario, config.grid_size, config.seed)
    settings = config.settings.replace(seed=seed)
    table = {}
    for method in config.methods:
        fit = get_estimator(method)
        fit(rct, obs, settings).predict(X_grid, config.level)
        seconds = []
        for _ in range(repeats):
            start = perf_counter()
            fit(rct, obs, settings).predict(X_grid, config.level)
            seconds.append(perf_counter() - start)
        table[method] = _timing(seconds)
        logger.info("{0}: median {1:.3f} s over {2} runs.".format(method,
                                                                 table[method]["median"],
                                                                 repeats))
    return table


def _failed(variant, method, seed, error):
    return MethodRecord(variant, method, seed, None, None, None, None, None, 0, None, None,
                        None, "{0}: {1}".format(type(error).__name__, error))


def _stats(name, values):
    values = np.asarray(values, dtype=float)
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return {"mean_" + name: float(np.mean(values)), "sd_" + name: sd}


def _timing(seconds):
    seconds = np.asarray(seconds, dtype=float)
    return {"mean": float(np.mean(seconds)),
            "sd": float(np.std(seconds, ddof=1)) if seconds.size > 1 else 0.0,
            "median": float(np.median(seconds)), "min": float(np.min(seconds)),
            "max": float(np.max(seconds)), "runs": int(seconds.size)}


def _mean_present(values):
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None
