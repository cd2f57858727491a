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

"""Command-line driver: simulate studies, fit and predict CATEs, tune rho and run benchmarks.

Exit codes: 0 success, 2 usage or validation error, 3 data-shape error, 4 numerical failure."""

from causalicm.cate import arm_blocks, frozen_from_report
from causalicm.configure import Configurator, output_dir
from causalicm.csvio import (read_covariates, read_study, write_predictions, write_rows,
                             write_study)
from causalicm.errors import CausalIcmError, UsageError, ValidationError
from causalicm.estimators import MethodSettings, get_estimator, registry
from causalicm.harness import run_benchmark, runtime_bench
from causalicm.icm import variance_bound_report
from causalicm.kernels import FAMILIES
from causalicm.simgen import SCENARIOS, SimScenario, check_confounding_sign, simulate
from causalicm.tuning import DEFAULT_GRID, TUNING_MODES, tune_rho_arms
import argparse
import json
import logging
from logging import handlers
import os
import sys
from time import strftime


class Runner(object):
    """Parses the command line, sets up logging and runs one subcommand."""

    def __init__(self):
        self.logger = logging.getLogger("CausalICM")
        self.handlers = []
        self.parser = build_parser()

    def run(self, argv=None):
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return e.code if isinstance(e.code, int) else 2
        try:
            self.setup_logging(args.verbose)
            return self.dispatch(args)
        finally:
            self.teardown_logging()

    def dispatch(self, args):
        """Run the subcommand and map expected failures to exit codes."""
        try:
            args.func(self, args)
        except CausalIcmError as e:
            self.logger.error(e.message)
            return e.exit_code
        except KeyboardInterrupt:
            self.logger.info("Caught KeyboardInterrupt. Shutting down.")
            return 130
        return 0

    def setup_logging(self, verbose=False):
        """Set up logging to a logfile and the console."""
        self.logger.setLevel(logging.DEBUG)

        # Create the file logger
        file_formatter = logging.Formatter(
            "%(asctime)s - %(filename)s - %(threadName)s - %(levelname)s : %(message)s")
        log_path = os.path.join(output_dir("."), "logs")
        try:
            os.makedirs(log_path, exist_ok=True)
        except OSError:
            log_path = None
        if log_path:
            # Files are saved in the logs sub-directory as HHMM_mmddyy.log
            # This log file rolls over every seven days.
            logname = os.path.join(log_path, "{0}.log".format(strftime("%H%M_%m%d%y")))
            filehandler = handlers.TimedRotatingFileHandler(logname, 'd', 7)
            filehandler.setFormatter(file_formatter)
            filehandler.setLevel(logging.INFO)
            self.add_handler(filehandler)
            self.logger.debug("File logger created; saving logs to {}.".format(logname))

        # Create the console logger
        console_formatter = logging.Formatter(
            "%(asctime)s - %(threadName)s - %(levelname)s: %(message)s", datefmt="%I:%M:%S %p")
        consolehandler = logging.StreamHandler()
        consolehandler.setFormatter(console_formatter)
        consolehandler.setLevel(logging.DEBUG if verbose else logging.WARNING)
        self.add_handler(consolehandler)

    def add_handler(self, handler):
        self.logger.addHandler(handler)
        self.handlers.append(handler)

    def teardown_logging(self):
        for handler in self.handlers:
            self.logger.removeHandler(handler)
            handler.close()
        self.handlers = []

    def simulate(self, args):
        scenario = SimScenario(args.scenario, args.pool_size, args.n_obs, args.selection_scale)
        out = args.out or output_dir(".")
        make_dirs(out)
        rct, obs, truth = simulate(scenario, args.seed)
        write_study(os.path.join(out, "rct.csv"), rct)
        write_study(os.path.join(out, "obs.csv"), obs)
        blob = truth.to_json()
        blob["seed"] = args.seed
        if args.check_sign:
            check = check_confounding_sign(scenario, args.seed)
            blob["confounding_sign"] = {"sign": check.sign, "max_error": check.error}
        write_json(os.path.join(out, "truth.json"), blob)
        self.logger.info("Wrote {0} trial and {1} observational units to {2}.".format(
            rct.n, obs.n, out))

    def fit_predict(self, args):
        rct, obs = read_study(args.rct, "E"), read_study(args.obs, "O")
        X_test = read_covariates(args.test, rct.X.shape[1])
        model = get_estimator(args.method)(rct, obs, method_settings(args))
        estimate = model.predict(X_test, args.level)
        out = args.out or os.path.join(output_dir("."), "predictions.csv")
        write_predictions(out, X_test, estimate)
        report = model.report()
        report["level"] = args.level
        write_json(args.report or os.path.splitext(out)[0] + "_report.json", report)
        if getattr(model, "rho", None) is not None:
            self.logger.info("Fitted {0} at rho = {1:g}.".format(args.method, model.rho))

    def tune_rho(self, args):
        rct, obs = read_study(args.rct, "E"), read_study(args.obs, "O")
        arms, _, _ = arm_blocks(rct, obs)
        selection = tune_rho_arms(arms, grid=args.grid, folds=args.folds, seed=args.seed,
                                  family=args.kernel, mode=args.tuning_mode,
                                  restarts=args.restarts)
        write_json(args.out or os.path.join(output_dir("."), "rho_selection.json"),
                   selection.to_json())
        print("{0:g}".format(selection.chosen_rho))

    def benchmark(self, args):
        config = self.load_config(args)
        out = args.out or output_dir(".")
        make_dirs(out)
        result = run_benchmark(config, jobs=args.jobs)
        result.write(out)
        failures = sum(1 for r in result.records if r.error is not None)
        if failures:
            self.logger.warning("{0} method fit(s) failed; see results.csv.".format(failures))
        self.logger.info("Benchmark results written to {0}.".format(out))

    def coverage(self, args):
        config = self.load_config(args)
        out = args.out or output_dir(".")
        make_dirs(out)
        result = run_benchmark(config, jobs=args.jobs)
        result.write(out)
        for variant in result.variants:
            for method in config.methods:
                rates = result.coverage(variant.label, method)
                if rates is not None:
                    print("{0} {1}: mean coverage {2:.3f}".format(variant.label, method,
                                                                 float(rates.mean())))

    def runtime(self, args):
        config = self.load_config(args)
        out = args.out or output_dir(".")
        make_dirs(out)
        table = runtime_bench(config, args.repeats)
        write_json(os.path.join(out, "runtime.json"), table)
        for method, stats in table.items():
            print("{0}: mean {mean:.3f} s, sd {sd:.3f}, median {median:.3f}, min {min:.3f}, "
                  "max {max:.3f}".format(method, **stats))

    def variance_bound(self, args):
        rct, obs = read_study(args.rct, "E"), read_study(args.obs, "O")
        X_test = read_covariates(args.test, rct.X.shape[1])
        model = get_estimator("causal_icm")(rct, obs, method_settings(args))
        arms, standardizer, _ = arm_blocks(rct, obs, model.standardizer, model.offsets)
        Z = standardizer.transform(X_test)
        rows = []
        for a in sorted(arms):
            hyper = model.hyperparameters[a]
            De, Do = arms[a]
            report = variance_bound_report(De, Do, model.rho, hyper.kernel,
                                           hyper.noise_variance, Z)
            for x, bound in zip(X_test, report):
                rows.append([a] + [repr(float(v)) for v in x] +
                            [repr(bound.v_full), repr(bound.v_rct_only), repr(bound.lower),
                             int(bound.holds_lower), int(bound.holds_upper)])
        header = (["arm"] + ["x{0}".format(j + 1) for j in range(X_test.shape[1])] +
                  ["v_full", "v_rct_only", "lower", "holds_lower", "holds_upper"])
        write_rows(args.out or os.path.join(output_dir("."), "variance_bound.csv"), header, rows)

    def methods(self, args):
        names = sorted(name for name, (_, alias) in registry.items() if not alias)
        for name in names:
            func = registry[name][0]
            aliases = sorted(key for key, (f, alias) in registry.items() if alias and f is func)
            print("{0}{1}: {2}".format(name, " ({0})".format(", ".join(aliases)) if aliases
                                       else "", func.__doc__))

    def load_config(self, args):
        configurator = Configurator(args.config)
        config = configurator.load()
        if args.seed is not None:
            config.seed = args.seed
            config.settings = config.settings.replace(seed=args.seed)
        configurator.display(config)
        return config


def method_settings(args):
    frozen = None
    if args.frozen:
        frozen = frozen_from_report(read_json(args.frozen))
    rho = "auto" if args.auto_rho or args.rho is None else args.rho
    return MethodSettings(kernel_family=args.kernel, rho=rho,
                          seed=args.seed, grid=args.grid, folds=args.folds,
                          tuning_mode=args.tuning_mode, restarts=args.restarts,
                          treatment_probability=args.treatment_probability, frozen=frozen)


def make_dirs(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise UsageError("Cannot create {0}: {1}".format(path, e.strerror))


def read_json(path):
    try:
        with open(path, "r") as f:
            return json.load(f)
    except OSError as e:
        raise UsageError("Cannot read {0}: {1}".format(path, e.strerror))
    except ValueError as e:
        raise ValidationError("{0} is not valid JSON: {1}".format(path, e))


def write_json(path, blob):
    try:
        with open(path, "w") as f:
            json.dump(blob, f, indent=4)
    except OSError as e:
        raise UsageError("Cannot write {0}: {1}".format(path, e.strerror))


def unit_interval(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("'{0}' is not a number".format(text))
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("{0} is outside [0, 1]".format(text))
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random draw")
    common.add_argument("--verbose", "-v", action="store_true", help="log debug output")

    fitting = argparse.ArgumentParser(add_help=False)
    rho = fitting.add_mutually_exclusive_group()
    rho.add_argument("--rho", type=unit_interval, default=None, help="fixed rho in [0, 1]")
    rho.add_argument("--auto-rho", action="store_true", help="tune rho by cross-validation")
    fitting.add_argument("--kernel", choices=FAMILIES, default="rbf")
    fitting.add_argument("--grid", type=unit_interval, nargs="+", default=list(DEFAULT_GRID))
    fitting.add_argument("--folds", type=int, default=5)
    fitting.add_argument("--tuning-mode", choices=TUNING_MODES, default="refit")
    fitting.add_argument("--restarts", type=int, default=3)
    fitting.add_argument("--treatment-probability", type=float, default=0.5)
    fitting.add_argument("--frozen", help="fit report whose standardization and "
                                          "hyperparameters are reused")

    benchmarking = argparse.ArgumentParser(add_help=False)
    benchmarking.add_argument("config", help="benchmark configuration JSON")
    benchmarking.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    benchmarking.add_argument("--out", help="output directory")

    parser = argparse.ArgumentParser(prog="causalicm", description="CATE estimation from a "
                                     "randomized trial and an observational study.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("simulate", parents=[common], help="draw a simulated trial and "
                                                           "observational study")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--pool-size", type=int, default=1000)
    p.add_argument("--n-obs", type=int, default=1000)
    p.add_argument("--selection-scale", type=float, default=1.0)
    p.add_argument("--check-sign", action="store_true",
                   help="record the empirically resolved sign of the confounding effect")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=Runner.simulate)

    p = sub.add_parser("fit-predict", aliases=["fit", "predict"], parents=[common, fitting],
                       help="fit an estimator and predict the CATE at test points")
    p.add_argument("rct")
    p.add_argument("obs")
    p.add_argument("test")
    p.add_argument("--method", default="causal_icm")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--out", help="predictions CSV")
    p.add_argument("--report", help="fit report JSON")
    p.set_defaults(func=Runner.fit_predict)

    p = sub.add_parser("tune-rho", parents=[common, fitting], help="choose rho by weighted "
                                                                   "cross-validation")
    p.add_argument("rct")
    p.add_argument("obs")
    p.add_argument("--out", help="selection JSON")
    p.set_defaults(func=Runner.tune_rho)

    p = sub.add_parser("variance-bound", parents=[common, fitting],
                       help="per-point check of the posterior variance bound")
    p.add_argument("rct")
    p.add_argument("obs")
    p.add_argument("test")
    p.add_argument("--out", help="report CSV")
    p.set_defaults(func=Runner.variance_bound)

    for name, func, text in (("benchmark", Runner.benchmark, "run a benchmark configuration"),
                             ("coverage", Runner.coverage, "conditional coverage curves")):
        p = sub.add_parser(name, parents=[benchmarking], help=text)
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--verbose", "-v", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("runtime", parents=[benchmarking], help="timing table per method")
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=Runner.runtime)

    p = sub.add_parser("methods", help="list the registered estimators")
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=Runner.methods)
    return parser


def main(argv=None):
    return Runner().run(argv)


if __name__ == "__main__":
    sys.exit(main())
