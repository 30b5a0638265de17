"""Command-line front end.

    mccr simulate --case 2 --n 200 --seed 7 --out train.csv
    mccr fit --data train.csv --bandwidth 0.1 --lam 1e-4 --sigma 0.05 --out model.json
    mccr predict --model model.json --data test.csv --out pred.csv
    mccr cv --data train.csv --sigma 0.05 --out cv.json
    mccr experiment figures --outdir results/ --trials 10

Every flag may also be given in a JSON (or TOML, when a TOML reader is
installed) document passed with ``--config``. Keys are the flag names with
dashes replaced by underscores; flags given on the command line win.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O failure.
"""
import argparse
import json
import math
import sys

import numpy as np

from . import harness
from .core import GaussianKernel
from .errors import NumericalError, UsageError
from .modelsel import CRITERIA, DEFAULT_BANDWIDTHS, DEFAULT_LAMBDAS, CvConfig, cross_validate, report_to_json
from .solver import SolverConfig, fit_mccr, fit_ridge, model_from_json, model_to_json, predict
from .synth import case_spec, read_csv, simulate, write_csv

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _sigma(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("sigma must be positive")
    return v


def load_config(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ImportError:
            try:
                import tomli as tomllib
            except ImportError:
                raise UsageError("TOML config needs Python 3.11+ or the tomli package; use JSON")
        doc = tomllib.loads(raw.decode("utf-8"))
    else:
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise UsageError("config document must be a mapping")
    return doc


def _common(p, out="--out"):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON/TOML document with flag defaults")
    if out == "--out":
        p.add_argument("--out", help="output file (default: stdout)")
    else:
        p.add_argument("--outdir", "--out", dest="outdir", default="results")


def build_parser():
    parser = _Parser(prog="mccr", description="Kernel regression under the Welsch loss.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw a synthetic dataset as CSV")
    _common(p)
    p.add_argument("--case", type=int, choices=(1, 2), default=1)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--stream", type=int, default=0, help="independent stream index")

    p = sub.add_parser("fit", help="fit a model to a CSV dataset")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--bandwidth", type=float, default=0.1)
    p.add_argument("--lam", type=float, default=1e-4)
    p.add_argument("--sigma", type=_sigma, default=math.inf,
                   help="Welsch scale; 'inf' fits kernel ridge regression")
    p.add_argument("--no-anneal", action="store_true")
    p.add_argument("--max-iterations", type=int, default=100)

    p = sub.add_parser("predict", help="evaluate a saved model on a CSV dataset")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)

    p = sub.add_parser("cv", help="cross-validate bandwidth and lambda")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--sigma", type=_sigma, default=math.inf)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--bandwidths", type=_floats, default=list(DEFAULT_BANDWIDTHS))
    p.add_argument("--lambdas", type=_floats, default=list(DEFAULT_LAMBDAS))
    p.add_argument("--criterion", choices=sorted(CRITERIA), default="lad")

    p = sub.add_parser("experiment", help="run a reproduction experiment")
    _common(p, out="--outdir")
    p.add_argument("name", choices=harness.EXPERIMENTS)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--plot", action="store_true", default=None,
                   help="also write an SVG per figure (needs matplotlib)")
    return parser


def _apply_config(parser, argv):
    """Install config-file values as subparser defaults so flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    doc = load_config(known.config)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in sub.choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in doc.items() if k in dests})
    return doc


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args, _doc):
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    data = simulate(case_spec(args.case, args.n, seed=args.seed), args.stream)
    if args.out:
        write_csv(data, args.out)
    else:
        write_csv(data, sys.stdout)


def cmd_fit(args, _doc):
    data = read_csv(args.data)
    kernel = GaussianKernel(args.bandwidth)
    if math.isinf(args.sigma):
        model = fit_ridge(data.x, data.y, kernel, args.lam)
    else:
        cfg = SolverConfig(annealing=False if args.no_anneal else None,
                           max_iterations_per_stage=args.max_iterations)
        model, report = fit_mccr(data.x, data.y, kernel, args.lam, args.sigma, cfg)
        if not report.converged:
            print("warning: iteration cap reached before convergence", file=sys.stderr)
    _emit(model_to_json(model) + "\n", args.out)


def cmd_predict(args, _doc):
    with open(args.model, encoding="utf-8") as fh:
        model = model_from_json(fh.read())
    data = read_csv(args.data)
    y_hat = predict(model, data.x)
    d = data.x.shape[1]
    lines = [",".join([f"x{j + 1}" for j in range(d)] + ["y_hat"])]
    lines += [",".join(f"{v:.17g}" for v in (*row, yh)) for row, yh in zip(data.x, y_hat)]
    _emit("\n".join(lines) + "\n", args.out)


def cmd_cv(args, _doc):
    data = read_csv(args.data)
    cfg = CvConfig(folds=args.folds, bandwidth_grid=tuple(args.bandwidths),
                   lambda_grid=tuple(args.lambdas), criterion=args.criterion, seed=args.seed)
    report = cross_validate(data, args.sigma, cfg)
    _emit(report_to_json(report) + "\n", args.out)


def cmd_experiment(args, doc):
    fields = {k: v for k, v in doc.items()
              if k in {f for f in harness.ExperimentConfig.__dataclass_fields__}}
    fields.update(experiment=args.name, master_seed=args.seed, output_directory=args.outdir)
    if args.trials is not None:
        fields["trials"] = args.trials
    if args.plot is not None:
        fields["plot"] = args.plot
    harness.run_experiment(harness.ExperimentConfig.from_dict(fields))


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "predict": cmd_predict,
            "cv": cmd_cv, "experiment": cmd_experiment}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        doc = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.seed < 0:
            raise UsageError("--seed must be non-negative")
        with np.errstate(over="ignore", under="ignore"):
            COMMANDS[args.command](args, doc)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError) as exc:
        # remaining validation errors (domain checks, bad config values)
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
