"""Experiment orchestration: figure reproduction, rate sweeps, shift scans and
the excess-risk gap table.

Every artifact embeds ``format_version``, the full resolved configuration and
the master seed. Experiment CSVs carry these as leading ``#`` comment lines.
Given the same configuration, every artifact is byte-identical across runs.

Random streams are keyed by ``(master_seed, *indices)`` through
``synth.rng_stream``, so each trial's data depend only on its indices and
not on the order in which trials are run.
"""
import dataclasses
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import diagnostics
from .core import GaussianKernel
from .errors import UsageError
from .modelsel import DEFAULT_BANDWIDTHS, DEFAULT_LAMBDAS, CvConfig, cross_validate
from .solver import FORMAT_VERSION, SolverConfig, fit_mccr, fit_ridge, predict
from .synth import (Cauchy, GaussianNoise, SymmetricPareto, SynthSpec, case_spec,
                    location_functions, pareto_tail_for_moment, simulate, sin_truth)

__all__ = ["ExperimentConfig", "theta_schedule", "rate_exponent",
           "loss_scaled_lambdas", "run_figures", "run_rates", "run_theorem1",
           "run_gap", "run_experiment", "FIGURE_RUNS"]

# (figure number, case, sigma, location functions the figure shows)
FIGURE_RUNS = (
    (1, 1, 0.05, ("mean", "mode")),
    (2, 1, 10.0, ("mean", "mode")),
    (3, 2, 0.01, ("median",)),
)
EXPERIMENTS = ("figures", "rates", "theorem1", "gap")


def theta_schedule(epsilon, q=1.0):
    """Exponent of the sigma = n**theta schedule for a (1 + epsilon)-moment
    condition and capacity exponent q."""
    if not epsilon > 0:
        raise UsageError("epsilon must be positive")
    if not q >= 0:
        raise UsageError("q must be non-negative")
    if epsilon <= 2:
        return 1.0 / ((q + 1.0) * (epsilon + 1.0))
    return 1.0 / (3.0 * (q + 1.0))


def rate_exponent(epsilon, q=1.0):
    """Exponent r of the n**-r error rate under the schedule; saturates at
    epsilon = 2."""
    return min(epsilon, 2.0) * theta_schedule(epsilon, q)


def loss_scaled_lambdas(sigma, base=DEFAULT_LAMBDAS):
    """Regularization grid measured in units of the loss range.

    The Welsch loss is bounded by sigma**2, so for sigma < 1 the grid is
    multiplied by sigma**2; larger sigmas use ``base`` unchanged.
    """
    scale = min(1.0, sigma ** 2)
    return tuple(lam * scale for lam in base)


@dataclass
class ExperimentConfig:
    experiment: str = "figures"
    master_seed: int = 0
    trials: int = 1
    output_directory: str = "results"
    # figures
    figures: tuple = (1, 2, 3)
    n_train: int = 200
    n_test: int = 200
    grid_points: int = 201
    folds: int = 5
    bandwidth_grid: tuple = DEFAULT_BANDWIDTHS
    lambda_grid: tuple = None       # None: loss_scaled_lambdas(sigma)
    baseline: bool = True
    plot: bool = False
    # rates
    epsilons: tuple = (1.0,)
    n_list: tuple = (100, 200, 400, 800, 1600)
    q: float = 1.0
    bandwidth: float = 0.1
    lam: float = 1e-4
    error_grid_points: int = 1001
    # theorem1
    noise: str = "gaussian"
    noise_param: float = 1.0
    shifts: tuple = tuple(np.round(np.linspace(-2, 2, 201), 12).tolist())
    density_points: int = 4096
    # gap
    gap_sigmas: tuple = (20.0, 40.0, 80.0)
    gap_delta: float = 1.0
    gap_noise_std: float = 1.0

    def __post_init__(self):
        for name in ("figures", "bandwidth_grid", "lambda_grid", "epsilons",
                     "n_list", "shifts", "gap_sigmas"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, tuple(v))
        if self.experiment not in EXPERIMENTS:
            raise UsageError(f"experiment must be one of {EXPERIMENTS}")
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise UsageError("master_seed must be a 64-bit unsigned integer")
        if self.experiment == "rates":
            if not self.n_list or any(b <= a for a, b in zip(self.n_list[:-1], self.n_list[1:])):
                raise UsageError("n_list must be non-empty and strictly increasing")
            if any(not e > 0 for e in self.epsilons):
                raise UsageError("epsilons must be positive")
        if self.experiment == "theorem1" and len(self.shifts) == 0:
            raise UsageError("shift list is empty")
        if self.experiment == "figures":
            bad = set(self.figures) - {f[0] for f in FIGURE_RUNS}
            if bad:
                raise UsageError(f"unknown figure numbers {sorted(bad)}")

    @classmethod
    def from_dict(cls, doc):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in dataclasses.asdict(self).items()}


# -- artifact writing --------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}" if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    return "" if v is None else str(v)


def _json_safe(v):
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _embedded_config(config):
    # where the files go does not affect their content
    doc = config.to_dict()
    doc.pop("output_directory")
    return _json_safe(doc)


def _header(config):
    return [f"# format_version: {FORMAT_VERSION}",
            f"# seed: {int(config.master_seed)}",
            "# config: " + json.dumps(_embedded_config(config), sort_keys=True)]


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_table(path, config, columns, rows):
    lines = _header(config) + [",".join(columns)]
    lines += [",".join(_fmt(r[c]) for c in columns) for r in rows]
    _write_text(path, "\n".join(lines) + "\n")


def write_json(path, config, payload):
    doc = {"format_version": FORMAT_VERSION, "seed": int(config.master_seed),
           "config": _embedded_config(config), **payload}
    _write_text(path, json.dumps(_json_safe(doc), indent=1, sort_keys=True) + "\n")


def read_table(path):
    """Read an experiment CSV back as (metadata, list of row dicts)."""
    meta, rows, columns = {}, [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = json.loads(value) if key == "config" else value
            elif columns is None:
                columns = line.split(",")
            else:
                rows.append(dict(zip(columns, line.split(","))))
    return meta, rows


# -- figures -----------------------------------------------------------------

def _rmse(a, b):
    return float(np.sqrt(np.mean((np.asarray(a) - np.asarray(b)) ** 2)))


def _figure_trial(config, fig, case, sigma, targets, trial):
    spec = case_spec(case, config.n_train, seed=config.master_seed)
    # draws depend on (case, trial) only, so figures 1 and 2 share data
    train = simulate(spec, case, trial, 0)
    test = simulate(SynthSpec(spec.noise, config.n_test, config.master_seed), case, trial, 1)
    lf = location_functions(spec)
    fold_seed = int(np.random.SeedSequence(
        config.master_seed, spawn_key=(case, trial, 2)).generate_state(1, np.uint64)[0])
    cv_cfg = CvConfig(folds=config.folds, bandwidth_grid=config.bandwidth_grid,
                      lambda_grid=config.lambda_grid or loss_scaled_lambdas(sigma),
                      seed=fold_seed)
    solver_cfg = SolverConfig()
    rep = cross_validate(train, sigma, cv_cfg, solver_cfg)
    model, fit_report = fit_mccr(train.x, train.y, GaussianKernel(rep.chosen_bandwidth),
                                 rep.chosen_lambda, sigma, solver_cfg)
    xt = test.x.ravel()
    f_test = predict(model, test.x)
    summary = {
        "figure": fig, "case": case, "sigma": sigma, "trial": trial,
        "chosen_bandwidth": rep.chosen_bandwidth, "chosen_lambda": rep.chosen_lambda,
        "cv_score": rep.chosen_score, "cv_failures": len(rep.failures),
        "converged": fit_report.converged, "iterations": fit_report.iterations,
    }
    for kind in targets:
        summary[f"rmse_vs_{kind}"] = _rmse(f_test, lf.get(kind)(xt))

    baseline = None
    if config.baseline:
        base_cfg = dataclasses.replace(cv_cfg, lambda_grid=config.lambda_grid or DEFAULT_LAMBDAS)
        brep = cross_validate(train, math.inf, base_cfg, solver_cfg)
        baseline = fit_ridge(train.x, train.y, GaussianKernel(brep.chosen_bandwidth),
                             brep.chosen_lambda)
        fb = predict(baseline, test.x)
        summary["baseline_bandwidth"] = brep.chosen_bandwidth
        summary["baseline_lambda"] = brep.chosen_lambda
        for kind in targets:
            summary[f"baseline_rmse_vs_{kind}"] = _rmse(fb, lf.get(kind)(xt))

    grid = np.linspace(0.0, 1.0, config.grid_points)
    curves = {"x": grid}
    for kind in targets:
        curves[f"f_true_{kind}"] = lf.get(kind)(grid)
    curves["f_hat"] = predict(model, grid)
    if baseline is not None:
        curves["f_ridge"] = predict(baseline, grid)
    return summary, curves


def _plot_figure(path, curves, title):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, y in curves.items():
        if name != "x":
            ax.plot(curves["x"], y, label=name)
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    # a fixed hash salt keeps the SVG byte-identical across runs
    matplotlib.rcParams["svg.hashsalt"] = "mccr"
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run_figures(config):
    """Reproduce the three location-function experiments.

    Writes ``fig{k}_trial{t}.csv`` curve tables, ``figures_summary.json`` and
    ``figures_summary.csv``. Returns the list of per-trial summaries.
    """
    os.makedirs(config.output_directory, exist_ok=True)
    summaries = []
    for fig, case, sigma, targets in FIGURE_RUNS:
        if fig not in config.figures:
            continue
        for trial in range(config.trials):
            summary, curves = _figure_trial(config, fig, case, sigma, targets, trial)
            summaries.append(summary)
            stem = os.path.join(config.output_directory, f"fig{fig}_trial{trial:03d}")
            cols = list(curves)
            rows = [dict(zip(cols, vals)) for vals in zip(*curves.values())]
            write_table(stem + ".csv", config, cols, rows)
            if config.plot:
                _plot_figure(stem + ".svg", curves, f"case {case}, sigma={sigma}")
    write_json(os.path.join(config.output_directory, "figures_summary.json"),
               config, {"runs": summaries})
    cols = sorted({k for s in summaries for k in s})
    write_table(os.path.join(config.output_directory, "figures_summary.csv"),
                config, cols, [{c: s.get(c) for c in cols} for s in summaries])
    return summaries


# -- rates -------------------------------------------------------------------

def run_rates(config):
    """Error of the scheduled estimator sigma = n**theta across sample sizes.

    Noise is symmetric Pareto with tail index 1 + epsilon + 0.1. The kernel
    bandwidth and regularization are held fixed across n.
    Returns ``{"raw": rows, "summary": rows, "slopes": {epsilon: slope}}``.
    """
    os.makedirs(config.output_directory, exist_ok=True)
    kernel = GaussianKernel(config.bandwidth)
    raw, summary, slopes = [], [], {}
    for e_idx, eps in enumerate(config.epsilons):
        theta = theta_schedule(eps, config.q)
        noise = SymmetricPareto(pareto_tail_for_moment(eps))
        medians = []
        for n in config.n_list:
            sigma = float(n) ** theta
            errs = []
            for trial in range(config.trials):
                data = simulate(SynthSpec(noise, n, config.master_seed), e_idx, n, trial)
                model, rep = fit_mccr(data.x, data.y, kernel, config.lam, sigma)
                err = diagnostics.l2_rho_error(lambda x: predict(model, x), sin_truth,
                                               n_grid=config.error_grid_points)
                errs.append(err)
                raw.append({"epsilon": eps, "n": n, "trial": trial, "sigma": sigma,
                            "theta": theta, "l2_error": err, "converged": rep.converged})
            med = float(np.median(errs))
            medians.append(med)
            summary.append({"epsilon": eps, "n": n, "sigma": sigma, "theta": theta,
                            "rate_exponent": rate_exponent(eps, config.q),
                            "median_l2_error": med})
        if len(config.n_list) >= 2:
            slope = float(np.polyfit(np.log(config.n_list), np.log(medians), 1)[0])
        else:
            slope = math.nan
        slopes[eps] = slope
        for row in summary:
            if row["epsilon"] == eps:
                row["fitted_slope"] = slope
    out = config.output_directory
    write_table(os.path.join(out, "rates_raw.csv"), config,
                ["epsilon", "n", "trial", "sigma", "theta", "l2_error", "converged"], raw)
    write_table(os.path.join(out, "rates_summary.csv"), config,
                ["epsilon", "n", "sigma", "theta", "rate_exponent", "median_l2_error",
                 "fitted_slope"], summary)
    return {"raw": raw, "summary": summary, "slopes": slopes}


# -- shift scan and gap table ----------------------------------------------------

def _scan_noise(config):
    if config.noise == "gaussian":
        return GaussianNoise(config.noise_param)
    if config.noise == "pareto":
        return SymmetricPareto(config.noise_param)
    if config.noise == "cauchy":
        return Cauchy(0.0, config.noise_param)
    raise UsageError(f"unknown scan noise {config.noise!r}")


def run_theorem1(config):
    """Constant-shift scan of the density distance and expected noise density."""
    if len(config.shifts) == 0:
        raise UsageError("shift list is empty")
    os.makedirs(config.output_directory, exist_ok=True)
    noise = _scan_noise(config)
    grid = diagnostics.default_grid(noise.scale, config.density_points)
    res = diagnostics.theorem1_shift_scan(noise.pdf, config.shifts, grid)
    rows = [{"shift": c, "distance": d, "expected_density": e}
            for c, d, e in zip(res.shifts, res.distance_values, res.expected_density_values)]
    write_table(os.path.join(config.output_directory, "theorem1_scan.csv"), config,
                ["shift", "distance", "expected_density"], rows)
    write_json(os.path.join(config.output_directory, "theorem1_summary.json"), config,
               {"argmin_distance": res.argmin_distance,
                "argmax_expected_density": res.argmax_expected_density})
    return res


def run_gap(config):
    """Gap between Welsch and squared excess risk under sigma doubling."""
    os.makedirs(config.output_directory, exist_ok=True)
    rows = []
    for s in config.gap_sigmas:
        g1 = diagnostics.excess_risk_gap(config.gap_delta, s, config.gap_noise_std)
        g2 = diagnostics.excess_risk_gap(config.gap_delta, 2 * s, config.gap_noise_std)
        rows.append({"sigma": s, "gap": g1, "gap_doubled": g2,
                     "ratio": g2 / g1 if g1 > 0 else math.nan})
    write_table(os.path.join(config.output_directory, "gap.csv"), config,
                ["sigma", "gap", "gap_doubled", "ratio"], rows)
    return rows


def run_experiment(config):
    return {"figures": run_figures, "rates": run_rates,
            "theorem1": run_theorem1, "gap": run_gap}[config.experiment](config)
