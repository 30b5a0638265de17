"""K-fold cross-validation over kernel bandwidth and regularization weight.

The scale parameter sigma is held fixed. Held-out folds are scored by least
absolute deviation (LAD) unless asked otherwise.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import GaussianKernel
from .errors import NumericalError, UsageError
from .solver import FORMAT_VERSION, SolverConfig, fit_mccr, fit_ridge, predict
from .synth import rng_stream

__all__ = ["CvConfig", "CvReport", "fold_indices", "cross_validate",
           "DEFAULT_BANDWIDTHS", "DEFAULT_LAMBDAS", "report_to_json"]

DEFAULT_BANDWIDTHS = (0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
DEFAULT_LAMBDAS = tuple(10.0 ** k for k in range(-6, 0))

CRITERIA = {
    "lad": lambda r: float(np.mean(np.abs(r))),
    "rmse": lambda r: float(np.sqrt(np.mean(r ** 2))),
}


def _strictly_increasing(v):
    return len(v) > 0 and all(b > a for a, b in zip(v[:-1], v[1:]))


@dataclass(frozen=True)
class CvConfig:
    folds: int = 5
    bandwidth_grid: tuple = DEFAULT_BANDWIDTHS
    lambda_grid: tuple = DEFAULT_LAMBDAS
    criterion: str = "lad"
    seed: int = 0
    # exploratory only: also search over sigma
    sigma_grid: tuple = None
    # accept repeated grid values (same cell evaluated twice)
    allow_duplicates: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bandwidth_grid", tuple(float(v) for v in self.bandwidth_grid))
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        if self.folds < 2:
            raise UsageError("folds must be at least 2")
        if self.criterion not in CRITERIA:
            raise UsageError(f"criterion must be one of {sorted(CRITERIA)}")
        for name in ("bandwidth_grid", "lambda_grid"):
            grid = getattr(self, name)
            if not grid or any(not v > 0 for v in grid):
                raise UsageError(f"{name} must be non-empty and positive")
            ordered = (all(b >= a for a, b in zip(grid[:-1], grid[1:]))
                       if self.allow_duplicates else _strictly_increasing(grid))
            if not ordered:
                raise UsageError(f"{name} must be strictly increasing")


@dataclass
class CvReport:
    scores: np.ndarray
    chosen_bandwidth: float
    chosen_lambda: float
    per_fold_scores: list
    failures: list = field(default_factory=list)
    chosen_sigma: float = None
    config: CvConfig = None

    @property
    def chosen_score(self):
        return float(np.min(self.scores))


def fold_indices(n, folds, seed):
    """Shuffle 0..n-1 once with ``seed`` and cut into ``folds`` contiguous
    blocks whose sizes differ by at most one."""
    if folds > n:
        raise UsageError(f"cannot split {n} samples into {folds} folds")
    perm = rng_stream(seed).permutation(n)
    return np.array_split(perm, folds)


def _fit(x, y, h, lam, sigma, solver_config):
    kernel = GaussianKernel(h)
    if math.isinf(sigma):
        return fit_ridge(x, y, kernel, lam, jitter=solver_config.jitter)
    model, _ = fit_mccr(x, y, kernel, lam, sigma, solver_config)
    return model


def _cell_scores(data, folds, h, lam, sigma, solver_config, score):
    out = []
    for held in folds:
        train = np.ones(len(data), dtype=bool)
        train[held] = False
        model = _fit(data.x[train], data.y[train], h, lam, sigma, solver_config)
        out.append(score(data.y[held] - predict(model, data.x[held])))
    return out


def cross_validate(data, sigma, config=None, solver_config=None):
    """Grid search by k-fold cross-validation.

    ``sigma=math.inf`` cross-validates the kernel ridge baseline instead.
    A grid cell whose fit fails numerically is scored ``inf`` and listed in
    ``CvReport.failures``.
    """
    config = config or CvConfig()
    solver_config = solver_config or SolverConfig()
    n = len(data)
    folds = fold_indices(n, config.folds, config.seed)
    score = CRITERIA[config.criterion]
    sigmas = config.sigma_grid or (sigma,)
    H, L = config.bandwidth_grid, config.lambda_grid

    scores = np.full((len(sigmas), len(H), len(L)), np.inf)
    fold_scores = {}
    failures = []
    for s_idx, s in enumerate(sigmas):
        for i, h in enumerate(H):
            for j, lam in enumerate(L):
                try:
                    cell = _cell_scores(data, folds, h, lam, s, solver_config, score)
                except NumericalError as exc:
                    failures.append({"sigma": s, "bandwidth": h, "lambda": lam,
                                     "error": str(exc)})
                    continue
                fold_scores[s_idx, i, j] = cell
                scores[s_idx, i, j] = float(np.mean(cell))
    # argmin on the flattened array picks the first minimum, i.e. the
    # smallest sigma, then bandwidth, then lambda index
    s_idx, i, j = np.unravel_index(int(np.argmin(scores)), scores.shape)
    return CvReport(
        scores=scores[s_idx],
        chosen_bandwidth=H[i],
        chosen_lambda=L[j],
        per_fold_scores=fold_scores.get((s_idx, i, j), [math.inf] * config.folds),
        failures=failures,
        chosen_sigma=float(sigmas[s_idx]),
        config=config,
    )


def _num(v):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def report_to_json(report):
    cfg = report.config
    doc = {
        "format_version": FORMAT_VERSION,
        "chosen_bandwidth": report.chosen_bandwidth,
        "chosen_lambda": report.chosen_lambda,
        "chosen_sigma": _num(report.chosen_sigma),
        "scores": [[_num(v) for v in row] for row in report.scores],
        "per_fold_scores": [_num(v) for v in report.per_fold_scores],
        "failures": report.failures,
    }
    if cfg is not None:
        doc["config"] = {
            "folds": cfg.folds,
            "bandwidth_grid": list(cfg.bandwidth_grid),
            "lambda_grid": list(cfg.lambda_grid),
            "criterion": cfg.criterion,
            "seed": cfg.seed,
        }
    return json.dumps(doc, indent=1)
