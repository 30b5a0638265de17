"""Kernel MCCR fitting by half-quadratic iteration, plus the kernel ridge baseline.

The estimator minimizes

    (1/n) sum_i l_sigma(y_i - f(x_i)) + lam * alpha^T K alpha

over kernel expansions f = sum_j alpha_j k(x_j, .). Each half-quadratic step
freezes the weights w_i = exp(-r_i^2 / sigma^2) at the current residuals and
solves the weighted ridge system (W K + n lam I) alpha = W y. Because the
Welsch loss is concave in t^2, the weighted quadratic majorizes the loss and
the objective never increases within a stage.

For small sigma the problem is strongly nonconvex, so by default the target
sigma is approached through a decreasing sequence of stages, each warm-started
from the previous one.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .core import DEFAULT_JITTER, GaussianKernel, as_points, gram, welsch_loss, welsch_weight
from .errors import DomainError, NumericalError, UsageError

__all__ = ["MccrModel", "FitReport", "SolverConfig", "fit_ridge", "fit_mccr",
           "predict", "objective", "annealing_schedule", "model_to_json",
           "model_from_json", "FORMAT_VERSION"]

FORMAT_VERSION = 1
MAX_JITTER = 1e-4


@dataclass(frozen=True, eq=False)
class MccrModel:
    """Fitted kernel expansion.

    ``sigma`` is ``math.inf`` for a least-squares (ridge) model.
    """
    support_inputs: np.ndarray
    coefficients: np.ndarray
    kernel: GaussianKernel
    sigma: float
    lam: float

    def __post_init__(self):
        if len(self.coefficients) != len(self.support_inputs):
            raise UsageError("one coefficient per support point is required")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if not self.lam >= 0:
            raise DomainError("lambda must be non-negative")

    @property
    def is_ridge(self):
        return math.isinf(self.sigma)

    def __call__(self, inputs):
        return predict(self, inputs)


@dataclass
class FitReport:
    objective_trace: list = field(default_factory=list)
    stage_sigmas: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    # index into objective_trace where each stage begins
    stage_starts: list = field(default_factory=list)
    weight_trace: list = field(default_factory=list)

    def stage_traces(self):
        bounds = self.stage_starts + [len(self.objective_trace)]
        return [self.objective_trace[a:b] for a, b in zip(bounds[:-1], bounds[1:])]


@dataclass(frozen=True)
class SolverConfig:
    """Half-quadratic solver settings.

    ``annealing=None`` switches annealing on when the target sigma is below
    the interquartile range of the responses. ``initial_sigma_multiplier=None``
    starts the schedule at ``8 * std(y)``, never more than ``1e4`` times the
    target.
    """
    max_iterations_per_stage: int = 100
    relative_objective_tolerance: float = 1e-9
    annealing: bool = None
    annealing_factor: float = 0.5
    initial_sigma_multiplier: float = None
    jitter: float = DEFAULT_JITTER
    record_weights: bool = False

    def __post_init__(self):
        if self.max_iterations_per_stage < 1:
            raise UsageError("max_iterations_per_stage must be at least 1")
        if not self.relative_objective_tolerance > 0:
            raise UsageError("relative_objective_tolerance must be positive")
        if not 0 < self.annealing_factor < 1:
            raise UsageError("annealing_factor must lie strictly inside (0, 1)")
        if self.initial_sigma_multiplier is not None and not self.initial_sigma_multiplier > 0:
            raise UsageError("initial_sigma_multiplier must be positive")


def _check_data(x, y):
    x = as_points(x)
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != len(x):
        raise UsageError(f"{len(x)} inputs but {len(y)} responses")
    if not np.all(np.isfinite(y)):
        raise DomainError("responses must be finite")
    return x, y


def _cholesky(A, jitter, sigma=None):
    """Lower Cholesky factor of a symmetric PD matrix, escalating diagonal
    jitter tenfold on failure up to MAX_JITTER."""
    extra = 0.0
    while True:
        M = A if extra == 0 else A + extra * np.eye(len(A))
        L, info = lapack.dpotrf(M, lower=1, clean=0)
        if info == 0:
            return L
        if info < 0:
            raise NumericalError(f"dpotrf argument {-info} invalid", sigma=sigma)
        extra = max(10 * extra, 10 * max(jitter, 1e-12))
        if extra > MAX_JITTER:
            raise NumericalError("factorization failed after jitter escalation",
                                 sigma=sigma)


def _solve_weighted(K, y, w, n_lam, jitter, sigma=None):
    """Solve (W K + n_lam I) alpha = W y through the symmetric system
    (S K S + n_lam I) beta = S y with S = sqrt(W), alpha = S beta."""
    s = np.sqrt(w)
    A = K * s
    A *= s[:, None]
    A.flat[::len(A) + 1] += n_lam if n_lam > 0 else jitter
    L = _cholesky(A, jitter, sigma)
    beta, _ = lapack.dpotrs(L, s * y, lower=1)
    alpha = s * beta
    if not np.all(np.isfinite(alpha)):
        raise NumericalError("non-finite coefficients", sigma=sigma)
    return alpha


def fit_ridge(x, y, kernel, lam, jitter=DEFAULT_JITTER):
    """Kernel ridge regression: solve (K + n lam I) alpha = y."""
    x, y = _check_data(x, y)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    K = gram(x, kernel, jitter).entries
    alpha = _solve_weighted(K, y, np.ones(len(y)), len(y) * lam, jitter)
    return MccrModel(x, alpha, kernel, math.inf, float(lam))


def predict(model, inputs):
    q = as_points(inputs, allow_empty=True)
    if q.shape[0] == 0:
        return np.zeros(0)
    if q.shape[1] != model.support_inputs.shape[1]:
        raise UsageError(
            f"query dimension {q.shape[1]} does not match model dimension "
            f"{model.support_inputs.shape[1]}")
    return model.kernel(q, model.support_inputs) @ model.coefficients


def _risk(r, sigma):
    if math.isinf(sigma):
        return float(np.mean(r ** 2))
    return float(np.mean(welsch_loss(r, sigma)))


def objective(model, x, y, jitter=DEFAULT_JITTER):
    """Regularized empirical risk of ``model`` on (x, y).

    Uses the Welsch loss at the model's sigma, or the squared loss for ridge
    models. The penalty is computed with the jittered Gram matrix of the
    support inputs, matching what the solver minimizes.
    """
    x, y = _check_data(x, y)
    r = y - predict(model, x)
    K = gram(model.support_inputs, model.kernel, jitter).entries
    a = model.coefficients
    return _risk(r, model.sigma) + model.lam * float(a @ K @ a)


def annealing_schedule(sigma, y, config):
    """Decreasing sequence of stage sigmas ending exactly at ``sigma``."""
    y = np.asarray(y, dtype=float)
    anneal = config.annealing
    if anneal is None:
        q75, q25 = np.percentile(y, [75, 25])
        anneal = sigma < q75 - q25
    if not anneal:
        return [float(sigma)]
    mult = config.initial_sigma_multiplier
    if mult is None:
        mult = min(8.0 * float(np.std(y)) / sigma, 1e4)
    start = mult * sigma
    stages = []
    s = start
    while s > sigma:
        stages.append(float(s))
        s *= config.annealing_factor
    stages.append(float(sigma))
    return stages


def fit_mccr(x, y, kernel, lam, sigma, config=None, init=None):
    """Fit the kernel MCCR estimator by (annealed) half-quadratic iteration.

    Parameters
    ----------
    x : array (n, d) or (n,)
    y : array (n,)
    kernel : GaussianKernel
    lam : float
        Tikhonov weight, > 0.
    sigma : float
        Target scale parameter of the Welsch loss.
    config : SolverConfig, optional
    init : MccrModel, optional
        Warm start; its support inputs must be the training inputs. Defaults
        to the kernel ridge fit.

    Returns
    -------
    model : MccrModel
    report : FitReport
        Hitting the iteration cap is reported through ``converged=False``,
        never raised.
    """
    config = config or SolverConfig()
    x, y = _check_data(x, y)
    if not (sigma > 0 and np.isfinite(sigma)):
        raise DomainError("sigma must be positive and finite")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    n = len(y)
    K = gram(x, kernel, config.jitter).entries

    if init is None:
        alpha = _solve_weighted(K, y, np.ones(n), n * lam, config.jitter)
    else:
        if init.support_inputs.shape != x.shape or not np.array_equal(init.support_inputs, x):
            raise UsageError("init model must be supported on the training inputs")
        alpha = np.array(init.coefficients, dtype=float)

    report = FitReport()
    stages = annealing_schedule(sigma, y, config)
    report.stage_sigmas = stages
    converged = True
    tol = config.relative_objective_tolerance

    def obj(a, s):
        r = y - K @ a
        return float(np.mean(welsch_loss(r, s))) + lam * float(a @ K @ a), r

    for s in stages:
        report.stage_starts.append(len(report.objective_trace))
        J, r = obj(alpha, s)
        report.objective_trace.append(J)
        stage_ok = False
        for _ in range(config.max_iterations_per_stage):
            w = welsch_weight(r, s)
            if config.record_weights:
                report.weight_trace.append(w)
            alpha_new = _solve_weighted(K, y, w, n * lam, config.jitter, sigma=s)
            J_new, r_new = obj(alpha_new, s)
            report.iterations += 1
            report.objective_trace.append(J_new)
            # delta < 0 can only be rounding noise in the solve; it ends the stage
            delta = J - J_new
            alpha, r, J = alpha_new, r_new, J_new
            if delta <= tol * max(abs(J), np.finfo(float).tiny):
                stage_ok = True
                break
        converged = converged and stage_ok
    report.converged = converged
    model = MccrModel(x, alpha, kernel, float(sigma), float(lam))
    return model, report


def model_to_json(model):
    doc = {
        "format_version": FORMAT_VERSION,
        "kernel_bandwidth": model.kernel.bandwidth,
        "sigma": "inf" if model.is_ridge else model.sigma,
        "lambda": model.lam,
        "support_inputs": model.support_inputs.tolist(),
        "coefficients": model.coefficients.tolist(),
    }
    return json.dumps(doc, indent=1)


def model_from_json(text):
    try:
        doc = json.loads(text)
        sigma = math.inf if doc["sigma"] == "inf" else float(doc["sigma"])
        return MccrModel(
            support_inputs=as_points(doc["support_inputs"]),
            coefficients=np.asarray(doc["coefficients"], dtype=float),
            kernel=GaussianKernel(float(doc["kernel_bandwidth"])),
            sigma=sigma,
            lam=float(doc["lambda"]),
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed model document: {exc}") from None
