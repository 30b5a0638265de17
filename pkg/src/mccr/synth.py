"""Synthetic data under the additive model Y = f*(X) + noise.

Random streams come from numpy's counter-based Philox generator keyed by a
``SeedSequence``. A sub-stream for trial ``k`` of master seed ``s`` is
``rng_stream(s, k)``, i.e. ``SeedSequence(s, spawn_key=(k,))``, which hashes
the pair into an independent key. Streams therefore do not depend on the
order in which trials are run.
"""
import io
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import as_points
from .errors import DomainError, UsageError, UndefinedLocationError

__all__ = ["rng_stream", "Dataset", "MixtureHetero", "Cauchy", "SymmetricPareto",
           "GaussianNoise", "SynthSpec", "LocationFunctions", "simulate",
           "sample_cauchy", "sample_symmetric_pareto", "eval_truth",
           "location_functions", "sin_truth", "pareto_tail_for_moment",
           "case_spec", "write_csv", "read_csv"]


def rng_stream(seed, *stream):
    """Philox generator for ``seed``, optionally split by integer stream keys."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in stream))
    return np.random.Generator(np.random.Philox(ss))


def _open_uniform(rng, size):
    u = rng.random(size)
    while np.any(u == 0.0):
        zero = u == 0.0
        u[zero] = rng.random(int(zero.sum()))
    return u


def sin_truth(x):
    return 2.0 * np.sin(np.pi * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_points(self.x, allow_empty=True)
        y = np.asarray(self.y, dtype=float).ravel()
        if len(x) != len(y):
            raise UsageError(f"{len(x)} inputs but {len(y)} responses")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.y)

    def subset(self, idx):
        return Dataset(self.x[idx], self.y[idx])


# -- noise laws -------------------------------------------------------------

@dataclass(frozen=True)
class MixtureHetero:
    """Case I: noise (1 + 2x) * kappa with kappa ~ 0.5 N(-1, 2.5^2) + 0.5 N(1, 0.5^2)."""
    weights: tuple = (0.5, 0.5)
    means: tuple = (-1.0, 1.0)
    stds: tuple = (2.5, 0.5)

    def kappa_pdf(self, t):
        t = np.asarray(t, dtype=float)
        return sum(w * stats.norm.pdf(t, m, s)
                   for w, m, s in zip(self.weights, self.means, self.stds))

    def scale_at(self, x):
        return 1.0 + 2.0 * np.asarray(x, dtype=float)

    def pdf(self, t, x):
        """Conditional density of the noise given the input ``x``."""
        c = self.scale_at(x)
        return self.kappa_pdf(np.asarray(t) / c) / c

    def sample(self, x, rng):
        n = len(x)
        comp = rng.random(n) < self.weights[0]
        z = rng.standard_normal(n)
        kappa = np.where(comp, self.means[0] + self.stds[0] * z,
                         self.means[1] + self.stds[1] * z)
        return self.scale_at(x) * kappa

    @property
    def scale(self):
        return max(self.stds)


@dataclass(frozen=True)
class Cauchy:
    """Case II: Cauchy noise, independent of the input."""
    location: float = 0.0
    scale: float = 0.5

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("Cauchy scale must be positive")

    def pdf(self, t, x=None):
        return stats.cauchy.pdf(t, self.location, self.scale)

    def sample(self, x, rng):
        return sample_cauchy(self.location, self.scale, _open_uniform(rng, len(x)))


@dataclass(frozen=True)
class SymmetricPareto:
    """Symmetric Pareto noise with density (a/2) (1 + |t|)^-(a+1).

    The m-th absolute moment is finite iff m < a.
    """
    tail_index: float

    def __post_init__(self):
        if not self.tail_index > 1:
            raise DomainError("tail index must exceed 1")

    def pdf(self, t, x=None):
        a = self.tail_index
        return 0.5 * a * (1.0 + np.abs(np.asarray(t, dtype=float))) ** (-(a + 1.0))

    def sample(self, x, rng):
        return sample_symmetric_pareto(self.tail_index, rng, size=len(x))

    @property
    def scale(self):
        return 1.0


@dataclass(frozen=True)
class GaussianNoise:
    """Centred Gaussian noise. Used for closed-form checks, not by the figure cases."""
    std: float = 1.0

    def pdf(self, t, x=None):
        return stats.norm.pdf(t, 0.0, self.std)

    def sample(self, x, rng):
        return self.std * rng.standard_normal(len(x))

    @property
    def scale(self):
        return self.std


def pareto_tail_for_moment(epsilon):
    """Tail index giving a finite (1 + epsilon)-moment with a margin of 0.1."""
    return 1.0 + epsilon + 0.1


def sample_cauchy(location, scale, u):
    """Inverse-CDF transform ``location + scale * tan(pi (u - 1/2))``."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise DomainError("uniform variate must lie strictly inside (0, 1)")
    out = location + scale * np.tan(np.pi * (u - 0.5))
    return float(out) if out.ndim == 0 else out


def sample_symmetric_pareto(tail_index, rng, size=None):
    """Random sign times ``U^(-1/a) - 1``."""
    if not tail_index > 1:
        raise DomainError("tail index must exceed 1")
    u = _open_uniform(rng, 1 if size is None else size)
    sign = np.where(rng.random(len(u)) < 0.5, -1.0, 1.0)
    out = sign * np.expm1(-np.log(u) / tail_index)
    return float(out[0]) if size is None else out


# -- specs and location functions ------------------------------------------

@dataclass(frozen=True)
class SynthSpec:
    noise: object
    n: int
    seed: int = 0
    truth: str = "sin"
    input_law: str = "uniform01"

    def __post_init__(self):
        if int(self.n) < 1:
            raise UsageError("n must be at least 1")
        if self.truth != "sin":
            raise UsageError(f"unknown truth function {self.truth!r}")
        if self.input_law != "uniform01":
            raise UsageError(f"unknown input law {self.input_law!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise UsageError("seed must be a 64-bit unsigned integer")


def case_spec(case, n, seed=0):
    """Simulation settings for the two figure cases: 1 (heteroscedastic mixture) or 2 (Cauchy)."""
    if case == 1:
        return SynthSpec(MixtureHetero(), n, seed)
    if case == 2:
        return SynthSpec(Cauchy(), n, seed)
    raise UsageError(f"case must be 1 or 2, got {case!r}")


def simulate(spec, *stream):
    """Draw ``spec.n`` i.i.d. pairs. Extra integers select an RNG sub-stream."""
    rng = rng_stream(spec.seed, *stream)
    x = rng.random(spec.n)
    eps = spec.noise.sample(x, rng)
    return Dataset(x[:, None], sin_truth(x) + eps)


def eval_truth(spec, x):
    return sin_truth(x)


class LocationFunctions:
    """Conditional mean, mode and median of Y given X, where they exist.

    Accessing a missing one raises ``UndefinedLocationError``.
    """
    KINDS = ("mean", "mode", "median")

    def __init__(self, mean=None, mode=None, median=None):
        self._fns = {"mean": mean, "mode": mode, "median": median}

    def available(self):
        return [k for k in self.KINDS if self._fns[k] is not None]

    def get(self, kind):
        if kind not in self._fns:
            raise UsageError(f"unknown location function {kind!r}")
        fn = self._fns[kind]
        if fn is None:
            raise UndefinedLocationError(f"conditional {kind} is undefined for this noise")
        return fn

    @property
    def mean(self):
        return self.get("mean")

    @property
    def mode(self):
        return self.get("mode")

    @property
    def median(self):
        return self.get("median")


def _case1_mode(x):
    x = np.asarray(x, dtype=float)
    return sin_truth(x) + 1.0 + 2.0 * x


def location_functions(spec):
    noise = spec.noise
    if isinstance(noise, MixtureHetero):
        # the mode is the usual closed-form approximation; see
        # diagnostics.exact_case1_mode for the exact curve
        return LocationFunctions(mean=sin_truth, mode=_case1_mode)
    if isinstance(noise, Cauchy):
        return LocationFunctions(mode=sin_truth, median=sin_truth)
    if isinstance(noise, (SymmetricPareto, GaussianNoise)):
        return LocationFunctions(mean=sin_truth, mode=sin_truth, median=sin_truth)
    raise UsageError(f"no location functions known for {type(noise).__name__}")


# -- dataset CSV -------------------------------------------------------------

def write_csv(data, path_or_buf):
    d = data.x.shape[1]
    header = ",".join([f"x{j + 1}" for j in range(d)] + ["y"])
    lines = [header]
    for xi, yi in zip(data.x, data.y):
        lines.append(",".join(f"{v:.17g}" for v in (*xi, yi)))
    text = "\n".join(lines) + "\n"
    if isinstance(path_or_buf, io.TextIOBase):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if len(header) < 2 or header[-1] != "y" or any(
                h != f"x{j + 1}" for j, h in enumerate(header[:-1])):
            raise UsageError(f"{path}: header must be x1,...,xd,y")
        try:
            arr = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise UsageError(f"{path}: {exc}") from None
    if arr.shape[0] == 0:
        raise UsageError(f"{path}: no data rows")
    if arr.shape[1] != len(header):
        raise UsageError(f"{path}: expected {len(header)} columns")
    return Dataset(arr[:, :-1], arr[:, -1])
