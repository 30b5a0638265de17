"""Median regression under Cauchy noise, against a kernel ridge baseline.

Cauchy noise has no mean, so least squares has nothing to converge to. The
noise is symmetric with its median and mode at zero, so a small-sigma
Welsch fit should still find 2 sin(pi x).

    python demos/cauchy_median.py
"""
import math

import numpy as np

from mccr import GaussianKernel, fit_mccr, fit_ridge, predict
from mccr.modelsel import CvConfig, cross_validate
from mccr.synth import case_spec, location_functions, simulate

spec = case_spec(2, 200, seed=4)
train, test = simulate(spec, 0), simulate(spec, 1)
median = location_functions(spec).median

print("largest |y| in the training draw:", np.abs(train.y).max().round(1))

# Ridge gets its own cross-validation so the comparison is not rigged.
cfg = CvConfig(bandwidth_grid=(0.05, 0.1, 0.2, 0.5), lambda_grid=(1e-4, 1e-3, 1e-2, 1e-1))
ridge_cv = cross_validate(train, math.inf, cfg)
ridge = fit_ridge(train.x, train.y, GaussianKernel(ridge_cv.chosen_bandwidth), ridge_cv.chosen_lambda)

# sigma = 0.01 is far below the noise scale of 0.5; annealing starts wide
# and halves sigma down to it, warm-starting each stage.
robust, report = fit_mccr(train.x, train.y, GaussianKernel(0.2), 1e-10, 0.01)
print("annealing stages:", ", ".join(f"{s:.3g}" for s in report.stage_sigmas))

xt = test.x.ravel()
for name, model in (("ridge", ridge), ("welsch, sigma=0.01", robust)):
    err = np.sqrt(np.mean((predict(model, test.x) - median(xt)) ** 2))
    print(f"{name:>20}: rmse against the conditional median {err:.3f}")
