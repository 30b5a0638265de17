"""Letting sigma grow with n.

With noise that only has a (1 + eps)-th moment, the scale is set to
sigma = n**theta. The error then shrinks polynomially in n, and the rate
exponent stops improving once eps passes 2.

    python demos/rate_schedule.py
"""
import tempfile

from mccr.harness import ExperimentConfig, rate_exponent, run_rates, theta_schedule

print("eps    theta(q=1)  rate exponent")
for eps in (0.5, 1.0, 2.0, 3.0, 5.0):
    print(f"{eps:<6} {theta_schedule(eps, 1):<11.4f} {rate_exponent(eps, 1):.4f}")
# past eps = 2 the exponent is pinned at 2/(3(q+1)): 1/3 here

# A small sweep: Pareto noise with tail index 2.1, so the variance is finite
# but the third moment is not. Bandwidth and lambda stay fixed so only
# sigma changes with n.
with tempfile.TemporaryDirectory() as out:
    cfg = ExperimentConfig("rates", epsilons=(1.0,), n_list=(100, 200, 400, 800),
                           trials=5, output_directory=out)
    result = run_rates(cfg)

for row in result["summary"]:
    print(f"n={row['n']:<5} sigma={row['sigma']:.3f}  median squared L2 error {row['median_l2_error']:.4f}")
print(f"fitted log-log slope {result['slopes'][1.0]:.2f}, "
      f"against an upper-bound exponent of -{rate_exponent(1.0, 1):.2f}")
