import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, optimize, stats

from mccr.diagnostics import (DensityGrid, case1_kappa_mode, excess_risk,
                              excess_risk_gap, exact_case1_mode,
                              integrated_squared_distance, l2_rho_error,
                              residual_density_at_zero, theorem1_shift_scan)
from mccr.errors import DomainError, NumericalError, UsageError
from mccr.synth import GaussianNoise, MixtureHetero, SymmetricPareto, sin_truth

SQRT_PI = math.sqrt(math.pi)


def gauss(mu=0.0, s=1.0):
    return lambda t: stats.norm.pdf(t, mu, s)


# -- residual density ----------------------------------------------------------

def test_residual_density_values():
    assert residual_density_at_zero(np.zeros(7), 0.5) == pytest.approx(2.0)
    assert residual_density_at_zero([0.3], 0.3) == pytest.approx(math.exp(-1) / 0.3)
    assert residual_density_at_zero([0.0, 1.0], 1.0) == pytest.approx(0.68393972, abs=1e-8)
    with pytest.raises(UsageError):
        residual_density_at_zero([], 1.0)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30), st.floats(0.05, 5))
def test_residual_density_is_scaled_correntropy(r, sigma):
    r = np.array(r)
    v = residual_density_at_zero(r, sigma)
    assert v == pytest.approx(np.mean(np.exp(-r ** 2 / sigma ** 2)) / sigma, rel=1e-12)
    assert residual_density_at_zero(r[::-1], sigma) == pytest.approx(v, rel=1e-14)


def test_density_and_correntropy_orderings_agree():
    rng = np.random.default_rng(8)
    x = rng.random(100)
    y = sin_truth(x) + rng.standard_cauchy(100) * 0.5
    sigma = 0.3
    # candidate models: perturbed versions of the truth
    cands = [sin_truth(x) + rng.normal(0, 0.5) + rng.normal(0, 0.2, 100) for _ in range(20)]
    dens = [residual_density_at_zero(y - f, sigma) for f in cands]
    corr = [np.mean(np.exp(-(y - f) ** 2 / sigma ** 2)) for f in cands]
    assert list(np.argsort(dens)) == list(np.argsort(corr))


# -- integrated squared distance ------------------------------------------------

def test_isd_identical_is_zero():
    grid = DensityGrid(-10, 10, 2001)
    assert integrated_squared_distance(gauss(), gauss(), grid) == 0.0


@pytest.mark.parametrize("c", [0.5, 2.0, 20.0])
def test_isd_gaussian_shift(c):
    grid = DensityGrid(-40, 40, 8192)
    got = integrated_squared_distance(gauss(), gauss(c), grid)
    closed = (1 - math.exp(-c ** 2 / 4)) / SQRT_PI
    quad, _ = integrate.quad(lambda t: (gauss()(t) - gauss(c)(t)) ** 2, -40, 40,
                             points=[0, c], limit=200)
    assert closed == pytest.approx(quad, abs=1e-10)
    assert got == pytest.approx(closed, abs=1e-6)


def test_isd_reference_values():
    grid = DensityGrid(-40, 40, 8192)
    assert integrated_squared_distance(gauss(), gauss(2.0), grid) == pytest.approx(0.3566358, abs=1e-6)
    assert integrated_squared_distance(gauss(), gauss(20.0), grid) == pytest.approx(0.5641896, abs=1e-6)


def test_isd_symmetric_and_rejects_non_finite():
    grid = DensityGrid(-10, 10, 1001)
    a, b = gauss(0, 1), gauss(0.7, 1.3)
    assert integrated_squared_distance(a, b, grid) == integrated_squared_distance(b, a, grid)
    with pytest.raises(NumericalError):
        integrated_squared_distance(a, lambda t: np.full_like(t, np.nan), grid)


def test_density_grid_validation():
    with pytest.raises(UsageError):
        DensityGrid(1, 1, 10)
    with pytest.raises(UsageError):
        DensityGrid(0, 1, 1)


# -- L2(rho) -------------------------------------------------------------------

def test_l2_rho_error():
    f = lambda x: np.cos(x)
    assert l2_rho_error(f, f) == 0.0
    assert l2_rho_error(lambda x: f(x) + 0.3, f) == pytest.approx(0.09, abs=1e-15)
    assert l2_rho_error(sin_truth, lambda x: np.zeros_like(x)) == pytest.approx(2.0, abs=1e-6)
    with pytest.raises(UsageError):
        l2_rho_error(f, f, input_law="normal")
    with pytest.raises(UsageError):
        l2_rho_error(f, f, n_grid=1)


# -- shift scan ----------------------------------------------------------------

def test_shift_scan_gaussian_small():
    res = theorem1_shift_scan(GaussianNoise().pdf, [-1, -0.5, 0, 0.5, 1])
    assert res.argmin_distance == 0.0
    assert res.argmax_expected_density == 0.0
    expected = np.exp(-res.shifts ** 2 / 4) / (2 * SQRT_PI)
    np.testing.assert_allclose(res.expected_density_values, expected, atol=1e-6)
    assert res.expected_density_values[2] == pytest.approx(0.2820948, abs=1e-7)


def test_shift_scan_pareto_symmetry():
    shifts = np.linspace(-1, 1, 21)
    res = theorem1_shift_scan(SymmetricPareto(3.0).pdf, shifts, DensityGrid(-400, 400, 80001))
    assert res.argmin_distance == 0.0
    assert np.max(np.abs(res.distance_values - res.distance_values[::-1])) < 1e-9


def test_shift_scan_requires_zero():
    with pytest.raises(UsageError):
        theorem1_shift_scan(GaussianNoise().pdf, [])
    with pytest.raises(UsageError):
        theorem1_shift_scan(GaussianNoise().pdf, [0.5, 1.0])


# -- excess-risk gap -----------------------------------------------------------

@pytest.mark.parametrize("delta,sigma,s", [(1.0, 2.0, 1.0), (0.5, 5.0, 0.7), (2.0, 1.5, 2.0)])
def test_excess_risk_closed_form_matches_quadrature(delta, sigma, s):
    def risk(shift):
        g = lambda e: sigma ** 2 * (1 - np.exp(-(e - shift) ** 2 / sigma ** 2)) * stats.norm.pdf(e, 0, s)
        return integrate.quad(g, -np.inf, np.inf)[0]
    assert excess_risk(delta, sigma, s) == pytest.approx(risk(delta) - risk(0.0), rel=1e-8)


def test_gap_limits():
    assert excess_risk_gap(0.0, 3.0, 1.0) == 0.0
    assert excess_risk_gap(1.0, 1e4, 1.0) < 1e-4
    with pytest.raises(DomainError):
        excess_risk_gap(1.0, 0.0, 1.0)


def test_gap_decays_like_inverse_square():
    ratio = excess_risk_gap(1, 40, 1) / excess_risk_gap(1, 20, 1)
    assert abs(ratio - 0.25) < 0.05


# -- Case I mode ---------------------------------------------------------------

def test_kappa_mode_against_root_of_derivative():
    noise = MixtureHetero()

    def dpdf(t):
        return sum(w * stats.norm.pdf(t, m, s) * (m - t) / s ** 2
                   for w, m, s in zip(noise.weights, noise.means, noise.stds))
    root = optimize.brentq(dpdf, 0.5, 1.5, xtol=1e-14)
    mode = case1_kappa_mode()
    assert 0.9 < mode < 1.1
    assert mode == pytest.approx(root, abs=1e-8)


def test_exact_mode_close_to_approximation():
    x = np.linspace(0, 1, 101)
    approx = sin_truth(x) + 1 + 2 * x
    assert np.max(np.abs(exact_case1_mode(x) - approx)) < 0.5
    offset = exact_case1_mode(x) - sin_truth(x)
    assert np.all(np.diff(offset) > 0)
    with pytest.raises(DomainError):
        exact_case1_mode(1.5)
