import math

import numpy as np
import pytest

from scartower.analytics import (
    DistributionSpec,
    failure_rate_scan,
    fit_gaussian,
    gaussian_params_analytic,
    loglinear_r_squared,
    pn_analytic,
    pn_exact_smallL,
    tolerance_probability,
)
from scartower.models import model_names

EXACT_FORM_MODELS = ("xx_spin_half", "domain_wall", "dicke", "xx_spin1")


def test_no_excitation_limit():
    for name in model_names():
        dist = pn_analytic(name, 8, 1e-12)
        assert dist.p[0] >= 1.0 - 1e-9


def test_degenerate_weights_are_point_masses():
    dist0 = pn_analytic("dicke", 6, 0.0)
    assert dist0.p[0] == 1.0 and dist0.p[1:].sum() == 0.0
    dist1 = pn_analytic("dicke", 6, 1.0)
    assert dist1.p[-1] == 1.0


def test_dicke_small_binomial():
    dist = pn_analytic("dicke", 2, 0.5)
    np.testing.assert_allclose(dist.p, [0.25, 0.5, 0.25], atol=1e-12)


def test_aklt_closed_form_small_fractions():
    # counting factors (1, 6, 24) evaluate to weights (1, 6, 6)/13
    dist = pn_analytic("aklt", 4, 0.5)
    np.testing.assert_allclose(dist.p, np.array([1.0, 6.0, 6.0]) / 13.0, atol=1e-12)


@pytest.mark.parametrize("name", EXACT_FORM_MODELS)
@pytest.mark.parametrize("L", [4, 6, 8])
def test_closed_form_matches_brute_force(name, L):
    from scartower.models import get_model

    model = get_model(name)
    if model.even_length_only and L % 2:
        pytest.skip("even only")
    if model.d == 3 and L > 6:
        pytest.skip("keep the dense oracle small")
    w = 0.35
    ana = pn_analytic(name, L, w)
    brute = pn_exact_smallL(name, L, w)
    assert 0.5 * np.abs(ana.p - brute.p).sum() <= 1e-10


def test_aklt_closed_form_deviates_from_brute_force():
    # documented defect of the ladder counting factor: the excitation tower
    # of the matrix-product base is not an exact ladder of a closed algebra,
    # so the quoted factor overestimates higher norms
    ana = pn_analytic("aklt", 4, 0.5)
    brute = pn_exact_smallL("aklt", 4, 0.5)
    np.testing.assert_allclose(brute.p, np.array([21.0, 24.0, 16.0]) / 61.0,
                               atol=1e-12)
    assert 0.5 * np.abs(ana.p - brute.p).sum() > 0.1


def test_log_space_stays_finite_at_large_L():
    for name in ("aklt", "xx_spin_half", "dicke"):
        dist = pn_analytic(name, 1000, 0.3)
        assert np.all(np.isfinite(dist.log_weights))
        assert dist.p.sum() == pytest.approx(1.0, abs=1e-12)


def test_gaussian_params_examples():
    fit = gaussian_params_analytic("aklt", 128, 0.25)
    assert fit.n0 == pytest.approx(32.0)
    assert fit.delta == pytest.approx(math.sqrt(32.0 * 0.75 / 3.5), abs=1e-12)
    assert fit.delta == pytest.approx(2.6186, abs=2e-4)

    fit = gaussian_params_analytic("xx_spin_half", 128, 0.5)
    assert fit.n0 == pytest.approx(35.378, abs=2e-3)
    assert fit.delta == pytest.approx(3.3836, abs=2e-4)

    fit = gaussian_params_analytic("xx_spin1", 100, 0.25)
    assert fit.n0 == pytest.approx(25.0)
    assert fit.delta == pytest.approx(math.sqrt(25.0 * 0.75), abs=1e-12)
    assert fit.delta == pytest.approx(4.3301, abs=1e-4)


def test_fit_recovers_exact_gaussian():
    ns = np.arange(200)
    n0, delta = 88.0, 6.5
    logp = -((ns - n0) ** 2) / (2 * delta**2)
    p = np.exp(logp - logp.max())
    p /= p.sum()
    dist = DistributionSpec("synthetic", 200, 0.5, ns, p, np.log(p))
    fit = fit_gaussian(dist)
    assert fit.n0 == pytest.approx(n0, rel=1e-6)
    assert fit.delta == pytest.approx(delta, rel=1e-6)


def test_fit_requires_support():
    dist = pn_analytic("dicke", 3, 0.5)
    with pytest.raises(ValueError, match="insufficient support"):
        fit_gaussian(dist)


@pytest.mark.parametrize("name,w", [("xx_spin_half", 0.25), ("xx_spin_half", 0.5),
                                    ("domain_wall", 0.25)])
def test_fit_matches_closed_form_where_exact(name, w):
    dist = pn_analytic(name, 128, w)
    fit = fit_gaussian(dist)
    ana = gaussian_params_analytic(name, 128, w)
    assert abs(fit.n0 - ana.n0) / ana.n0 <= 0.02
    assert abs(fit.delta - ana.delta) / ana.delta <= 0.05


@pytest.mark.xfail(
    strict=True,
    reason="the registered closed-form width for the pair-flip family over the"
    " matrix-product base disagrees with the fitted width of its own"
    " distribution; the fit instead tracks sqrt(n0 (1-w)/2)",
)
def test_aklt_fitted_width_matches_registered_form():
    dist = pn_analytic("aklt", 128, 0.25)
    fit = fit_gaussian(dist)
    ana = gaussian_params_analytic("aklt", 128, 0.25)
    assert abs(fit.delta - ana.delta) / ana.delta <= 0.05


def test_aklt_fitted_width_tracks_exact_saddle_point():
    for w in (0.1, 0.25, 0.5):
        dist = pn_analytic("aklt", 128, w)
        fit = fit_gaussian(dist)
        ana = gaussian_params_analytic("aklt", 128, w)
        assert abs(fit.n0 - ana.n0) / ana.n0 <= 0.02
        alt = math.sqrt(fit.n0 * (1.0 - w) / 2.0)
        assert abs(fit.delta - alt) / alt <= 0.02


def test_width_scales_as_sqrt_center():
    # fixed w, growing L: the width-center log-log slope is 1/2
    for name in ("aklt", "xx_spin_half"):
        pts = []
        for L in (64, 128, 256, 512):
            fit = fit_gaussian(pn_analytic(name, L, 0.25))
            pts.append((fit.n0, fit.delta))
        logs = np.log(np.array(pts))
        slope = np.polyfit(logs[:, 0], logs[:, 1], 1)[0]
        assert abs(slope - 0.5) <= 0.05


def test_stationary_point_agrees_with_closed_center():
    for name, w in (("aklt", 0.25), ("xx_spin_half", 0.4), ("dicke", 0.3)):
        fit = fit_gaussian(pn_analytic(name, 128, w))
        ana = gaussian_params_analytic(name, 128, w)
        assert abs(fit.n0 - ana.n0) <= 0.5


def test_tolerance_probability_full_and_empty_windows():
    ns = np.arange(3, 6)
    p = np.array([0.25, 0.5, 0.25])
    dist = DistributionSpec("synthetic", 8, 0.5, ns, p, np.log(p))
    full = tolerance_probability(dist, 4.0, 0.9)  # window (0.4, 7.6) covers all
    assert full.p_within == pytest.approx(1.0, abs=1e-12)
    assert full.epsilon == pytest.approx(0.0, abs=1e-12)
    point_mass = pn_analytic("dicke", 16, 0.0)
    outside = tolerance_probability(point_mass, 4.0, 0.2)  # window (3.2, 4.8)
    assert outside.p_within == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        tolerance_probability(point_mass, 0.3, 0.5)  # window (0.15, 0.45)


def test_tolerance_window_is_strict():
    ns = np.arange(5)
    p = np.full(5, 0.2)
    dist = DistributionSpec("synthetic", 4, 0.5, ns, p, np.log(p))
    rep = tolerance_probability(dist, 2.0, 0.5)  # window (1, 3): only n = 2
    assert rep.p_within == pytest.approx(0.2, abs=1e-12)


def test_failure_rate_decreases_with_L():
    scan = failure_rate_scan("aklt", 0.25, 0.2, [32, 64, 128, 256])
    eps = [e for _, e in scan]
    assert all(b < a for a, b in zip(eps, eps[1:]))
    r2 = loglinear_r_squared(np.array([32, 64, 128, 256], float), np.log(eps))
    assert r2 > 0.97


def test_failure_rate_loglinear_in_asymptotic_regime():
    scan = failure_rate_scan("aklt", 0.25, 0.2, [128, 256, 512, 1024])
    xs = np.array([L for L, _ in scan], float)
    ys = np.log([e for _, e in scan])
    assert loglinear_r_squared(xs, ys) >= 0.99
