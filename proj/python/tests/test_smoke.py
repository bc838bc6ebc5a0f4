"""Smoke tests for the python bindings: fit the bundled models, check the
published statistics, and exercise a small power run end to end."""

import math

import pytest

import loglin


def test_builtin_models():
    vac = loglin.Model.builtin("vaccine")
    assert vac.cells == 4
    assert vac.params == 2
    assert vac.dof == 2
    assert not vac.has_overall_effect
    assert vac.kernel == [[1, -2, 1, 1], [0, 1, -2, 1]]

    ind = loglin.Model.builtin("indep2x2")
    assert ind.dof == 1
    assert ind.has_overall_effect


def test_vaccine_mle_matches_closed_form():
    vac = loglin.Model.builtin("vaccine")
    fit = loglin.mle(vac, [80, 12, 44, 64])
    th0, th1 = 308 / 428, 120 / 428
    closed = [th0**3, th0**2 * th1, th0 * th1, th1]
    assert fit["kind"] == "probability"
    for got, want in zip(fit["fitted"], closed):
        assert abs(got - want) < 1e-8
    assert abs(fit["gamma"] - 200 * (th0**2 + th0 + 1) / 428) < 1e-6


def test_gof_statistics():
    vac = loglin.Model.builtin("vaccine")
    y = [80, 12, 44, 64]
    fit = loglin.mle(vac, y)
    yhat = [200 * p for p in fit["fitted"]]
    assert loglin.pearson_x2(y, yhat) == pytest.approx(11.85, abs=0.01)
    assert loglin.deviance_g2(y, yhat) == pytest.approx(14.65, abs=0.01)


def test_chi2_functions():
    q = loglin.chi2_quantile(0.95, 2)
    assert q == pytest.approx(5.991464547, abs=1e-8)
    assert loglin.chi2_cdf(q, 2) == pytest.approx(0.95, abs=1e-12)
    assert loglin.classical_power(11.85, 2, 0.05) == pytest.approx(0.88, abs=0.01)
    assert loglin.classical_power(0.0, 2, 0.05) == pytest.approx(0.05, abs=1e-9)
    assert loglin.noncentral_chi2_cdf(q, 2, 0.0) == pytest.approx(0.95, abs=1e-12)


def test_canonical_params():
    vac = loglin.Model.builtin("vaccine")
    c = vac.canonical_params([0.4, 0.06, 0.22, 0.32])
    assert math.exp(c[0]) == pytest.approx(7.822, abs=1e-3)
    assert math.exp(c[1]) == pytest.approx(0.397, abs=1e-3)
    s = vac.mean_value_params([80, 12, 44, 64])
    assert s == pytest.approx([308.0, 120.0])


def test_alternative_sampling_and_reproducibility():
    ind = loglin.Model.builtin("indep2x2")
    alt = ind.with_odds([5.0])
    pi1 = loglin.sample_alternative(alt, seed=7, stream=3)
    pi2 = loglin.sample_alternative(alt, seed=7, stream=3)
    assert pi1 == pi2
    odds = pi1[0] * pi1[3] / (pi1[1] * pi1[2])
    assert odds == pytest.approx(5.0, abs=1e-6)
    assert sum(pi1) == pytest.approx(1.0, abs=1e-9)


def test_small_power_run():
    vac = loglin.Model.builtin("vaccine")
    alt = vac.with_odds([1.0, 3.0])
    ests = loglin.cumulative_power(vac, alt, 200, [0.05, 0.10], 400, seed=4242)
    assert ests[0]["n_sim"] == 400
    assert 0.7 < ests[0]["rate"] <= 1.0
    assert ests[1]["rate"] >= ests[0]["rate"]

    again = loglin.cumulative_power(vac, alt, 200, [0.05, 0.10], 400, seed=4242)
    assert [e["rate"] for e in again] == [e["rate"] for e in ests]


def test_errors_are_typed():
    vac = loglin.Model.builtin("vaccine")
    with pytest.raises(loglin.LoglinError):
        loglin.mle(vac, [5, 0, 0, 0])
    with pytest.raises(loglin.LoglinError):
        loglin.Model([[1, 0], [1, 0]])
