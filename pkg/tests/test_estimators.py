import numpy as np
import pytest

from nafdyn import MethodVariant, build_tully
from nafdyn.estimators import (
    EstimateSeries,
    NuclearObservable,
    estimate_naf,
    estimate_population,
    estimate_tw_coherence_initial,
    estimate_tw_pop_coherence,
    estimate_tw_population,
    flux_correlation_from_correlators,
    flux_flux_rate,
    integrate_rate,
    marcus_rate,
    momentum_histogram,
    population_difference,
    scattering_probabilities,
)
from nafdyn.exact import propagator
from nafdyn.models import ElectronicInit
from nafdyn.propagation import run_history

from conftest import rng
from test_propagation import ConstantVModel


def frozen_history(method, n_traj=60_000, seed=21, electronic=None, scale=1.0):
    r = rng(9)
    H = scale * 0.5 * (lambda h: h + h.T)(r.standard_normal((2, 2)))
    model = ConstantVModel(H)
    variant = MethodVariant(method)
    w = np.linalg.eigvalsh(H)
    t_max = 2 * np.pi / (w[1] - w[0])
    dt = t_max / 40.0
    hist = run_history(model, variant, n_traj, dt, t_max, stride=10, seed=seed,
                       electronic=electronic)
    return hist, H


def exact_correlator(H, t, n, m, k, l):
    U = propagator(H, t)
    return U[l, n] * np.conj(U[k, m])


def test_tw_population_matches_exact_two_state():
    hist, H = frozen_history("naf-tw")
    # frozen nuclei: dynamics in the adiabatic frame of the constant H
    w, T = np.linalg.eigh(H)
    for k in (0, 1):
        s = estimate_tw_population(hist, k, basis="diabatic")
        assert s.values[0].real == pytest.approx(1.0 if k == 0 else 0.0, abs=1e-12)
        for t, v, err in zip(s.times, s.values, s.stderr):
            exact = abs(propagator(H, t)[k, 0]) ** 2
            assert abs(v.real - exact) <= max(3 * err, 5e-3)


def test_tw_pop_coherence_matches_exact():
    hist, H = frozen_history("naf-tw")
    for (k, l) in ((0, 1), (1, 0)):
        s = estimate_tw_pop_coherence(hist, k, l, basis="diabatic")
        for t, v, err in zip(s.times, s.values, s.stderr):
            exact = exact_correlator(H, t, 0, 0, k, l)
            assert abs(v - exact) <= max(3 * err, 5e-3)


def test_tw_coherence_initial_matches_exact():
    electronic = ElectronicInit("coherence", (0, 1))
    hist, H = frozen_history("naf-tw", electronic=electronic)
    for (n, m) in ((0, 1), (1, 0)):
        for (k, l) in ((0, 1), (1, 0), (0, 0)):
            s = estimate_tw_coherence_initial(hist, n, m, k, l, basis="diabatic")
            for t, v, err in zip(s.times, s.values, s.stderr):
                exact = exact_correlator(H, t, n, m, k, l)
                assert abs(v - exact) <= max(3 * err, 6e-3)


def test_naf_estimator_matches_exact():
    hist, H = frozen_history("naf")
    for (n, m, k, l) in ((0, 0, 0, 0), (0, 0, 1, 1), (0, 0, 0, 1)):
        s = estimate_naf(hist, n, m, k, l, basis="diabatic")
        for t, v, err in zip(s.times, s.values, s.stderr):
            exact = exact_correlator(H, t, n, m, k, l)
            assert abs(v - exact) <= max(3 * err, 8e-3)
    # t = 0 population of the occupied state
    s = estimate_naf(hist, 0, 0, 0, 0, basis="diabatic")
    assert abs(s.values[0] - 1.0) <= max(3 * s.stderr[0], 8e-3)


def test_population_sum_rule_and_positivity():
    model = build_tully("ecr")
    hist = run_history(model, MethodVariant("naf-tw"), 400, 1.0, 2400.0,
                       stride=200, seed=3)
    total = np.zeros(len(hist.times))
    for k in (0, 1):
        s = estimate_tw_population(hist, k, basis="adiabatic")
        vals = s.values.real
        assert np.nanmin(vals) >= 0.0
        assert np.nanmax(vals) <= 1.0
        total += vals
    assert np.allclose(total, 1.0, atol=1e-12)


def test_population_difference():
    hist, H = frozen_history("naf-tw", n_traj=20_000)
    d = population_difference(hist, basis="diabatic")
    assert d.values[0].real == pytest.approx(1.0, abs=1e-12)
    p1 = estimate_population(hist, 0, basis="diabatic")
    p2 = estimate_population(hist, 1, basis="diabatic")
    assert np.allclose(d.values.real, p1.values.real - p2.values.real)


def test_scattering_probabilities_partition():
    model = build_tully("sac")
    hist = run_history(model, MethodVariant("naf-tw"), 300, 0.5, 2000.0,
                       stride=400, seed=5)
    probs = scattering_probabilities(hist)
    total = sum(s.values[-1].real for s in probs.values())
    assert total == pytest.approx(1.0, abs=1e-12)
    for s in probs.values():
        assert s.values[-1].real >= 0.0


def test_momentum_histogram_normalization():
    model = build_tully("sac")
    hist = run_history(model, MethodVariant("naf-tw"), 200, 0.5, 500.0,
                       stride=250, seed=6)
    bins = np.arange(-40.0, 41.0, 2.0)
    series = momentum_histogram(hist, bins)
    for s in series:
        dens = s.values.real
        assert np.sum(dens * 2.0) == pytest.approx(1.0, abs=1e-10)


def test_csv_round_trip_with_missing(tmp_path):
    times = np.array([0.0, 1.0, 2.0])
    vals = np.array([1.0 + 0.5j, np.nan + 1j * np.nan, 0.25 - 0.125j])
    es = EstimateSeries(times, vals, np.array([0.01, np.nan, 0.02]),
                        np.array([100, 100, 99]), {"kind": "population", "state": 1})
    path = tmp_path / "series.csv"
    es.to_csv(path)
    text = path.read_text().splitlines()
    assert text[0] == "# nafdyn-series v1"
    assert text[3].split(",")[1] != ""
    assert text[4].split(",")[1] == ""  # missing value writes empty fields
    back = EstimateSeries.from_csv(path)
    assert np.isnan(back.values[1].real)
    assert back.values[0] == vals[0]
    assert back.descriptor == {"kind": "population", "state": 1}
    assert np.array_equal(back.n_traj, es.n_traj)


def test_marcus_rate_properties():
    lam, delta, beta = 2.39e-2, 5e-5, 1052.58
    k_act = marcus_rate(lam, lam, delta, beta)
    assert k_act == pytest.approx(delta**2 * np.sqrt(np.pi * beta / lam), rel=1e-12)
    assert marcus_rate(0.0, lam, delta, beta) == pytest.approx(
        marcus_rate(2 * lam, lam, delta, beta), rel=1e-12)
    # bell shape: rises to eps = lambda, falls beyond
    eps = np.linspace(0.0, 2.5 * lam, 11)
    ks = np.array([marcus_rate(e, lam, delta, beta) for e in eps])
    peak = np.argmax(ks)
    assert np.all(np.diff(ks[: peak + 1]) >= 0)
    assert np.all(np.diff(ks[peak:]) <= 0)


def test_flux_operator_identity():
    delta = 0.3
    f_op = 1j * delta * np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert np.allclose(f_op @ f_op, delta**2 * np.eye(2))
    # conjugate-pair structure makes Re C_FF real by construction
    c = flux_correlation_from_correlators(0.2 + 0.1j, 0.05 - 0.02j,
                                          0.05 + 0.02j, 0.2 - 0.1j, delta)
    assert c.imag == pytest.approx(0.0, abs=1e-15)


def test_integrate_rate_plateau():
    t = np.linspace(0.0, 60.0, 600)
    cff = np.exp(-t / 3.0) * np.cos(t)
    k, converged, running = integrate_rate(t, cff)
    exact = 3.0 / (1 + 9.0)  # int exp(-t/3) cos t dt = a/(1+a^2), a = 3
    assert converged
    assert k == pytest.approx(exact, rel=1e-3)
    k2, converged2, _ = integrate_rate(t[:40], cff[:40])
    assert not converged2


def test_flux_flux_frozen_limit():
    # frozen two-state system: C_FF from the ensemble matches the matrix
    # exponential expression
    electronic = ElectronicInit("coherence", (0, 1))
    hist, H = frozen_history("naf-tw", n_traj=60_000, electronic=electronic)
    delta = 0.2
    series, rate, converged = flux_flux_rate(hist, delta)
    f_op = 1j * delta * np.array([[0.0, 1.0], [-1.0, 0.0]])
    for t, v, err in zip(series.times, series.values, series.stderr):
        U = propagator(H, t)
        exact = np.trace(f_op @ U.conj().T @ f_op @ U)
        assert abs(v - exact) <= max(4 * err, 2e-3)
