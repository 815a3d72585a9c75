import math

import numpy as np
import pytest
from scipy import integrate

from aoiviol import analytic
from aoiviol.analytic import (
    CEIL_IDLE,
    EXP_IDLE,
    ExistenceError,
    ceil_mean,
    ceil_mean_exponential,
    departure_rate,
    dm11_departure_rate,
    dm11_violation,
    general_violation,
    gk_tail_gg11,
    mm11_expected_aoi,
    mm11_mean_g,
    mm11_violation,
    zero_wait_exp_violation,
)
from aoiviol.dists import Deterministic, Erlang, Exponential, RngStream, ShiftedExponential
from aoiviol.sample_path import Discipline, SystemSpec, simulate, violation_estimate

SE_MEAN1 = ShiftedExponential.with_mean(0.11, 1.0)


@pytest.mark.parametrize("lam, mu, d, expected, tol", [
    (1, 1, 0, 1.0, 1e-12),
    (1, 1, 5, 0.082541, 5e-6),
    (2, 1, 1, 0.78087, 5e-6),
])
def test_mm11_examples(lam, mu, d, expected, tol):
    r = mm11_violation(lam, mu, d)
    assert r.value == pytest.approx(expected, abs=tol)
    assert r.method == "closed_form"


def test_mm11_expected_aoi():
    assert mm11_expected_aoi(1, 1).value == pytest.approx(2.5)
    assert mm11_expected_aoi(math.inf, 1).value == pytest.approx(2.0)
    assert mm11_expected_aoi(1, 2).value == pytest.approx(5 / 3)


def test_dm11_examples():
    assert dm11_violation(1, 1, 2).value == pytest.approx(0.42934, abs=2e-5)
    with pytest.raises(ExistenceError):
        dm11_violation(1, 1, 0.5)
    assert dm11_departure_rate(0.4, 1) == pytest.approx(0.36717, abs=5e-6)


def test_dm11_hand_evaluation():
    e = math.e
    hand = math.exp(-2) * (1 / (1 - 1 / e) + 1 + 2 * e - 3) * (1 - 1 / e)
    assert dm11_violation(1, 1, 2).value == pytest.approx(hand, abs=1e-12)


def test_dm11_against_simulation_off_lattice():
    # lambda d not an integer exercises the ceil term
    path = simulate(SystemSpec(Discipline.GG11, Exponential(1.0), Deterministic(1 / 0.7)), 200_000, seed=21)
    est = violation_estimate(path, 2.3)
    assert abs(est.value - dm11_violation(0.7, 1.0, 2.3).value) < max(4 * est.std_error, 0.003)


def test_zero_wait_examples():
    assert zero_wait_exp_violation(1, 0).value == 1.0
    assert zero_wait_exp_violation(1, 1).value == pytest.approx(2 / math.e, abs=1e-12)
    assert zero_wait_exp_violation(2, 5).value == pytest.approx(11 * math.exp(-10), rel=1e-12)


def test_ceil_mean_exponential():
    assert ceil_mean_exponential(1, 1) == pytest.approx(1.58198, abs=1e-5)
    assert ceil_mean_exponential(2, 1) == pytest.approx(2.5415, abs=1e-4)
    assert ceil_mean_exponential(1e-3, 1) == pytest.approx(1.0, abs=1e-12)
    x = Exponential(1.0).sample(RngStream(8).generator, 1_000_000)
    mc = np.ceil(x)
    assert abs(mc.mean() - 1.58198) < 4 * mc.std() / 1000


@pytest.mark.parametrize("law", [Exponential(1.3), SE_MEAN1, Erlang(3, 2.0), Deterministic(0.7)], ids=str)
def test_ceil_mean_matches_monte_carlo(law):
    x = np.asarray(law.sample(RngStream(2).generator, 400_000), dtype=float)
    mc = np.ceil(0.8 * x)
    assert abs(ceil_mean(0.8, law) - mc.mean()) < 4 * max(mc.std(), 1e-3) / math.sqrt(len(x))


def test_branch_continuity():
    for d in (0.0, 1.0, 5.0):
        ref = mm11_violation(1.0, 1.0, d).value
        for lam in (1 + 1e-6, 1 - 1e-6):
            assert abs(mm11_violation(lam, 1.0, d).value - ref) < 1e-4


def test_series_branch_matches_exact_branch_outside_cancellation():
    # at |lam - mu|/mu = 1e-4 both formulas are still accurate
    for d in (0.5, 3.0, 8.0):
        lam = 1 - 1e-4 * (1 + 1e-9)
        exact_branch = mm11_mean_g(lam, 1.0, d)
        series_branch = mm11_mean_g(1 - 0.99e-4, 1.0, d)
        assert exact_branch == pytest.approx(series_branch, rel=1e-5)


def test_mean_tail_identity():
    for lam, mu in ((1, 1), (2, 1), (0.5, 1.5)):
        area, _ = integrate.quad(lambda d: mm11_violation(lam, mu, d).value, 0, np.inf, limit=200)
        assert area == pytest.approx(mm11_expected_aoi(lam, mu).value, rel=1e-4)


def test_zero_wait_consistency():
    for d in (0.0, 1.0, 3.0, 5.0):
        assert abs(mm11_violation(1e6, 1.0, d).value - zero_wait_exp_violation(1.0, d).value) < 1e-4


def test_violation_outputs_monotone_and_bounded():
    ds = np.linspace(0, 12, 49)
    for f in (lambda d: mm11_violation(0.7, 1.3, d), lambda d: zero_wait_exp_violation(2.0, d),
              lambda d: dm11_violation(1.0, 1.0, d) if d >= 1 else None):
        vals = [r.value for r in map(f, ds) if r is not None]
        assert all(0 <= v <= 1 for v in vals)
        assert np.all(np.diff(vals) <= 1e-13)


@pytest.mark.parametrize("lam, model", [(0.6, EXP_IDLE), (0.6, CEIL_IDLE), (1.7, CEIL_IDLE)])
@pytest.mark.parametrize("law", [Exponential(1.0), SE_MEAN1, Erlang(2, 1.5), Deterministic(0.8)], ids=str)
def test_gk_tail_below_envelope(lam, model, law):
    d = 3.0
    gen = RngStream(4).generator
    x = np.asarray(law.sample(gen, 200_000), dtype=float)
    if model == EXP_IDLE:
        idle = Exponential(lam).sample(gen, len(x))
    else:
        idle = np.ceil(lam * x - 1e-12) / lam - x
    for y in (0.0, 0.5, 1.0, 2.0, 4.0):
        t = gk_tail_gg11(lam, law, model, y, d)
        assert 0.0 <= t <= 1.0
        envelope = (x + idle > y).mean()
        assert t <= envelope + 4 * math.sqrt(envelope * (1 - envelope) / len(x)) + 1e-12


def test_gk_tail_integrates_to_mm11_mean():
    for d in (0.0, 1.0, 5.0):
        area, _ = integrate.quad(lambda y: gk_tail_gg11(1.0, Exponential(1.0), EXP_IDLE, y, d), 0, np.inf,
                                 limit=200)
        assert area == pytest.approx(0.5 * math.exp(-d) * (d + 2) ** 2, abs=1e-6)


def test_gk_tail_integrates_to_dm11():
    nu = dm11_departure_rate(1.0, 1.0)
    area, _ = integrate.quad(lambda y: gk_tail_gg11(1.0, Exponential(1.0), CEIL_IDLE, y, 2.0), 0, 40,
                             points=[1, 2, 3], limit=200)
    assert nu * area == pytest.approx(dm11_violation(1, 1, 2).value, abs=1e-6)


def test_gk_tail_rejects_unknown_idle_model():
    with pytest.raises(ValueError):
        gk_tail_gg11(1.0, Exponential(1.0), "erlang", 1.0, 1.0)
    with pytest.raises(ValueError):
        general_violation(1.0, Exponential(1.0), "erlang", 1.0)


@pytest.mark.parametrize("lam, d", [(0.5, 1), (0.5, 5), (1, 3), (2, 1), (2, 5)])
def test_general_reduces_to_mm11(lam, d):
    r = general_violation(lam, Exponential(1.0), EXP_IDLE, d)
    assert r.method == "quadrature" and r.abs_error_bound >= 0
    assert r.value == pytest.approx(mm11_violation(lam, 1.0, d).value, abs=1e-6)


@pytest.mark.parametrize("lam, d", [(0.5, 2), (0.5, 5), (1, 2), (1, 5), (0.7, 2.3)])
def test_general_reduces_to_dm11(lam, d):
    r = general_violation(lam, Exponential(1.0), CEIL_IDLE, d)
    assert r.value == pytest.approx(dm11_violation(lam, 1.0, d).value, abs=1e-6)


def test_general_existence():
    with pytest.raises(ExistenceError):
        general_violation(0.5, SE_MEAN1, CEIL_IDLE, 1.5)


def test_general_dd_closed_form():
    r = general_violation(1.0, Deterministic(0.4), CEIL_IDLE, 1.0)
    assert r.value == pytest.approx(0.4, abs=1e-12)


def test_general_msexp_against_simulation():
    r = general_violation(0.45, SE_MEAN1, EXP_IDLE, 5.0)
    assert 0.0 <= r.value <= 1.0
    path = simulate(SystemSpec(Discipline.GG11, SE_MEAN1, Exponential(0.45)), 1_000_000, seed=31)
    est = violation_estimate(path, 5.0)
    assert abs(est.value - r.value) < 3 * est.std_error + 1e-4


def test_departure_rates():
    assert departure_rate(0.5, Exponential(2.0), EXP_IDLE) == pytest.approx(0.4)
    assert departure_rate(0.4, Exponential(1.0), CEIL_IDLE) == pytest.approx(dm11_departure_rate(0.4, 1.0))
    with pytest.raises(ValueError):
        departure_rate(0.4, Exponential(1.0), "other")


def test_invalid_inputs():
    with pytest.raises(ValueError):
        mm11_violation(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        zero_wait_exp_violation(1.0, -0.1)
