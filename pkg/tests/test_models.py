import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from pseudoproc import models as m
from pseudoproc.errors import BoundaryError, DomainError, EstimationError, UnsupportedKindError

IND = m.DataModel.independence(2)
CLAY1 = m.DataModel.clayton(1.0)
REG = m.DataModel.regression([0.5, -1.0, 2.0], 0.3)


# copula_cdf

def test_independence_cdf_examples():
    assert m.copula_cdf(IND, (0.5, 0.5)) == 0.25
    assert m.copula_cdf(IND, (1.0, 1.0)) == 1.0


def test_clayton_cdf_half_half_is_one_third():
    assert m.copula_cdf(CLAY1, (0.5, 0.5)) == pytest.approx(1 / 3, abs=1e-15)


def test_clayton_cdf_against_monte_carlo():
    x = m.sample(CLAY1, 10**6, 11).rows
    hits = np.all(x <= 0.5, axis=1)
    se = hits.std() / math.sqrt(len(hits))
    assert abs(hits.mean() - 1 / 3) <= 3 * se


def test_cdf_rejects_out_of_cube_and_regression():
    with pytest.raises(DomainError):
        m.copula_cdf(IND, (1.2, 0.5))
    with pytest.raises(UnsupportedKindError):
        m.copula_cdf(REG, (0.5, 0.5))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_cdf_is_a_copula(alpha, u1, u2, bump):
    model = m.DataModel.clayton(alpha)
    c = m.copula_cdf(model, (u1, u2))
    assert 0.0 <= c <= min(u1, u2) + 1e-12
    assert m.copula_cdf(model, (0.0, u2)) == 0.0
    assert m.copula_cdf(model, (1.0, u2)) == pytest.approx(u2, abs=1e-12)
    assert m.copula_cdf(model, (min(1.0, u1 + bump), u2)) >= c - 1e-12


def test_clayton_parameter_validation():
    with pytest.raises(DomainError):
        m.DataModel.clayton(0.0)
    with pytest.raises(DomainError):
        m.DataModel("clayton", 3, alpha=1.0)
    with pytest.raises(UnsupportedKindError):
        m.DataModel("gumbel", 2)


# grad_cdf

def test_grad_independence_examples():
    np.testing.assert_allclose(m.grad_cdf(IND, (0.3, 0.7)), [0.7, 0.3])
    np.testing.assert_allclose(m.grad_cdf(m.DataModel.independence(3), (0.5, 0.5, 0.5)), [0.25] * 3)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_grad_clayton_matches_central_differences(alpha):
    model = m.DataModel.clayton(alpha)
    g = np.linspace(0.1, 0.9, 9)
    pts = np.array([(a, b) for a in g for b in g])
    diff = np.abs(m.grad_cdf(model, pts) - m.numeric_grad_cdf(model, pts))
    assert diff.max() <= 1e-6


def test_grad_boundary_error():
    with pytest.raises(BoundaryError):
        m.grad_cdf(CLAY1, (0.0, 0.5))
    with pytest.raises(BoundaryError):
        m.numeric_grad_cdf(CLAY1, (1.0, 0.5))


# sampling

def test_sample_is_deterministic_and_readonly():
    a = m.sample(CLAY1, 50, 3)
    b = m.sample(CLAY1, 50, 3)
    assert np.array_equal(a.rows, b.rows)
    with pytest.raises(ValueError):
        a.rows[0, 0] = 0.0
    assert "seed=3" in a.provenance


@pytest.mark.parametrize("model", [IND, CLAY1, m.DataModel.clayton(2.0), m.DataModel.independence(3)],
                         ids=["ind2", "clay1", "clay2", "ind3"])
def test_marginals_are_uniform(model):
    s = m.sample(model, 10**5, 5)
    assert np.all(m.marginal_ks(s) < 1.63 / math.sqrt(s.n))
    assert s.rows.min() >= 0.0 and s.rows.max() <= 1.0


def test_clayton_kendall_tau():
    model = m.DataModel.clayton(2.0)
    s = m.sample(model, 10**5, 9)
    tau = stats.kendalltau(s.rows[:, 0], s.rows[:, 1]).statistic
    assert abs(tau - m.kendall_tau(model)) < 0.01
    assert m.kendall_tau(model) == 0.5


def test_from_uniform_reproduces_draw():
    rng = np.random.default_rng(4)
    x = m.draw(CLAY1, 100, rng)
    r2 = np.random.default_rng(4)
    v = np.column_stack([r2.random(100), r2.random(100)])
    np.testing.assert_array_equal(m.from_uniform(CLAY1, v), x)


def test_expectation_quadrature():
    assert m.expectation(IND, lambda x: x[:, 0] * x[:, 1]) == pytest.approx(0.25, abs=1e-12)
    # E C(U) for Clayton alpha=1 is the mean of K's complement: int (1 - K) dt
    want = 1.0 - (0.5 + (0.5 - 1 / 3))
    assert m.expectation(CLAY1, lambda x: m.copula_cdf(CLAY1, x)) == pytest.approx(want, abs=1e-6)


# Kendall distribution

def test_kendall_cdf_examples():
    assert m.kendall_cdf(IND, math.exp(-1)) == pytest.approx(2 * math.exp(-1), abs=1e-14)
    assert m.kendall_cdf(CLAY1, 0.5) == pytest.approx(0.75, abs=1e-14)
    for model in (IND, CLAY1, m.DataModel.clayton(0.5)):
        assert m.kendall_cdf(model, 1.0) == pytest.approx(1.0)
        assert m.kendall_cdf(model, 0.0) == 0.0


def test_kendall_cdf_three_dim_independence():
    model = m.DataModel.independence(3)
    x = m.sample(model, 200000, 1).rows
    t = 0.1
    emp = np.mean(np.prod(x, axis=1) <= t)
    assert m.kendall_cdf(model, t) == pytest.approx(emp, abs=4 * math.sqrt(emp * (1 - emp) / 200000))


@pytest.mark.parametrize("model", [IND, CLAY1, m.DataModel.clayton(3.0)], ids=["ind", "c1", "c3"])
def test_kendall_cdf_monotone(model):
    vals = m.kendall_cdf(model, np.linspace(0, 1, 100))
    assert np.all(np.diff(vals) >= -1e-15)
    assert vals[0] == 0.0 and vals[-1] == pytest.approx(1.0)


def test_kendall_density_examples():
    assert m.kendall_density(IND, math.exp(-1)) == pytest.approx(1.0)
    assert m.kendall_density(CLAY1, 0.5) == pytest.approx(1.0)
    assert m.kendall_density(IND, 1 - 1e-12) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(DomainError):
        m.kendall_density(IND, 0.0)


@pytest.mark.parametrize("model", [IND, CLAY1, m.DataModel.clayton(0.5)], ids=["ind", "c1", "c05"])
def test_kendall_density_matches_differences(model):
    t = np.linspace(0.1, 0.9, 9)
    np.testing.assert_allclose(m.kendall_density(model, t), m.kendall_density(model, t, step=m.DENSITY_STEP),
                               rtol=1e-6)


def test_kendall_on_regression_unsupported():
    with pytest.raises(UnsupportedKindError):
        m.kendall_cdf(REG, 0.5)


# conditional expectations

def test_conditional_indicator_trivial_points():
    assert m.conditional_indicator_expectation(CLAY1, (0.0, 0.0), 0.4) == 1.0
    assert m.conditional_indicator_expectation(CLAY1, (1.0, 1.0), 0.4) == 0.0


def test_conditional_indicator_pinned_band_value():
    # on u1 u2 = 0.25 the event x <= X reduces to the single point (0.5, 0.5); the band value is its O(h) bias
    v = m.conditional_indicator_expectation(IND, (0.5, 0.5), 0.25, n_draws=m.ORACLE_BAND_DRAWS)
    assert v == pytest.approx(0.0005752705569338079, rel=1e-12)
    assert m.conditional_indicator_expectation_exact(IND, (0.5, 0.5), 0.25) == 0.0


@pytest.mark.parametrize("model", [IND, CLAY1], ids=["ind", "c1"])
def test_band_agrees_with_level_curve_formula(model):
    x = np.array([[0.2, 0.3], [0.5, 0.6], [0.4, 0.45], [0.1, 0.9]])
    band = m.conditional_indicator_expectation(model, x, 0.3)
    exact = m.conditional_indicator_expectation_exact(model, x, 0.3)
    kept = m.band_draws(model, 0.3).shape[0]
    se = np.sqrt(exact * (1 - exact) / kept)
    assert np.all(np.abs(band - exact) <= 4 * se + 2e-3)


def test_conditional_indicator_monotone_and_bounded():
    rng = np.random.default_rng(2)
    x = rng.random((200, 2))
    y = np.minimum(x + rng.random((200, 2)) * 0.3, 1.0)
    vx = m.conditional_indicator_expectation(CLAY1, x, 0.35)
    vy = m.conditional_indicator_expectation(CLAY1, y, 0.35)
    assert np.all((vx >= 0) & (vx <= 1))
    assert np.all(vy <= vx + 1e-15)


def test_empty_band_raises():
    with pytest.raises(EstimationError, match="empty band"):
        m.conditional_indicator_expectation(IND, (0.5, 0.5), 0.5, n_draws=5, bandwidth=1e-9)


def test_conditional_expectation_returns_se():
    mean, se = m.conditional_expectation(IND, lambda x: x[:, 0] * x[:, 1], 0.4)
    assert mean == pytest.approx(0.4, abs=2e-3)
    assert 0.0 <= se < 1e-3


# regression

def test_regression_truth_examples():
    assert m.regression_truth(m.DataModel.regression([0, 1]), 0.5) == 0.5
    assert m.regression_truth(m.DataModel.regression([1, 2, 3]), 1.0) == 6.0
    assert m.regression_truth(REG, 0.3) == pytest.approx(0.38, abs=1e-15)
    with pytest.raises(UnsupportedKindError):
        m.regression_truth(IND, 0.3)


def test_noise_cdf():
    assert m.noise_cdf(REG, 0.0) == 0.5
    assert m.noise_cdf(m.DataModel.regression([0], 0.0), np.array([-1.0, 0.0])).tolist() == [0.0, 1.0]
