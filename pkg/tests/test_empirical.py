import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from pseudoproc import empirical as e
from pseudoproc._dominance import DominanceCounter, dominance_counts
from pseudoproc.errors import EvaluationError, FitError
from pseudoproc.models import Sample
from pseudoproc.seeding import derive_seed, map_ordered, replicate, worker_count

FIX = Sample([(0.1, 0.2), (0.4, 0.9), (0.8, 0.5)])


def brute_kendall(rows):
    n = len(rows)
    return np.array([sum(np.all(rows[j] <= rows[i]) for j in range(n)) / n for i in range(n)])


def brute_copula(rows):
    n, d = rows.shape
    out = np.empty((n, d))
    for i in range(n):
        for j in range(d):
            out[i, j] = sum(rows[k, j] <= rows[i, j] for k in range(n)) / n
    return out


def test_joint_ecdf_examples():
    assert e.joint_ecdf(FIX, (0.5, 0.6)) == pytest.approx(1 / 3)
    assert e.joint_ecdf(FIX, FIX.rows.max(axis=0)) == 1.0
    assert e.joint_ecdf(FIX, FIX.rows.min(axis=0) - 1e-9) == 0.0
    assert e.JointECDF(FIX)((0.5, 0.6)) == pytest.approx(1 / 3)


def test_kendall_pseudo_obs_examples():
    np.testing.assert_allclose(e.kendall_pseudo_obs(FIX).values, [1 / 3, 2 / 3, 2 / 3])
    assert e.kendall_pseudo_obs(Sample([(0.3, 0.4)])).values.tolist() == [1.0]
    u = np.random.default_rng(0).permutation(10) / 10 + 0.05
    vals = e.kendall_pseudo_obs(Sample(np.column_stack([u, u]))).values
    np.testing.assert_allclose(np.sort(vals), np.arange(1, 11) / 10)


def test_copula_pseudo_obs_examples():
    s = Sample(np.column_stack([[0.4, 0.1, 0.9], [0.0, 0.0, 0.0]]))
    np.testing.assert_allclose(e.copula_pseudo_obs(s).values[:, 0], [2 / 3, 1 / 3, 1.0])
    np.testing.assert_allclose(e.copula_pseudo_obs(s).values[:, 1], [1.0, 1.0, 1.0])  # max-rank ties
    assert e.copula_pseudo_obs(Sample([(0.2, 0.7, 0.1)])).values.tolist() == [[1.0, 1.0, 1.0]]


@pytest.mark.parametrize("d", [2, 3])
def test_pseudo_obs_match_brute_force(d):
    rng = np.random.default_rng(d)
    for _ in range(10):
        n = int(rng.integers(1, 120))
        rows = rng.random((n, d))
        if n > 3:
            rows[1] = rows[0]  # exact duplicates exercise the tie policy
        s = Sample(rows)
        np.testing.assert_array_equal(e.kendall_pseudo_obs(s).values, brute_kendall(rows))
        np.testing.assert_array_equal(e.copula_pseudo_obs(s).values, brute_copula(rows))


def test_marginal_ecdf_order_statistics():
    s = Sample(np.random.default_rng(1).random((25, 2)))
    sorted_cols = np.sort(s.rows, axis=0)
    vals = e.MarginalECDF(s)(sorted_cols)
    np.testing.assert_allclose(vals, np.tile(np.arange(1, 26)[:, None] / 25, (1, 2)))


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(float, (12, 2), elements=st.floats(0, 1)), st.floats(0, 1), st.floats(0, 1),
       st.floats(0, 0.5), st.floats(0, 0.5))
def test_joint_ecdf_monotone(rows, x1, x2, b1, b2):
    s = Sample(rows)
    lo = e.joint_ecdf(s, (x1, x2))
    hi = e.joint_ecdf(s, (x1 + b1, x2 + b2))
    assert lo <= hi
    assert lo * 12 == pytest.approx(round(lo * 12))


def test_empirical_process_examples():
    s = Sample(np.arange(4.0)[:, None])
    vals = np.array([1.0, 0.0, 0.0, 1.0])
    assert e.empirical_process(s, lambda x: vals, 0.25) == pytest.approx(0.5)
    assert e.empirical_process(s, lambda x: np.full(4, 3.0), 3.0) == 0.0
    with pytest.raises(EvaluationError):
        e.empirical_process(s, lambda x: np.array([1.0, np.nan, 0, 0]), 0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 1000))
def test_empirical_process_linear(a, b, seed):
    s = Sample(np.random.default_rng(seed).random((30, 2)))
    f = lambda x: x[:, 0] ** 2  # noqa: E731
    g = lambda x: np.sin(x[:, 1])  # noqa: E731
    lhs = e.empirical_process(s, lambda x: a * f(x) + b * g(x), a * 0.3 + b * 0.2)
    rhs = a * e.empirical_process(s, f, 0.3) + b * e.empirical_process(s, g, 0.2)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_polyfit_examples():
    x = np.linspace(0, 1, 7)
    fit = e.ls_polyfit(Sample(np.column_stack([x, 2 * x])), 1)
    np.testing.assert_allclose(fit.coeffs, [0.0, 2.0], atol=1e-10)
    ys = np.array([0.3, 1.1, -0.2, 0.9])
    fit0 = e.ls_polyfit(Sample(np.column_stack([np.arange(4.0), ys])), 0)
    assert fit0.coeffs[0] == pytest.approx(ys.mean())
    fit1 = e.ls_polyfit(Sample([(0, 1), (1, 3), (2, 5)]), 1)
    np.testing.assert_allclose(fit1.coeffs, [1.0, 2.0], atol=1e-12)
    assert fit1(3.0) == pytest.approx(7.0)


def test_polyfit_residuals_orthogonal():
    rng = np.random.default_rng(3)
    x = rng.random(500)
    y = 1 + x - 2 * x**2 + 0.1 * rng.standard_normal(500)
    fit = e.ls_polyfit(Sample(np.column_stack([x, y])), 3)
    for k in range(4):
        assert abs(np.sum(fit.residuals * x**k)) <= 1e-8 * 500


def test_polyfit_rank_deficient():
    with pytest.raises(FitError):
        e.ls_polyfit(Sample([(1.0, 0.0), (1.0, 1.0), (1.0, 2.0)]), 1)


# dominance counting and seeding helpers

@settings(max_examples=40, deadline=None)
@given(hnp.arrays(float, st.tuples(st.integers(1, 40), st.just(2)), elements=st.sampled_from([0.0, 0.25, 0.5, 0.7, 1.0])),
       hnp.arrays(float, (15, 2), elements=st.floats(-0.1, 1.1)))
def test_dominance_tree_matches_broadcast(points, queries):
    w = np.arange(1, len(points) + 1, dtype=float)
    brute = (np.all(points[None, :, :] <= queries[:, None, :], axis=2) * w).sum(axis=1)
    np.testing.assert_allclose(DominanceCounter(points, w)(queries), brute)
    np.testing.assert_allclose(dominance_counts(points, queries, w), brute)


def test_derive_seed_stable_and_distinct():
    assert derive_seed(1, "a", 0) == derive_seed(1, "a", 0)
    assert derive_seed(1, "a", 0) != derive_seed(1, "a", 1)
    assert 0 <= derive_seed(7, "x") < 2**63


def test_replicate_independent_of_threads(monkeypatch):
    fn = lambda rep, rng: float(rng.random())  # noqa: E731
    one = replicate(fn, 8, 5, "lab", threads=1)
    four = replicate(fn, 8, 5, "lab", threads=4)
    assert one == four and len(set(one)) == 8
    monkeypatch.setenv("PSEUDOPROC_THREADS", "3")
    assert worker_count() == 3
    assert map_ordered(lambda v: v * 2, [1, 2, 3]) == [2, 4, 6]


def test_tie_policy_constant():
    assert e.TIE_POLICY == "ecdf-max-rank"
    assert math.isclose(e.kendall_pseudo_obs(FIX).values.min(), 1 / 3)
