import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudoproc import fclasses as fc
from pseudoproc.errors import DomainError, UnsupportedKindError
from pseudoproc.models import DataModel, kendall_cdf

UNIFORM_CDF = lambda t: np.clip(t, 0.0, 1.0)  # noqa: E731


def uniform_measure(m=50):
    return fc.empirical_measure((np.arange(m) + 0.5) / m)


# members and families

def test_survival_member_values():
    cls = fc.make_survival_family([0.25, 0.75], [0.5, 0.5])
    vals = cls.members[0](np.array([0.5, 0.8, 0.1]))
    # survival orientation theta(x) = mass of [x, inf): nonincreasing in x
    np.testing.assert_allclose(vals, [0.5, 0.0, 1.0])


def test_survival_single_atom_and_empty():
    one = fc.make_survival_family([0.4], [1.0]).members[0]
    r = np.linspace(0, 1, 21)
    np.testing.assert_array_equal(one(r), fc.Indicator((0.4,))(r))
    zero = fc.make_survival_family([], [])
    assert np.all(zero.evaluate(r) == 0)


def test_survival_validation():
    with pytest.raises(DomainError, match="subprobability"):
        fc.make_survival_family([0.2, 0.6], [0.7, 0.5])
    with pytest.raises(DomainError):
        fc.make_survival_family([0.2], [-0.1])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=6), st.integers(0, 10**6))
def test_survival_members_nonincreasing_in_unit_range(atoms, seed):
    w = np.random.default_rng(seed).dirichlet(np.ones(len(atoms))) * 0.9
    cls = fc.make_survival_family(atoms, w)
    vals = cls.members[0](np.linspace(0, 1, 101))
    assert np.all(np.diff(vals) <= 1e-15)
    assert vals.min() >= 0 and vals.max() <= 1 + 1e-12


def test_lipschitz_family_properties():
    cls = fc.make_lipschitz_family(3, 8, dim=2)
    assert cls.members == fc.make_lipschitz_family(3, 8, dim=2).members
    rng = np.random.default_rng(0)
    a, b = rng.uniform(-2, 2, (2000, 2)), rng.uniform(-2, 2, (2000, 2))
    for mem in cls.members:
        assert np.all(np.abs(mem(a) - mem(b)) <= np.linalg.norm(a - b, axis=1) + 1e-9)
        assert np.all(np.abs(mem(a)) <= cls.envelope(a) + 1e-12)
        h = 1e-6
        num = (mem(a + [h, 0]) - mem(a - [h, 0])) / (2 * h)
        np.testing.assert_allclose(mem.grad(a)[:, 0], num, atol=1e-6)


def test_lipschitz_zero_member():
    mem = fc.lipschitz_member([0.0], [[1.0]], [0.3])
    assert np.all(mem(np.linspace(0, 1, 5)) == 0)


def test_class_config_round_trip():
    for cls in (fc.indicator_grid([0.2, 0.5]), fc.make_lipschitz_family(2, 3),
                fc.make_survival_family([0.3, 0.6], [[0.5, 0.2], [0.1, 0.1]]), fc.constant_class([1.0, 2.0])):
        back = fc.class_from_config(cls.to_config())
        r = np.linspace(0, 1, 13)
        np.testing.assert_array_equal(back.evaluate(r), cls.evaluate(r))
    with pytest.raises(UnsupportedKindError):
        fc.class_from_config({"kind": "holder"})


# covering numbers

def test_covering_singleton_and_large_eps():
    q = uniform_measure()
    assert fc.covering_number(fc.indicator_grid([0.5]), 0.01, q) == 1
    cls = fc.make_lipschitz_family(1, 6)
    assert fc.covering_number(cls, 2 * fc.envelope_norm(cls, q), q) == 1
    with pytest.raises(DomainError):
        fc.covering_number(fc.FunctionClass("lipschitz", (), 1, fc.constant_envelope()), 0.1, q)


def test_covering_distinct_restrictions():
    pts = np.array([0.15, 0.35, 0.55, 0.8])
    q = fc.empirical_measure(pts)
    grid = np.linspace(0.05, 0.95, 19)
    cls = fc.indicator_grid(grid)
    distinct = len({tuple(cls.evaluate(pts)[i]) for i in range(len(cls))})
    assert fc.covering_number(cls, 0.1, q) == distinct <= len(pts) + 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**6), st.floats(0.05, 1.0))
def test_chain_cover_is_exact(m, seed, eps):
    rng = np.random.default_rng(seed)
    cls = fc.indicator_grid(np.sort(rng.random(m)))
    q = fc.empirical_measure(rng.random(int(rng.integers(1, 12))))
    exact = fc.exact_covering_number(cls, eps, q)
    assert fc.covering_number(cls, eps, q) == exact
    greedy = fc.covering_number(cls, eps, q, method="greedy")
    assert exact <= greedy <= 2 * exact


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_covering_nonincreasing_in_eps(seed):
    cls = fc.make_lipschitz_family(seed, 8)
    q = fc.empirical_measure(np.random.default_rng(seed).random(30))
    counts = [fc.covering_number(cls, e, q) for e in (0.02, 0.05, 0.1, 0.3, 1.0)]
    assert counts == sorted(counts, reverse=True)


# entropy integrals

def test_entropy_singleton_is_zero():
    qs = [uniform_measure()] + fc.stress_measures(1, 0)
    for d in (0.1, 0.5, 1.0):
        assert fc.uniform_entropy_integral(fc.indicator_grid([0.3]), d, qs) == 0.0


def test_entropy_monotone_and_bounded():
    grid = np.linspace(0.1, 0.9, 17)
    cls = fc.indicator_grid(grid)
    qs = [uniform_measure(), fc.empirical_measure(np.random.default_rng(1).random(40))] + fc.stress_measures(1, 2)
    vals = [fc.uniform_entropy_integral(cls, d, qs) for d in np.linspace(0.05, 1.0, 20)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= math.sqrt(math.log(len(grid) + 1))


def test_entropy_union_subadditive():
    qs = [uniform_measure()] + fc.stress_measures(1, 4)
    a = fc.indicator_grid(np.linspace(0.1, 0.5, 5))
    b = fc.make_lipschitz_family(5, 4)
    joint = fc.uniform_entropy_integral(fc.union(a, b), 1.0, qs)
    separate = fc.uniform_entropy_integral(a, 1.0, qs) + fc.uniform_entropy_integral(b, 1.0, qs)
    # N(union) <= N(a) + N(b) and sqrt(log(x + y)) <= sqrt(log x) + sqrt(log y) + sqrt(log 2)
    assert joint <= separate + math.sqrt(math.log(2)) + 1e-12


def test_entropy_skips_zero_norm_measure():
    base = fc.make_survival_family([0.3], [[0.5]])
    env = fc.EnvelopeFunction(lambda x: 0.5 * (np.atleast_2d(x)[:, 0] <= 0.3), "atom")
    cls = fc.FunctionClass("survival", base.members, 1, env)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        grid, vals, skipped = fc.entropy_profile(cls, [fc.point_mass([0.9]), uniform_measure()])
    assert skipped == ["point-mass"]
    assert any(issubclass(w.category, RuntimeWarning) for w in rec)


# bracketing

def test_bracketing_examples():
    assert fc.bracketing_number_indicators(1.0, UNIFORM_CDF) == 1
    assert fc.bracketing_number_indicators(0.5, UNIFORM_CDF) == 4
    counts = [fc.bracketing_number_indicators(e, DataModel.clayton(1.0)) for e in (0.1, 0.2, 0.3, 0.5, 0.9)]
    assert counts == sorted(counts, reverse=True)


@pytest.mark.parametrize("law", [DataModel.independence(2), DataModel.clayton(2.0)], ids=["ind", "clay"])
def test_brackets_valid(law):
    eps = 0.3
    br = fc.indicator_brackets(eps, law)
    dense = np.linspace(0, 1, 2001)
    for lo, hi in br:
        assert kendall_cdf(law, hi) - kendall_cdf(law, lo) <= eps**2 + 1e-9
        inside = dense[(dense >= lo) & (dense <= hi)]
        for t in inside[:: max(1, len(inside) // 7)]:
            f = (dense <= t).astype(float)
            assert np.all((dense <= lo) <= f) and np.all(f <= (dense <= hi))
    assert br[0][0] == 0.0 and br[-1][1] == 1.0


def test_bracketing_on_grid_and_integral():
    grid = np.linspace(0.1, 0.9, 17)
    law = DataModel.independence(2)
    assert fc.bracketing_number_indicators(0.01, law, grid) == 17
    j = [fc.bracketing_entropy_integral(d, law, grid) for d in (0.25, 0.5, 1.0)]
    assert j[0] <= j[1] <= j[2] < math.inf


# Lindeberg

def test_lindeberg_constant_envelope():
    rep = fc.lindeberg_check(lambda n: fc.constant_envelope(2.0), lambda rng, m: rng.random((m, 1)),
                             [10, 100, 10000], eps=0.1, mc_size=1000, seed=0)
    assert rep.passed
    assert rep.observed == [4.0, 4.0, 0.0]


def test_lindeberg_shrinking_envelope():
    rep = fc.lindeberg_check(lambda n: fc.lipschitz_envelope(1.0, n), lambda rng, m: rng.random((m, 1)),
                             [10, 100, 1000], eps=0.1, mc_size=1000, seed=0)
    assert rep.passed
    np.testing.assert_allclose(rep.details["second_moment"], [0.1, 0.01, 0.001])
    assert rep.observed == [0.0, 0.0, 0.0]


def test_lindeberg_composition_envelope():
    def sampler(rng, m):
        return np.hstack([rng.random((m, 1)), rng.standard_normal((m, 1))])

    rep = fc.lindeberg_check(lambda n: fc.composition_envelope(lambda y: np.ones(y.shape[0]), n), sampler,
                             [100, 400, 1600], eps=0.1, mc_size=20000, seed=3)
    assert rep.passed
    np.testing.assert_allclose(rep.details["second_moment"], 4.0)
    # F_n = 2 reaches eps sqrt(n) only while n <= (2 / eps)^2 = 400
    assert rep.observed == [4.0, 4.0, 0.0]
