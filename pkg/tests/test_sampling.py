import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bioblend.model import TriangularParams, UniformParams
from bioblend.sampling import (ScenarioSet, dump_scenarios, empirical_violation_rates, load_scenarios,
                               sample_scenarios, triangular_inverse_cdf, uniform_from_unit)

from builders import random_instance, single_pair_instance


def test_degenerate_distributions():
    inst = single_pair_instance(ash=(1.0, 1.0, 1.0), heat=(14.51, 14.51))
    sc = sample_scenarios(inst, 200, 3)
    assert np.all(sc.ash == 1.0)
    assert np.all(sc.heat == 14.51)


def test_triangular_mean():
    inst = single_pair_instance(ash=(0.0, 1.0, 2.0))
    sc = sample_scenarios(inst, 100_000, 11)
    assert abs(sc.ash.mean() - 1.0) < 0.01


def test_triangular_inverse_cdf_matches_analytic_quantiles():
    p = TriangularParams(1.0, 2.0, 5.0)
    # F(mode) = (mode - lo) / (hi - lo) = 0.25
    assert triangular_inverse_cdf(0.25, p) == pytest.approx(2.0)
    assert triangular_inverse_cdf(0.0, p) == pytest.approx(1.0)
    assert triangular_inverse_cdf(1.0, p) == pytest.approx(5.0)
    # F(x) = 1 - (hi - x)^2 / ((hi - lo)(hi - mode)) at x = 4: 1 - 1/12
    assert triangular_inverse_cdf(1 - 1 / 12, p) == pytest.approx(4.0)


def test_uniform_from_unit():
    assert uniform_from_unit(0.5, UniformParams(10.0, 20.0)) == 15.0


def test_empty_blend_violation_rates():
    inst = single_pair_instance(tau=5.0)
    sc = sample_scenarios(inst, 20, 0)
    assert empirical_violation_rates(np.zeros(1), sc, 1.0, 5.0, inst.efficiency) == (0.0, 1.0)


def test_boundary_counts_as_satisfied():
    sc = ScenarioSet(np.array([[1.0]]), np.array([[10.0]]), 0, (("s", "b"),))
    # ash exactly at the limit, heat exactly at tau
    assert empirical_violation_rates(np.array([3.0]), sc, 1.0, 30.0, np.array([1.0])) == (0.0, 0.0)


def test_two_scenario_hand_instance():
    # pairs: two, X = (10, 20), alpha = 1, tau = 400, e = 1
    ash = np.array([[0.5, 1.2], [2.0, 1.0]])   # E1: 10*(-.5)+20*.2=-1 ; 10*1+0=10
    heat = np.array([[15.0, 15.0], [12.0, 13.0]])  # E2: 400-450<0 ; 400-380>0
    sc = ScenarioSet(ash, heat, 0, (("a", "b"), ("c", "b")))
    p1, p2 = empirical_violation_rates(np.array([10.0, 20.0]), sc, 1.0, 400.0, np.array([1.0, 1.0]))
    assert (p1, p2) == (0.5, 0.5)


def test_streams_are_independent_and_deterministic():
    inst = random_instance(np.random.default_rng(0))
    a = sample_scenarios(inst, 30, 7)
    b = sample_scenarios(inst, 30, 7)
    c = sample_scenarios(inst, 30, 7, stream="validate")
    d = sample_scenarios(inst, 30, 7, stream="replicate", replication=1)
    assert np.array_equal(a.ash, b.ash) and np.array_equal(a.heat, b.heat)
    assert not np.array_equal(a.ash, c.ash)
    assert not np.array_equal(c.ash, d.ash)


def test_unknown_stream():
    with pytest.raises(KeyError):
        sample_scenarios(single_pair_instance(), 3, 0, stream="nope")


def test_dump_and_load(tmp_path):
    inst = random_instance(np.random.default_rng(2))
    sc = sample_scenarios(inst, 7, 1)
    dump_scenarios(sc, tmp_path / "s.csv")
    back = load_scenarios(tmp_path / "s.csv", sc.pairs)
    assert np.array_equal(back.ash, sc.ash) and np.array_equal(back.heat, sc.heat)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 60))
def test_support_and_rate_lattice(seed, N):
    inst = random_instance(np.random.default_rng(seed % 97))
    sc = sample_scenarios(inst, N, seed)
    for k, (_, j) in enumerate(inst.pairs):
        b = inst.biomass[j]
        assert np.all((sc.ash[:, k] >= b.ash.low) & (sc.ash[:, k] <= b.ash.high))
        assert np.all((sc.heat[:, k] >= b.heat.low) & (sc.heat[:, k] <= b.heat.high))
    x = np.random.default_rng(seed).uniform(0, 1, len(inst.pairs)) * inst.availability
    ref = inst.refinery
    for r in empirical_violation_rates(x, sc, ref.ash_limit, ref.thermal_requirement, inst.efficiency):
        assert r * N == pytest.approx(round(r * N), abs=1e-9)
        assert 0.0 <= r <= 1.0
