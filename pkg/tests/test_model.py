import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bioblend.model import (BlendSolution, DomainError, ModelError, ProblemInstance, RefinerySpec, Supplier, SupplyCurve,
                            flatten, lift, outer_cost, purchase_cost, total_deterministic_cost,
                            unit_transport_cost)

from builders import biomass, curve, single_pair_instance

CURVE = curve((0, 100, 10), (100, 250, 20))


def _transport(dist, g, v):
    inst = ProblemInstance((Supplier("s", dist, None, {"b": CURVE}),), (biomass(g=g, v=v),), RefinerySpec(1.0, 0.0))
    return unit_transport_cost(inst, "s", "b")


def test_transport_examples():
    assert _transport(0.0, 20.53, 0.046) == pytest.approx(20.53, abs=1e-12)
    assert _transport(100.0, 20.53, 0.046) == pytest.approx(25.13, abs=1e-9)
    assert _transport(50.0, 0.0, 0.0) == 0.0


def test_transport_unknown_pair():
    inst = single_pair_instance()
    with pytest.raises(KeyError):
        unit_transport_cost(inst, "nobody", "b")


def test_purchase_cost_examples():
    assert purchase_cost(CURVE, 0) == 0.0
    assert purchase_cost(CURVE, 50) == 500.0
    assert purchase_cost(CURVE, 150) == 3000.0


def test_outer_cost_examples():
    assert outer_cost(CURVE, 150) == 2000.0
    assert outer_cost(CURVE, 0) == 0.0
    assert outer_cost(CURVE, 100) == 1000.0


def test_total_cost_single_pair():
    inst = single_pair_instance(pr=10.0, st=6.08, g=20.53, v=0.046, dist=100.0)
    assert total_deterministic_cost(inst, np.array([50.0])) == pytest.approx(50 * (10 + 25.13 + 16.08), abs=1e-9)
    assert total_deterministic_cost(inst, np.zeros(1)) == 0.0


def test_total_cost_additive():
    s1 = Supplier("s1", 10.0, None, {"b": CURVE})
    s2 = Supplier("s2", 40.0, None, {"b": curve((0, 50, 12), (50, 90, 13))})
    inst = ProblemInstance((s1, s2), (biomass(),), RefinerySpec(1.0, 0.0))
    one = ProblemInstance((s1,), (biomass(),), RefinerySpec(1.0, 0.0))
    two = ProblemInstance((s2,), (biomass(),), RefinerySpec(1.0, 0.0))
    x = np.array([120.0, 60.0])
    assert total_deterministic_cost(inst, x) == pytest.approx(
        total_deterministic_cost(one, x[:1]) + total_deterministic_cost(two, x[1:]), rel=1e-14)


@pytest.mark.parametrize("x", [-1.0, 250.5, float("nan")])
def test_domain_errors(x):
    with pytest.raises(DomainError):
        CURVE.purchase_cost(x)


@pytest.mark.parametrize("rows", [
    [(0, 100, 10), (120, 250, 20)],   # gap between brackets
    [(0, 100, 10), (100, 250, 10)],   # price not increasing
    [(5, 100, 10)],                   # does not start at 0
    [(0, 0, 10)],                     # empty bracket
])
def test_curve_validation(rows):
    with pytest.raises(ModelError):
        curve(*rows)


def test_missing_distance_rejected():
    with pytest.raises(ModelError):
        ProblemInstance((Supplier("s", None, None, {"b": CURVE}),), (biomass(),), RefinerySpec(1.0, 0.0))


# --- properties ---------------------------------------------------------

@st.composite
def curves(draw):
    P = draw(st.integers(1, 5))
    widths = draw(st.lists(st.floats(0.5, 500.0), min_size=P, max_size=P))
    steps = draw(st.lists(st.floats(0.01, 30.0), min_size=P, max_size=P))
    return SupplyCurve.from_breakpoints(np.cumsum(widths).tolist(), (1.0 + np.cumsum(steps)).tolist())


@settings(max_examples=150, deadline=None)
@given(curves(), st.lists(st.floats(0.0, 1.0), min_size=1, max_size=20))
def test_outer_below_purchase_with_exact_gap(c, fracs):
    for f in fracs:
        x = f * c.availability
        p = c.bracket_index(x)
        gap = c.purchase_cost(x) - c.outer_cost(x)
        assert gap >= -1e-9 * max(1.0, c.purchase_cost(x))
        if p == 0:
            assert gap == pytest.approx(0.0, abs=1e-9 * max(1.0, c.purchase_cost(x)))
        else:
            expect = c.prices[p] * c.lowers[p] - c.intercepts[p]
            assert gap == pytest.approx(expect, rel=1e-9, abs=1e-9)
            assert expect >= 0


@settings(max_examples=150, deadline=None)
@given(curves(), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_outer_cost_convex(c, a, b):
    x, y = a * c.availability, b * c.availability
    mid = c.outer_cost(0.5 * (x + y))
    assert mid <= 0.5 * (c.outer_cost(x) + c.outer_cost(y)) + 1e-9 * max(1.0, mid)


@settings(max_examples=100, deadline=None)
@given(curves())
def test_outer_cost_continuous_at_breakpoints(c):
    for p in range(1, len(c)):
        k = c.lowers[p]
        left = c.intercepts[p - 1] + c.prices[p - 1] * (k - c.lowers[p - 1])
        right = c.intercepts[p]
        assert left == pytest.approx(right, rel=1e-12, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(curves(), st.lists(st.floats(0.0, 1.0), min_size=2, max_size=30))
def test_purchase_cost_monotone(c, fracs):
    xs = sorted(f * c.availability for f in fracs)
    costs = [c.purchase_cost(x) for x in xs]
    assert all(b >= a for a, b in zip(costs, costs[1:]))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=2))
def test_lift_flatten_round_trip(fracs):
    s1 = Supplier("s1", 10.0, None, {"b": CURVE})
    s2 = Supplier("s2", 40.0, None, {"b": curve((0, 50, 12), (50, 95, 13))})
    inst = ProblemInstance((s1, s2), (biomass(),), RefinerySpec(1.0, 0.0))
    x = np.array([fracs[0] * 250.0, fracs[1] * 95.0])
    q, p = lift(inst, x)
    sol = BlendSolution(q, p, *(np.zeros(0) for _ in range(4)))
    rows, zs = sol.x_ibp(inst), sol.z_ibp(inst)
    assert np.array_equal(flatten(rows), x)
    for k, c in enumerate(inst.curves):
        assert zs[k].sum() == 1
        # lower_p Z_p <= X_p <= upper_p Z_p
        assert np.all(c.lowers * zs[k] <= rows[k]) and np.all(rows[k] <= c.uppers * zs[k])
