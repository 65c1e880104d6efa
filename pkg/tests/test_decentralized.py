import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bioblend.centralized import saa_binary_search, solve_centralized_fixed_penalty
from bioblend.decentralized import (FollowerResponse, PriceVector, check_bilevel_feasibility, compare_centralized,
                                    follower_best_response, follower_lp, heuristic_solve, leader_subproblem,
                                    lower_bound_relaxation, pair_margins, price_grid, relaxation_value,
                                    verify_follower_optimality)
from bioblend.lp import solve_lp
from bioblend.sampling import sample_scenarios

from builders import brute_force_profit, random_instance, random_prices as _prices, single_pair_instance


# --- follower -------------------------------------------------------------

def test_higher_bracket_wins_on_volume():
    inst = single_pair_instance(c=((0, 100, 10), (100, 250, 12)))
    resp = follower_best_response(inst, PriceVector({"b": 15.0}))
    assert list(pair_margins(inst, PriceVector({"b": 15.0}), 0)) == [5.0, 3.0]
    assert resp.bracket[0] == 1 and resp.offered[0] == 250.0 and resp.profit[0] == 750.0


def test_negative_margins_offer_nothing():
    inst = single_pair_instance(c=((0, 100, 10), (100, 250, 12)))
    resp = follower_best_response(inst, PriceVector({"b": 9.0}))
    assert resp.bracket[0] == -1 and resp.offered[0] == 0.0 and resp.profit[0] == 0.0
    assert verify_follower_optimality(inst, PriceVector({"b": 9.0}), resp).ok


def test_zero_margin_still_offers():
    inst = single_pair_instance(c=((0, 100, 10), (100, 250, 12)))
    resp = follower_best_response(inst, PriceVector({"b": 10.0}))
    assert resp.bracket[0] == 0 and resp.offered[0] == 100.0 and resp.profit[0] == 0.0


def test_short_offer_fails_upper_complementarity():
    inst = single_pair_instance(c=((0, 100, 10), (100, 250, 12)))
    prices = PriceVector({"b": 15.0})
    good = follower_best_response(inst, prices)
    bad = FollowerResponse(good.bracket, good.offered - 1.0, good.margin, good.profit)
    rep = verify_follower_optimality(inst, prices, bad)
    assert not rep.ok
    assert rep.first_violation[0] == "dual_5"


def test_negative_price_rejected():
    with pytest.raises(ValueError):
        PriceVector({"b": -1.0})


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 1_000_000))
def test_follower_matches_enumeration_and_lp(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 5)))
    prices = _prices(inst, rng)
    resp = follower_best_response(inst, prices)
    for k, c in enumerate(inst.curves):
        m = pair_margins(inst, prices, k)
        assert resp.profit[k] == brute_force_profit(m, c.lowers, c.uppers)
        lp = solve_lp(follower_lp(inst, prices, k))
        assert lp.objective == pytest.approx(resp.profit[k], rel=1e-8, abs=1e-8)
        xr = resp.x_rows(inst)[k]
        pos = np.flatnonzero(xr > 0)
        assert pos.size <= 1
        if pos.size:
            assert xr[pos[0]] == c.uppers[pos[0]]
    assert verify_follower_optimality(inst, prices, resp).ok


# --- leader ---------------------------------------------------------------

def test_no_offers_pays_shortfall_penalty():
    inst = single_pair_instance(tau=400.0)
    sc = sample_scenarios(inst, 4, 0)
    prices = PriceVector({"b": 1.0})
    offers = follower_best_response(inst, prices)
    assert offers.offered[0] == 0.0
    lead = leader_subproblem(inst, sc, prices, offers, 3.0, 7.0)
    assert np.all(lead.purchases == 0.0)
    assert lead.objective == pytest.approx(7.0 * 4 * 400.0)
    assert lead.thermal_shortfall.sum() == pytest.approx(4 * 400.0)


def test_single_lot_covers_demand():
    inst = single_pair_instance(c=((0, 250, 10),), tau=900.0, heat=(10.0, 10.0), eff=0.9)
    sc = sample_scenarios(inst, 3, 0)
    prices = PriceVector({"b": 12.0})
    lead = leader_subproblem(inst, sc, prices, follower_best_response(inst, prices), 1e3, 1e5)
    assert lead.purchases[0] == pytest.approx(100.0, rel=1e-9)
    assert np.all(lead.thermal_shortfall <= 1e-9)


# --- heuristic ------------------------------------------------------------

def test_one_supplier_one_step():
    inst = single_pair_instance(c=((0, 250, 10),), tau=900.0, heat=(10.0, 10.0), eff=0.9, g=3.0)
    sc = sample_scenarios(inst, 3, 0)
    res = heuristic_solve(inst, sc, 1e3, 1e5, nu=3)
    assert res.prices["b"] == pytest.approx(13.0)
    assert res.purchases[0] == pytest.approx(100.0, rel=1e-9)
    assert len(res.trace) == 1 and res.trace[0].improved


def test_patience_one_stops_at_first_stall():
    inst = random_instance(np.random.default_rng(8), 4, 2, 3)
    sc = sample_scenarios(inst, 10, 0)
    res = heuristic_solve(inst, sc, 50.0, 50.0, nu=1)
    flags = [t.improved for t in res.trace]
    if False in flags:
        assert flags.index(False) == len(flags) - 1


def test_zero_requirement_buys_nothing():
    inst = random_instance(np.random.default_rng(9), 2, 2, 2).replace_refinery(thermal_requirement=0.0)
    sc = sample_scenarios(inst, 5, 0)
    res = heuristic_solve(inst, sc, 10.0, 10.0)
    assert res.status == "ok"
    assert np.all(res.purchases == 0.0) and res.objective == 0.0


def test_bad_patience():
    inst = single_pair_instance()
    with pytest.raises(ValueError):
        heuristic_solve(inst, sample_scenarios(inst, 1, 0), 1.0, 1.0, nu=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 1_000_000))
def test_heuristic_incumbent_feasible_and_above_relaxation(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 3)))
    sc = sample_scenarios(inst, int(rng.integers(1, 6)), seed)
    lam, mu = float(rng.uniform(1, 100)), float(rng.uniform(1, 100))
    res = heuristic_solve(inst, sc, lam, mu, nu=int(rng.integers(1, 6)))
    assert check_bilevel_feasibility(inst, sc, res, lam, mu).ok
    path = res.incumbent_path
    assert all(b <= a for a, b in zip(path, path[1:]))
    lb = lower_bound_relaxation(inst, sc, lam, mu)
    assert lb <= res.objective + 1e-7 * max(1.0, res.objective)


# --- price-grid relaxation -------------------------------------------------

def test_relaxation_two_prices():
    inst = single_pair_instance(c=((0, 250, 10),), tau=900.0, heat=(10.0, 10.0), eff=0.9, g=3.0)
    sc = sample_scenarios(inst, 2, 0)
    grid = price_grid(inst)
    assert list(grid[0]) == [0.0, 13.0]
    vals = [relaxation_value(inst, sc, [p], 5.0, 5.0).objective for p in grid[0]]
    assert lower_bound_relaxation(inst, sc, 5.0, 5.0) == min(vals)


def test_relaxation_single_price_equals_leader():
    inst = single_pair_instance(c=((0, 250, 0.0),), tau=900.0, heat=(10.0, 10.0), eff=0.9)
    sc = sample_scenarios(inst, 2, 0)
    assert list(price_grid(inst)[0]) == [0.0]
    prices = PriceVector({"b": 0.0})
    lead = leader_subproblem(inst, sc, prices, follower_best_response(inst, prices), 5.0, 5.0)
    assert lower_bound_relaxation(inst, sc, 5.0, 5.0) == pytest.approx(lead.objective, rel=1e-12)


# --- ordering against the centralized model ---------------------------------

def test_degenerate_identical_costs_nonnegative_gap():
    # one supplier, one bracket: its door price equals the centralized delivered cost
    inst = single_pair_instance(c=((0, 500, 10),), tau=900.0, heat=(10.0, 10.0), eff=0.9, g=3.0, pr=2.0)
    sc = sample_scenarios(inst, 3, 0)
    central, w = saa_binary_search(inst, sc, 0.0, 0.0)
    dec = heuristic_solve(inst, sc, w.lam, w.mu)
    g = compare_centralized(inst, central, dec)
    assert g.ordering_ok
    assert g.corrected_gap_pct >= 0.0
    assert g.raw_gap_pct == pytest.approx(0.0, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 1_000_000))
def test_centralized_never_far_above_decentralized(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 3, 2, 2)
    sc = sample_scenarios(inst, 5, seed)
    lam, mu = float(rng.uniform(5, 100)), float(rng.uniform(5, 100))
    central = solve_centralized_fixed_penalty(inst, sc, lam, mu)
    dec = heuristic_solve(inst, sc, lam, mu)
    g = compare_centralized(inst, central, dec)
    assert g.ordering_ok
    assert g.corrected_gap_pct >= -1e-7
