import pytest

import genco_offering as g


def test_clear_fixture_marginal_price():
    prices = [0, 25, 35, 42, 55, 75, 0, 15, 30, 38, 45, 60, 90]
    quantities = [2500, 2000, 1500, 2500, 2000, 1500, 6000, 3000, 4000, 3500, 4000, 3000, 2000]
    r = g.clear(prices, quantities, 24000.0)
    assert r["price"] == 42.0
    assert r["dispatched"] == pytest.approx(24000.0)


def test_clear_rejects_scarcity():
    with pytest.raises(g.ScarcityError, match="exceeds"):
        g.clear([10.0], [5.0], 6.0)


@pytest.mark.parametrize("method", ["dp", "milp"])
def test_discretize_two_groups(method):
    r = g.discretize([10, 11, 50, 52], [1, 1, 1, 1], 2, method)
    assert r["group_end"] == [2, 4]
    assert r["error"] == pytest.approx(3.0)


def test_tail_measures():
    assert g.worst_tail_mean([5, 1, 3, 2], 0.5) == pytest.approx(1.5)
    assert g.cvar([5, 1, 3, 2], [0.25] * 4, 0.5) == pytest.approx(1.5)


def test_optimize_single_hour_rigid_offers_at_cost():
    r = g.optimize(
        intercept=30.0,
        beta_renewable=0.0,
        D=[5.0],
        renewable=[100.0],
        quantity=[[200.0]],
        cost=[[33.0]],
        flex=[[0.0]],
        coefficients=[[[0.2]], [[0.4]]],
        chi=0.5,
    )
    assert r["offers"] == [[33.0]]
    assert r["cvar"] <= r["expected_profit"] + 1e-9
    assert r["status"] == "optimal"


def test_unknown_config_key_is_rejected():
    with pytest.raises(ValueError, match="unknown configuration key"):
        g.run_pipeline({"bogus": 1})


def test_synthesize_and_pipeline(tmp_path):
    first_test_day = g.synthesize(str(tmp_path), seed=3, history_days=365, test_days=2)
    assert len(first_test_day) == 10
    r = g.run_pipeline(
        {
            "curves": tmp_path / "curves.csv",
            "covariates": tmp_path / "covariates.csv",
            "output": tmp_path / "out",
            "blocks": 4,
            "scenarios": 8,
            "test_days": 2,
            "draws": 1200,
            "burn_in": 100,
        }
    )
    assert r["days"] == 2
    assert (tmp_path / "out" / "offers.csv").exists()
    assert r["mean_profit"] > 0
