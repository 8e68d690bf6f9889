"""Monte-Carlo portfolio simulation: statistical oracles and exports."""

import csv
import json

import numpy as np
import pytest

from tsinvest.errors import InfeasibleSizeError, ValidationError
from tsinvest.portfolio import (SimConfig, SimResult, export_sim_csv,
                                export_sim_json, simulate)


def setup_pool(n_pos=200, n_neg=100, seed=0):
    labels = np.concatenate([np.ones(n_pos), np.zeros(n_neg)]).astype(int)
    return labels


def test_oracle_model_always_succeeds():
    labels = setup_pool()
    scores = labels.astype(float)
    result = simulate({"oracle": scores},
                      labels, SimConfig(portfolio_sizes=[10, 25, 50, 100],
                                        n_repeats=100, seed=0))
    for size in (10, 25, 50, 100):
        assert result.mean("oracle", size) == 1.0
        assert result.std("oracle", size) == 0.0


def test_fixed_fraction_model_tracks_p():
    """A model endorsing a fixed fraction p of the positive pool lands
    within 3 sigma of p, and exactly p at the full-pool size."""
    n_pos = 200
    labels = setup_pool(n_pos=n_pos, n_neg=50)
    p = 0.3
    scores = np.zeros(len(labels))
    pos_idx = np.flatnonzero(labels == 1)
    scores[pos_idx[:int(p * n_pos)]] = 1.0  # endorse exactly 30% of the pool
    config = SimConfig(portfolio_sizes=[10, 50, n_pos], n_repeats=100, seed=1)
    result = simulate({"fixed": scores}, labels, config)
    for size in (10, 50):
        sigma = np.sqrt(p * (1 - p) / size) / np.sqrt(config.n_repeats)
        # hypergeometric variance is below binomial; 3x binomial is safe
        assert abs(result.mean("fixed", size) - p) < 3 * np.sqrt(p * (1 - p) / size)
    assert result.mean("fixed", n_pos) == p
    assert result.std("fixed", n_pos) == 0.0


def test_paired_draws_shared_across_models():
    """Every model sees the same company draws, so an identical pair of
    models produces identical per-repeat rates."""
    labels = setup_pool(50, 20)
    rng = np.random.default_rng(2)
    scores = rng.uniform(size=len(labels))
    result = simulate({"a": scores, "b": scores.copy()}, labels,
                      SimConfig(portfolio_sizes=[10], n_repeats=50, seed=3))
    np.testing.assert_array_equal(result.raw[("a", 10)], result.raw[("b", 10)])


def test_paired_difference_variance_not_worse():
    """Variance of the paired mean difference is no larger than for
    independent (unpaired) draws of the same two models."""
    labels = setup_pool(100, 0)
    rng = np.random.default_rng(4)
    s_a = rng.uniform(size=100)
    s_b = np.clip(s_a + rng.normal(scale=0.05, size=100), 0, 1)
    config = SimConfig(portfolio_sizes=[20], n_repeats=200, seed=5)
    paired = simulate({"a": s_a, "b": s_b}, labels, config)
    diff_paired = np.asarray(paired.raw[("a", 20)]) - np.asarray(paired.raw[("b", 20)])
    only_a = simulate({"a": s_a}, labels, SimConfig(portfolio_sizes=[20], n_repeats=200, seed=6))
    only_b = simulate({"b": s_b}, labels, SimConfig(portfolio_sizes=[20], n_repeats=200, seed=7))
    diff_unpaired = np.asarray(only_a.raw[("a", 20)]) - np.asarray(only_b.raw[("b", 20)])
    assert diff_paired.var() <= diff_unpaired.var()


def test_simulate_deterministic():
    labels = setup_pool(40, 10)
    scores = np.random.default_rng(8).uniform(size=len(labels))
    config = SimConfig(portfolio_sizes=[5, 10], n_repeats=20, seed=9)
    a = simulate({"m": scores}, labels, config)
    b = simulate({"m": scores}, labels, config)
    for key in a.raw:
        np.testing.assert_array_equal(a.raw[key], b.raw[key])


def test_infeasible_size_raises():
    labels = setup_pool(5, 5)
    with pytest.raises(InfeasibleSizeError):
        simulate({"m": labels.astype(float)}, labels,
                 SimConfig(portfolio_sizes=[6], n_repeats=10, seed=0))


def test_config_validation():
    with pytest.raises(ValidationError):
        SimConfig(portfolio_sizes=[0]).validate()
    with pytest.raises(ValidationError):
        SimConfig(n_repeats=0).validate()


def test_csv_and_json_export(tmp_path):
    labels = setup_pool(30, 10)
    scores = labels.astype(float)
    config = SimConfig(portfolio_sizes=[5, 10], n_repeats=10, seed=0,
                       reference_benchmarks=[{"label": "published fund rate",
                                              "value": 0.863}])
    result = simulate({"m": scores}, labels, config)
    csv_path = tmp_path / "sim.csv"
    export_sim_csv(result, csv_path)
    rows = list(csv.DictReader(csv_path.open()))
    assert [r["model"] for r in rows] == ["m", "m"]
    assert [int(r["portfolio_size"]) for r in rows] == [5, 10]
    assert float(rows[0]["mean"]) == 1.0
    json_path = tmp_path / "sim.json"
    export_sim_json(result, json_path)
    obj = json.loads(json_path.read_text())
    assert obj["reference_benchmarks"][0]["value"] == 0.863
    first = obj["results"][0]
    assert first["model"] == "m" and first["portfolio_size"] == 5
    assert len(first["rates"]) == 10
