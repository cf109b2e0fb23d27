import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weightcraft.datagen import DatagenConfig, NoiseSpec, generate_dataset
from weightcraft.errors import DimensionError, ValidationError
from weightcraft.estimation import weights_facebook
from weightcraft.model import WeightVector
from weightcraft.rankeval import (
    SCHEMES,
    SchemeResult,
    estimate_all,
    evaluate_scheme,
    evaluate_weights,
    oracle_result,
    rank,
    run_rank_eval,
    scheme_weights,
    score_urls,
    summarize,
)

ZERO = NoiseSpec(0.0, 0.0, 0.0)
BOOT = dict(n_boot_urls=60, n_boot_samples=20)


@pytest.fixture(scope="module")
def world(small_world):
    _, table, truth = small_world
    return table, truth, estimate_all(table, seed=4, **BOOT)


def test_score_examples():
    beta = {7: np.array([0.1, 0.2, 0, 0, 0, 0]), 8: np.zeros(6)}
    s = score_urls(beta, [0.5, 0.5, 0, 0, 0, 0])
    assert s[7] == pytest.approx(0.15) and s[8] == 0.0
    assert score_urls(beta, np.eye(6)[1])[7] == 0.2
    with pytest.raises(DimensionError):
        score_urls(beta, [1.0, 0.0])


def test_rank_ties_break_by_url_id():
    assert rank({3: 1.0, 1: 1.0, 2: 0.5, 0: 0.2}, 3) == [1, 3, 2]
    assert rank({5: 0.1}, 10) == [5]


@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
@settings(max_examples=40)
def test_ranking_invariant_to_weight_rescaling(seed, c):
    rng = np.random.default_rng(seed)
    beta = {u: rng.random(6) for u in range(30)}
    w = rng.random(6)
    assert rank(score_urls(beta, w), 10) == rank(score_urls(beta, c * w), 10)


def test_result_invariants(world):
    table, truth, reports = world
    res = evaluate_scheme(table, truth, "user_optimal", 0, 1, top_k=25, reports=reports)
    assert len(res.ranked_urls) == 25 and not res.truncated
    scores = score_urls(reports[1].beta_hat, res.weights)
    s = [scores[u] for u in res.ranked_urls]
    assert all(a >= b for a, b in zip(s, s[1:]))
    assert 0.0 <= res.misinfo_rate <= 1.0
    np.testing.assert_array_equal(res.weights, scheme_weights("user_optimal", reports[0]))


def test_evaluation_is_pure(world):
    table, truth, reports = world
    a = evaluate_scheme(table, truth, "vf_only", 1, 2, top_k=30, reports=reports)
    b = evaluate_scheme(table, truth, "vf_only", 1, 2, top_k=30, reports=reports)
    assert a == b


def test_full_list_gives_equal_value_and_truncation_flag(world):
    table, truth, reports = world
    n = len(reports[2].beta_hat)
    results = [evaluate_scheme(table, truth, s, 1, 2, top_k=n + 50, reports=reports) for s in SCHEMES]
    assert all(r.truncated and len(r.ranked_urls) == n for r in results)
    values = [r.total_value for r in results]
    assert max(values) - min(values) <= 1e-9 * abs(values[0])
    assert len({r.misinfo_rate for r in results}) == 1


def test_unknown_scheme(world):
    with pytest.raises(ValidationError):
        scheme_weights("popularity", world[2][0])


def test_facebook_weights_constant_across_months(world):
    table, truth, reports = world
    res = run_rank_eval(table, truth, reports, ["facebook"], top_k=20)
    assert all(np.array_equal(r.weights, weights_facebook()) for r in res)


def test_rows_per_scheme_and_month():
    table, truth = generate_dataset(DatagenConfig(n_urls=120, n_periods=12, seed=3))
    reports = estimate_all(table, seed=3, n_boot_urls=20, n_boot_samples=5)
    res = run_rank_eval(table, truth, reports, top_k=10)
    assert len(res) == 33
    assert [(r.scheme, r.period) for r in res] == [(s, t) for s in SCHEMES for t in range(1, 12)]
    assert res == run_rank_eval(table, truth, reports, top_k=10, threads=3)


def test_only_signal_world_makes_schemes_coincide():
    cfg = DatagenConfig(
        n_urls=300,
        n_periods=2,
        value_alignment=(-1.0, 1.0, -1.0, -1.0, -1.0, -1.0),
        view_sigma=0.0,
        popularity_value_slope=0.0,
        period_view_sigma=0.0,
        idiosyncratic_sd=0.0,
        seed=5,
    )
    table, truth = generate_dataset(cfg, ZERO)
    reports = estimate_all(table, seed=5, **BOOT)
    uo = scheme_weights("user_optimal", reports[0])
    vo = scheme_weights("vf_only", reports[0])
    np.testing.assert_allclose(uo, vo, atol=1e-6)
    np.testing.assert_allclose(uo, np.eye(6)[1], atol=1e-6)


def test_oracle_bounds_schemes_when_value_follows_true_probabilities():
    # Equal, huge, noise-free views make observed value proportional to beta_true @ vf.
    cfg = DatagenConfig(
        n_urls=400,
        n_periods=3,
        n_groups=4,
        view_scale=1e8,
        view_sigma=0.0,
        popularity_value_slope=0.0,
        period_view_sigma=0.0,
        group_concentration=1e6,
        period_drift_sd=0.0,
        seed=9,
    )
    table, truth = generate_dataset(cfg, ZERO)
    reports = estimate_all(table, seed=9, **BOOT)
    for t in (1, 2):
        best = oracle_result(table, truth, reports[t], top_k=40)
        for scheme in SCHEMES:
            res = evaluate_scheme(table, truth, scheme, t - 1, t, top_k=40, reports=reports)
            assert res.total_value <= best.total_value * (1 + 1e-6)


def _result(scheme, period, value):
    return SchemeResult(scheme, period, weights_facebook(), 10, value, value / 100, value, ())


def test_summarize_weightings():
    res = [_result("a", 1, 1.0), _result("a", 2, 3.0), _result("b", 1, 5.0)]
    simple = summarize(res)
    assert simple["a"]["total_value"] == 2.0 and simple["b"]["total_value"] == 5.0
    weighted = summarize(res, "eligible", {1: 3, 2: 1})
    assert weighted["a"]["total_value"] == pytest.approx(1.5)
    with pytest.raises(ValidationError):
        summarize(res, "eligible")
    with pytest.raises(ValidationError):
        summarize(res, "views")


def test_evaluate_weights_accepts_explicit_vector(world):
    table, truth, reports = world
    w = WeightVector(np.eye(6)[1])
    res = evaluate_weights(table, truth, "loves_only", w, reports[2], top_k=5)
    order = sorted(reports[2].beta_hat, key=lambda u: (-reports[2].beta_hat[u][1], u))[:5]
    assert list(res.ranked_urls) == order
