import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    central_gradient,
    monte_carlo_welfare,
    normal_pdf_mp,
    producer_objective_scan,
    producer_utility_stdlib,
)
from weightcraft.errors import PositiveVFRequiredError, ValidationError
from weightcraft.model import BehaviorProfile, normalize, user_optimal_weights, user_utility
from weightcraft.sim import BaseParams
from weightcraft.strategic import (
    EffortVector,
    best_response,
    equilibrium_effort,
    log_manipulation_objective,
    optimal_producer_welfare,
    producer_optimal_weights,
    producer_utility,
    producer_welfare,
)


def random_profile(rng, k=2):
    return BehaviorProfile(rng.uniform(0.2, 3, k), rng.uniform(0.2, 3, k), rng.uniform(0.3, 3, k))


def random_weights(rng, k=2):
    return normalize(rng.uniform(0.05, 1, k))


FIG2 = BaseParams().profile()


# --- equilibrium -------------------------------------------------------------


def test_effort_vector_rejects_negative():
    with pytest.raises(ValidationError):
        EffortVector([-1.0, 0.0])


@pytest.mark.parametrize("lam", [1e2, 1e4, 1e8])
def test_expensive_manipulation_kills_effort(lam):
    prof = BehaviorProfile([1.0, 2.0], [1.0, 1.0], [lam, lam])
    eq = equilibrium_effort(normalize([1.0, 1.0]), prof)
    assert np.max(eq.effort.effort) <= 1.0 / lam
    assert eq.producer_welfare >= 0.5 - 1.0 / lam


def test_single_behavior_specialization():
    mu, sigma_sq = 1.3, 0.8
    prof = BehaviorProfile([mu, 1.0], [sigma_sq / 2, 1.0], [1.0, 1.0])
    eq = equilibrium_effort(normalize([1.0, 0.0]), prof)
    assert eq.effort.effort[0] == pytest.approx(normal_pdf_mp(mu, sigma_sq), rel=1e-12)
    assert eq.effort.effort[1] == 0.0


@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_first_order_conditions_hold(seed, k):
    rng = np.random.default_rng(seed)
    prof = random_profile(rng, k)
    w = random_weights(rng, k)
    eq = equilibrium_effort(w, prof)
    q = eq.effort.effort
    grad = central_gradient(
        lambda x: producer_utility_stdlib(x, q, w.weights, prof.vf, prof.variance, prof.cost), q, 1e-6
    )
    assert np.max(np.abs(grad)) < 1e-6 * max(1.0, np.linalg.norm(q))
    assert eq.first_order_residual <= 1e-8 * max(1.0, np.linalg.norm(q))
    cost = 0.5 * float(q @ (prof.cost * q))
    assert eq.producer_welfare == pytest.approx(0.5 - cost, abs=1e-15)


@given(st.integers(0, 2**32 - 1))
def test_user_utility_unchanged_by_symmetric_equilibrium(seed):
    rng = np.random.default_rng(seed)
    prof = random_profile(rng, 3)
    w = random_weights(rng, 3)
    assert equilibrium_effort(w, prof).user_utility == user_utility(w, prof.vf, prof.variance)


def test_equilibrium_requires_positive_vf():
    with pytest.raises(PositiveVFRequiredError):
        equilibrium_effort(normalize([1, 1]), BehaviorProfile([1.0, -0.5], [1.0, 1.0]))


def test_producer_utility_matches_stdlib():
    prof = FIG2
    w = normalize([0.4, 0.6])
    q1, q2 = np.array([0.1, 0.2]), np.array([0.05, 0.3])
    ref = producer_utility_stdlib(q1, q2, w.weights, prof.vf, prof.variance, prof.cost)
    assert producer_utility(q1, q2, w, prof, 1) == pytest.approx(ref, abs=1e-14)
    # Producer -1 mirrors producer 1 with the roles of the efforts swapped.
    win_1 = producer_utility_stdlib(q1, q2, w.weights, prof.vf, prof.variance, prof.cost) + 0.5 * float(q1 @ (prof.cost * q1))
    mirrored = 1.0 - win_1 - 0.5 * float(q2 @ (prof.cost * q2))
    assert producer_utility(q2, q1, w, prof, -1) == pytest.approx(mirrored, abs=1e-14)


# --- best response -----------------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
def test_best_response_recovers_equilibrium(seed):
    rng = np.random.default_rng(seed)
    prof = random_profile(rng)
    w = random_weights(rng)
    q_star = equilibrium_effort(w, prof).effort.effort
    q = best_response(q_star, w, prof, seed=seed).effort
    np.testing.assert_allclose(q, q_star, atol=1e-4)


def test_best_response_beats_random_probes():
    rng = np.random.default_rng(3)
    prof = random_profile(rng)
    w = random_weights(rng)
    q_other = np.array([0.05, 0.1])
    q = best_response(q_other, w, prof).effort
    best = producer_utility(q, q_other, w, prof)
    probes = rng.uniform(0, 0.5, size=(1000, 2))
    assert all(best >= producer_utility(p, q_other, w, prof) - 1e-8 for p in probes)


def test_best_response_ignores_unweighted_behavior():
    q = best_response(np.zeros(2), normalize([1.0, 0.0]), FIG2).effort
    assert q[1] == 0.0


def test_best_response_shrinks_with_cost():
    w = normalize([0.5, 0.5])
    q1 = best_response(np.zeros(2), w, FIG2, seed=1).effort
    q10 = best_response(np.zeros(2), w, FIG2.replace(cost=FIG2.cost * 10), seed=1).effort
    assert np.all(q10 <= q1 + 1e-6)


# --- producer welfare --------------------------------------------------------


def test_welfare_limits():
    w = normalize([0.5, 0.5])
    assert producer_welfare(w, BehaviorProfile([1e4, 1e4], [1.0, 1.0])) == pytest.approx(0.5, abs=1e-12)
    small = BehaviorProfile([1.0, 1.0], [1e-8, 1e-8])
    assert producer_welfare(w, small) == pytest.approx(0.5, abs=1e-12)


def test_welfare_can_be_negative():
    prof = BehaviorProfile([1e-3], [1e-4], [1e-3])
    assert producer_welfare(normalize([1.0]), prof) < 0


@pytest.mark.parametrize("seed", range(3))
def test_welfare_matches_monte_carlo(seed):
    rng = np.random.default_rng(100 + seed)
    prof = random_profile(rng)
    w = random_weights(rng)
    mc, se = monte_carlo_welfare(w.weights, prof.vf, prof.variance, prof.cost, draws=1_000_000, seed=seed)
    assert abs(producer_welfare(w, prof) - mc) <= 3 * se


# --- producer-optimal weights ------------------------------------------------


def test_symmetric_profile_gives_equal_weights():
    prof = BehaviorProfile([2.0, 2.0], [1.0, 1.0], [1.0, 1.0])
    w = producer_optimal_weights(prof)
    half = log_manipulation_objective([0.5, 0.5], prof)[0]
    assert log_manipulation_objective(w.weights, prof)[0] == pytest.approx(half, abs=1e-9)
    np.testing.assert_allclose(w.weights, [0.5, 0.5], atol=1e-6)


def test_figure_two_defaults_match_fine_scan():
    w = producer_optimal_weights(FIG2)
    w1_ref, obj_ref = producer_objective_scan(FIG2.vf, FIG2.variance, FIG2.cost, step=1e-5)
    assert abs(w[0] - w1_ref) <= 1e-3
    assert log_manipulation_objective(w.weights, FIG2)[0] <= obj_ref + 1e-12


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_two_behavior_solver_not_beaten_by_scan(seed):
    rng = np.random.default_rng(seed)
    prof = random_profile(rng)
    w = producer_optimal_weights(prof)
    _, obj_ref = producer_objective_scan(prof.vf, prof.variance, prof.cost, step=1e-4)
    assert log_manipulation_objective(w.weights, prof)[0] <= obj_ref + 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_multistart_solver_beats_probes(seed):
    rng = np.random.default_rng(seed)
    prof = random_profile(rng, 3)
    w = producer_optimal_weights(prof, seed=seed)
    probes = rng.dirichlet(np.ones(3), size=5000)
    assert log_manipulation_objective(w.weights, prof)[0] <= log_manipulation_objective(probes, prof).min() + 1e-9


def test_multistart_is_deterministic():
    prof = BehaviorProfile([1.0, 2.0, 1.5], [1.0, 2.0, 0.5], [1.0, 3.0, 2.0])
    np.testing.assert_array_equal(producer_optimal_weights(prof, seed=4).weights, producer_optimal_weights(prof, seed=4).weights)


def test_costly_behavior_takes_all_weight():
    w = producer_optimal_weights(FIG2.replace(cost=[1.0, 1e6]))
    assert w[1] > 0.99


def test_producer_optimal_under_other_norms():
    for p in (2, "inf"):
        w = producer_optimal_weights(FIG2, p)
        assert w.p == p


@pytest.mark.parametrize("j", [0, 1])
def test_optimal_welfare_monotone_in_cost_and_vf(j):
    grid = np.geomspace(0.2, 20, 12)
    by_cost = [optimal_producer_welfare(FIG2.replace(cost=np.where(np.arange(2) == j, a, FIG2.cost))) for a in grid]
    by_vf = [optimal_producer_welfare(FIG2.replace(vf=np.where(np.arange(2) == j, a, FIG2.vf))) for a in grid]
    assert np.all(np.diff(by_cost) >= -1e-12)
    assert np.all(np.diff(by_vf) >= -1e-12)


def test_optimal_welfare_not_monotone_in_variance():
    grid = np.geomspace(1e-2, 1e2, 50)
    wel = [optimal_producer_welfare(FIG2.replace(variance=[1.0, s])) for s in grid]
    signs = np.sign(np.diff(wel))
    signs = signs[signs != 0]
    assert np.any(signs[1:] != signs[:-1])


@pytest.mark.parametrize("field", ["cost", "vf", "variance"])
def test_optimal_welfare_limits(field):
    prof = FIG2.replace(**{field: np.where(np.arange(2) == 1, 1e6, getattr(FIG2, field))})
    assert optimal_producer_welfare(prof) >= 0.5 - 1e-3
