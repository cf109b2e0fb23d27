"""Producer manipulation: equilibrium effort, welfare and the producer-optimal weights.

Each producer pays ``c(q) = 0.5 q' A q`` for effort ``q >= 0`` that shifts its
predictions. The unique (symmetric) equilibrium is
``q* = f_eta(w'vf) A^-1 w`` where ``f_eta`` is the N(0, 2 w'Sigma w) density,
so welfare at equilibrium is ``0.5 - 0.5 f_eta(w'vf)^2 w'A^-1 w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from weightcraft.errors import DimensionError, ValidationError
from weightcraft.model import (
    BehaviorProfile,
    NoiseDifference,
    PNorm,
    WeightVector,
    _ord,
    _weights,
    normalize,
    pnorm,
    require_positive_vf,
    user_utility,
)

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class EffortVector:
    effort: np.ndarray

    def __post_init__(self):
        q = np.array(np.atleast_1d(self.effort), dtype=float)
        if not np.all(np.isfinite(q)) or np.any(q < 0):
            raise ValidationError("effort must be finite and nonnegative")
        q.setflags(write=False)
        object.__setattr__(self, "effort", q)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.effort, dtype=dtype)


@dataclass(frozen=True)
class EquilibriumResult:
    effort: EffortVector
    producer_welfare: float
    user_utility: float
    first_order_residual: float


def _check(w, profile: BehaviorProfile) -> np.ndarray:
    w = _weights(w)
    if w.shape != profile.vf.shape:
        raise DimensionError(f"weights have length {w.size}, profile has k={profile.k}")
    require_positive_vf(profile.vf)
    return w


def producer_utility(q_self, q_other, w, profile: BehaviorProfile, producer: int = 1) -> float:
    """Ranking probability minus manipulation cost for producer ``+1`` or ``-1``."""
    w = _weights(w)
    q_self = np.asarray(q_self, dtype=float)
    q_other = np.asarray(q_other, dtype=float)
    noise = NoiseDifference.from_weights(w, profile.variance)
    if producer == 1:
        gap = w @ profile.vf + w @ q_self - w @ q_other
        win = float(noise.cdf(gap))
    elif producer == -1:
        gap = w @ profile.vf + w @ q_other - w @ q_self
        win = 1.0 - float(noise.cdf(gap))
    else:
        raise ValidationError("producer must be 1 or -1")
    return win - 0.5 * float(q_self @ (profile.cost * q_self))


def equilibrium_effort(w, profile: BehaviorProfile) -> EquilibriumResult:
    w = _check(w, profile)
    noise = NoiseDifference.from_weights(w, profile.variance)
    density = float(noise.pdf(w @ profile.vf))
    q = density * w / profile.cost
    welfare = 0.5 - 0.5 * float(q @ (profile.cost * q))
    # Gradient of producer 1's utility at (q, q): f_eta(w'vf) w - A q.
    residual = float(np.max(np.abs(density * w - profile.cost * q)))
    return EquilibriumResult(
        effort=EffortVector(q),
        producer_welfare=welfare,
        user_utility=user_utility(w, profile.vf, profile.variance),
        first_order_residual=residual,
    )


def log_manipulation_objective(W, profile: BehaviorProfile) -> np.ndarray:
    """``log(f_eta(w'vf)^2 * w'A^-1 w)`` for each row of ``W``.

    Working in logs keeps the objective ordered when the density underflows.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    mean = W @ profile.vf
    sigma_sq = 2.0 * (W * W) @ profile.variance
    log_density = -(mean * mean) / (2.0 * sigma_sq) - 0.5 * (LOG_2PI + np.log(sigma_sq))
    return 2.0 * log_density + np.log((W * W) @ (1.0 / profile.cost))


def producer_welfare(w, profile: BehaviorProfile) -> float:
    w = _check(w, profile)
    noise = NoiseDifference.from_weights(w, profile.variance)
    density = float(noise.pdf(w @ profile.vf))
    return 0.5 - 0.5 * density**2 * float(w @ (w / profile.cost))


def _compass_search(
    fun: Callable[[np.ndarray], float],
    x0: np.ndarray,
    project: Callable[[np.ndarray], Optional[np.ndarray]],
    step: float,
    tol: float = 1e-10,
    max_evals: int = 200_000,
):
    """Minimize ``fun`` by projected coordinate (compass) search.

    ``project`` maps a trial point back onto the feasible set, or returns
    None to reject it. The step doubles after a success and halves after a
    full sweep without improvement.
    """
    x = project(np.array(x0, dtype=float))
    fx = fun(x)
    evals = 1
    k = x.size
    while step > tol and evals < max_evals:
        improved = False
        for j in range(k):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[j] += sign * step
                trial = project(trial)
                if trial is None:
                    continue
                ft = fun(trial)
                evals += 1
                if ft < fx:
                    x, fx = trial, ft
                    improved = True
                    break
        step = step * 2.0 if improved else step * 0.5
    return x, fx


def effort_upper_bound(w, profile: BehaviorProfile) -> np.ndarray:
    """Per-behavior effort beyond which cost alone exceeds any ranking gain.

    ``F_eta`` has slope at most ``f_max = 1/sqrt(2 pi sigma^2)``, so a best
    response never exceeds ``f_max * w_j / A_jj`` in coordinate ``j``.
    """
    w = _weights(w)
    noise = NoiseDifference.from_weights(w, profile.variance)
    f_max = 1.0 / math.sqrt(2.0 * math.pi * noise.sigma_sq)
    return f_max * w / profile.cost


def best_response(
    q_other,
    w,
    profile: BehaviorProfile,
    producer: int = 1,
    n_starts: int = 8,
    seed: int = 0,
    tol: float = 1e-11,
) -> EffortVector:
    """Numerical argmax over ``q >= 0`` of producer utility against ``q_other``.

    Derivative-free and independent of the closed-form equilibrium, so it can
    act as an oracle for it.
    """
    w = _weights(w)
    q_other = np.asarray(q_other, dtype=float)
    if w.shape != profile.vf.shape or q_other.shape != profile.vf.shape:
        raise DimensionError("weights, q_other and profile must share length")
    if np.any(q_other < 0):
        raise ValidationError("q_other must be nonnegative")
    noise = NoiseDifference.from_weights(w, profile.variance)
    scale = math.sqrt(2.0 * noise.sigma_sq)
    base = float(w @ profile.vf - w @ q_other) if producer == 1 else float(w @ profile.vf + w @ q_other)
    sign = 1.0 if producer == 1 else -1.0
    wl = w.tolist()
    cost = profile.cost.tolist()

    def neg_utility(q: np.ndarray) -> float:
        ql = q.tolist()
        gap = base + sign * sum(a * b for a, b in zip(wl, ql))
        win = 0.5 * math.erfc(-gap / scale)
        if producer != 1:
            win = 1.0 - win
        return -(win - 0.5 * sum(c * x * x for c, x in zip(cost, ql)))

    def project(q: np.ndarray) -> np.ndarray:
        return np.maximum(q, 0.0)

    bound = effort_upper_bound(w, profile)
    rng = np.random.default_rng([seed, 0x42])
    starts = [np.zeros_like(w), bound.copy()]
    starts += [rng.uniform(0.0, 1.0, size=w.size) * bound for _ in range(max(0, n_starts - 2))]
    step0 = max(float(bound.max()), 1e-12) / 4.0

    best_q, best_val = None, math.inf
    for x0 in starts:
        q, val = _compass_search(neg_utility, x0, project, step0, tol=tol)
        if val < best_val:
            best_q, best_val = q, val
    return EffortVector(best_q)


def _arc_points(t: np.ndarray, p: PNorm) -> np.ndarray:
    """Map ``t`` in [0, 1] to the nonnegative unit p-sphere arc in 2-D."""
    raw = np.column_stack([t, 1.0 - t])
    if _ord(p) == 1.0:
        return raw
    norms = np.linalg.norm(raw, ord=_ord(p), axis=1)
    return raw / norms[:, None]


def _solve_two_behaviors(profile: BehaviorProfile, p: PNorm, grid_step: float) -> np.ndarray:
    n = int(round(1.0 / grid_step))
    t = np.linspace(0.0, 1.0, n + 1)
    obj = log_manipulation_objective(_arc_points(t, p), profile)
    i = int(np.argmin(obj))  # first minimum = smallest w_1
    best_t, best_val = t[i], obj[i]

    def scalar(s: float) -> float:
        return float(log_manipulation_objective(_arc_points(np.array([s]), p), profile)[0])

    lo, hi = max(0.0, best_t - grid_step), min(1.0, best_t + grid_step)
    res = optimize.minimize_scalar(scalar, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    if res.fun < best_val:
        best_t = float(res.x)
    return _arc_points(np.array([best_t]), p)[0]


def _solve_multistart(profile: BehaviorProfile, p: PNorm, n_starts: int, seed: int) -> np.ndarray:
    k = profile.k

    def project(z: np.ndarray) -> Optional[np.ndarray]:
        z = np.maximum(z, 0.0)
        norm = pnorm(z, p)
        if norm == 0:
            return None
        return z / norm

    def fun(z: np.ndarray) -> float:
        return float(log_manipulation_objective(z, profile)[0])

    starts = [np.ones(k)] + [np.eye(k)[j] for j in range(k)]
    for s in range(len(starts), n_starts):
        starts.append(np.random.default_rng([seed, s]).dirichlet(np.ones(k)))

    results = []
    for x0 in starts:
        z, val = _compass_search(fun, x0, project, step=0.25, tol=1e-10)
        results.append((val, tuple(z)))
    results.sort()
    best_val = results[0][0]
    tied = [z for val, z in results if val <= best_val]
    return np.array(min(tied))


def producer_optimal_weights(
    profile: BehaviorProfile,
    p: PNorm = 1,
    *,
    grid_step: float = 1e-4,
    n_starts: int = 32,
    seed: int = 0,
) -> WeightVector:
    """Weights maximizing producer welfare at equilibrium.

    The objective ``f_eta(w'vf)^2 w'A^-1 w`` is non-convex. For two behaviors
    the unit-norm arc is scanned on a grid and the best cell refined with a
    bounded Brent search; for more behaviors a seeded multi-start projected
    compass search is used and the best start kept (ties go to the
    lexicographically smallest vector).
    """
    require_positive_vf(profile.vf)
    if profile.k == 1:
        return normalize([1.0], p)
    if profile.k == 2:
        w = _solve_two_behaviors(profile, p, grid_step)
    else:
        w = _solve_multistart(profile, p, max(32, n_starts), seed)
    return normalize(np.maximum(w, 0.0), p)


def optimal_producer_welfare(profile: BehaviorProfile, p: PNorm = 1, **kwargs) -> float:
    return producer_welfare(producer_optimal_weights(profile, p, **kwargs), profile)
