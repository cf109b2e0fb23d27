"""Synthetic experiments: aspect sweeps and n-item AUC simulations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from weightcraft.errors import (
    PositiveVFRequiredError,
    SweepAbortError,
    UndefinedAUCError,
    UnsupportedDimensionError,
    ValidationError,
)
from weightcraft.model import (
    BehaviorProfile,
    PNorm,
    ProducerItem,
    WeightVector,
    _weights,
    derive_vf,
    normalize,
    sanitize_vf,
    user_optimal_weights,
    user_utility,
)
from weightcraft.parallel import TAG_BOOT_CI, TAG_MONTE_CARLO, TAG_NITEMS, parallel_map, stream
from weightcraft.strategic import producer_optimal_weights, producer_welfare

AXES = ("value_faithfulness", "variance", "strategy_robustness")


@dataclass(frozen=True)
class BaseParams:
    """Two-producer parameters; defaults are the Figure 2 defaults."""

    value_high: float = 1.0
    value_low: float = 0.0
    bias_high: Tuple[float, ...] = (0.75, 0.75)
    bias_low: Tuple[float, ...] = (0.0, 0.0)
    variance: Tuple[float, ...] = (1.0, 3.0)
    cost: Tuple[float, ...] = (1.0, 1.0)

    def profile(self) -> BehaviorProfile:
        vf = derive_vf(
            ProducerItem(self.value_high, self.bias_high), ProducerItem(self.value_low, self.bias_low)
        )
        return BehaviorProfile(vf, self.variance, self.cost)


def fig1_base() -> BaseParams:
    return BaseParams(bias_high=(0.75, 0.75), variance=(1.0, 1.0))


def default_grid(axis: str, n: int = 50) -> np.ndarray:
    if axis == "value_faithfulness":
        return np.linspace(0.25, 5.0, n)
    if axis == "variance":
        return np.geomspace(1e-2, 1e2, n)
    if axis == "strategy_robustness":
        return np.geomspace(0.1, 10.0, n)
    raise ValidationError(f"unknown sweep axis {axis!r}")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: Sequence[float]
    behavior_index: int = 1
    base: BaseParams = field(default_factory=BaseParams)
    p: PNorm = 1
    seed: int = 0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValidationError(f"axis must be one of {AXES}, got {self.axis!r}")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
            raise ValidationError("sweep grid must be a non-empty strictly increasing sequence")
        k = len(self.base.variance)
        if not 0 <= self.behavior_index < k:
            raise ValidationError(f"behavior_index must be in [0, {k})")
        object.__setattr__(self, "grid", tuple(grid.tolist()))

    def profile_at(self, x: float) -> BehaviorProfile:
        """Base profile with the swept aspect of ``behavior_index`` set to ``x``."""
        base, j = self.base, self.behavior_index
        if self.axis == "value_faithfulness":
            # vf_j = (v(1) + b_j(1)) - (v(-1) + b_j(-1)); solve for b_j(1).
            bias = list(base.bias_high)
            bias[j] = x - (base.value_high - base.value_low) + base.bias_low[j]
            return BaseParams(base.value_high, base.value_low, tuple(bias), base.bias_low, base.variance, base.cost).profile()
        prof = base.profile()
        if self.axis == "variance":
            variance = prof.variance.copy()
            variance[j] = x
            return prof.replace(variance=variance)
        cost = prof.cost.copy()
        cost[j] = x
        return prof.replace(cost=cost)


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    w_user: Tuple[float, ...]
    w_prod: Tuple[float, ...]
    user_utility: float
    producer_welfare: float


def _sweep_point(spec: SweepSpec, x: float) -> SweepRow:
    prof = spec.profile_at(x)
    if not np.all(prof.vf > 0):
        raise SweepAbortError(spec.axis, x)
    w_user = user_optimal_weights(prof.vf, prof.variance, spec.p)
    w_prod = producer_optimal_weights(prof, spec.p, seed=spec.seed)
    return SweepRow(
        axis_value=x,
        w_user=tuple(w_user.tolist()),
        w_prod=tuple(w_prod.tolist()),
        user_utility=user_utility(w_user, prof.vf, prof.variance),
        producer_welfare=producer_welfare(w_prod, prof),
    )


def sweep_optimal_weights(spec: SweepSpec, threads: Optional[int] = 1) -> List[SweepRow]:
    """User- and producer-optimal weights at each grid value of one aspect."""
    for x in spec.grid:
        if not np.all(spec.profile_at(x).vf > 0):
            raise SweepAbortError(spec.axis, x)
    return parallel_map(lambda x: _sweep_point(spec, x), spec.grid, threads)


def user_weight_surface(vf_grid, variance_grid, base: Optional[BaseParams] = None, behavior_index: int = 1, p: PNorm = 1) -> np.ndarray:
    """User-optimal weight on one behavior over a (value-faithfulness, variance) grid.

    Returns an array indexed ``[i_vf, i_variance]``.
    """
    base = base or fig1_base()
    out = np.empty((len(vf_grid), len(variance_grid)))
    for a, vf_j in enumerate(vf_grid):
        vf_spec = SweepSpec("value_faithfulness", [vf_j], behavior_index, base, p)
        prof = vf_spec.profile_at(vf_j)
        for b, var_j in enumerate(variance_grid):
            variance = prof.variance.copy()
            variance[behavior_index] = var_j
            out[a, b] = user_optimal_weights(prof.vf, variance, p)[behavior_index]
    return out


# --- n-item simulations ----------------------------------------------------


@dataclass(frozen=True)
class NItemsConfig:
    """Two behaviors (click, recommend) over ``n_plus`` valued and ``n_minus`` unvalued items."""

    n_plus: int = 100
    n_minus: int = 100
    v_plus: float = 1.0
    mode: str = "homogeneous"
    mu_click: float = 1.0
    mu_rec: float = 1.0
    alpha_click: float = 0.0
    beta_click: float = 2.0
    alpha_rec: float = 0.0
    beta_rec: float = 2.0
    variance: Tuple[float, float] = (2.0, 2.0)
    n_sims: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("homogeneous", "heterogeneous"):
            raise ValidationError(f"mode must be homogeneous or heterogeneous, got {self.mode!r}")
        if self.n_plus < 0 or self.n_minus < 0 or self.n_plus + self.n_minus < 1:
            raise ValidationError("item counts must be nonnegative with at least one item")
        if self.beta_click < self.alpha_click or self.beta_rec < self.alpha_rec:
            raise ValidationError("uniform bounds need beta >= alpha")
        if len(self.variance) != 2 or not all(v > 0 for v in self.variance):
            raise ValidationError("variance must be two positive entries")
        if self.n_sims < 1:
            raise ValidationError("n_sims must be >= 1")
        object.__setattr__(self, "variance", tuple(float(v) for v in self.variance))


def hom_sim_config(**overrides) -> NItemsConfig:
    """Homogeneous defaults: mu_click = mu_rec = 1, Sigma = diag(2, 2)."""
    return NItemsConfig(**{"mode": "homogeneous", "mu_click": 1.0, "mu_rec": 1.0, "variance": (2.0, 2.0), **overrides})


def het_sim_config(mode: str = "heterogeneous", **overrides) -> NItemsConfig:
    """Homogeneous/heterogeneous comparison: Sigma = diag(0.1, 2), means 1 and 3."""
    params = dict(
        mode=mode,
        mu_click=1.0,
        mu_rec=3.0,
        alpha_click=0.0,
        beta_click=2.0,
        alpha_rec=2.0,
        beta_rec=4.0,
        variance=(0.1, 2.0),
    )
    params.update(overrides)
    return NItemsConfig(**params)


@dataclass(frozen=True)
class NItemsDataset:
    predictions: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.predictions.shape[0] != self.labels.shape[0]:
            raise ValidationError("prediction rows and labels differ in length")


def generate_nitems(config: NItemsConfig, sim_index: int = 0) -> NItemsDataset:
    rng = stream(config.seed, TAG_NITEMS, sim_index)
    sd = np.sqrt(np.asarray(config.variance))
    if config.mode == "homogeneous":
        means = np.tile([config.mu_click, config.mu_rec], (config.n_plus, 1))
    else:
        means = np.column_stack(
            [
                rng.uniform(config.alpha_click, config.beta_click, size=config.n_plus),
                rng.uniform(config.alpha_rec, config.beta_rec, size=config.n_plus),
            ]
        )
    valued = means + rng.standard_normal((config.n_plus, 2)) * sd
    unvalued = rng.standard_normal((config.n_minus, 2)) * sd
    preds = np.vstack([valued, unvalued])
    labels = np.concatenate([np.ones(config.n_plus, bool), np.zeros(config.n_minus, bool)])
    return NItemsDataset(preds, labels)


def _class_split(data: NItemsDataset):
    pos = data.predictions[data.labels]
    neg = data.predictions[~data.labels]
    if len(pos) == 0 or len(neg) == 0:
        raise UndefinedAUCError("AUC needs at least one valued and one unvalued item")
    return pos, neg


def auc_from_scores(scores, labels) -> float:
    """Mann-Whitney AUC; tied pairs count one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("AUC needs at least one valued and one unvalued item")
    ranks = stats.rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def empirical_auc(w, data: NItemsDataset) -> float:
    _class_split(data)
    return auc_from_scores(data.predictions @ _weights(w), data.labels)


def _w1_grid(grid_step: float) -> np.ndarray:
    if not 0 < grid_step <= 0.5:
        raise ValidationError("grid_step must be in (0, 0.5]")
    n = int(np.floor(1.0 / grid_step + 1e-9))
    grid = np.arange(n + 1) * grid_step
    if grid[-1] < 1.0 - 1e-12:
        grid = np.append(grid, 1.0)
    return np.minimum(grid, 1.0)


def empirical_optimal_weights_auc(data: NItemsDataset, grid_step: float = 0.01) -> Tuple[WeightVector, float]:
    """Exhaustive scan of ``w = (w1, 1 - w1)`` for the largest empirical AUC."""
    if data.predictions.shape[1] != 2:
        raise UnsupportedDimensionError("the AUC weight scan supports exactly two behaviors")
    _class_split(data)
    best_w1, best_auc = 0.0, -1.0
    for w1 in _w1_grid(grid_step):
        auc = auc_from_scores(data.predictions @ np.array([w1, 1.0 - w1]), data.labels)
        if auc > best_auc:
            best_w1, best_auc = float(w1), auc
    return WeightVector(np.array([best_w1, 1.0 - best_w1])), best_auc


def mean_vf(data: NItemsDataset) -> np.ndarray:
    pos, neg = _class_split(data)
    return pos.mean(axis=0) - neg.mean(axis=0)


@dataclass(frozen=True)
class NItemsRow:
    sim_id: int
    w1_theory: float
    w1_empirical: float
    auc: float


def _one_nitems_sim(config: NItemsConfig, sim_id: int, grid_step: float) -> NItemsRow:
    data = generate_nitems(config, sim_id)
    theory = normalize(sanitize_vf(mean_vf(data)) / np.asarray(config.variance))
    w_emp, auc = empirical_optimal_weights_auc(data, grid_step)
    return NItemsRow(sim_id, float(theory[0]), float(w_emp[0]), auc)


def run_nitems(config: NItemsConfig, grid_step: float = 0.01, threads: Optional[int] = 1) -> List[NItemsRow]:
    """Theory-optimal (mean value-faithfulness plugged in) vs AUC-optimal weights per replication."""
    return parallel_map(lambda i: _one_nitems_sim(config, i, grid_step), range(config.n_sims), threads)


def bootstrap_mean_ci(values, level: float = 0.95, n_resamples: int = 10_000, seed: int = 0) -> Tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``values``."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValidationError("bootstrap interval needs at least two values")
    if not 0 < level < 1:
        raise ValidationError("level must be in (0, 1)")
    if np.ptp(values) == 0:
        return float(values[0]), float(values[0])
    res = stats.bootstrap(
        (values,), np.mean, n_resamples=n_resamples, confidence_level=level, method="percentile",
        rng=stream(seed, TAG_BOOT_CI),
    )
    return float(res.confidence_interval.low), float(res.confidence_interval.high)


def mean_weight_gap(rows: Sequence[NItemsRow]) -> float:
    """Mean |w1_theory - w1_empirical| over replications."""
    if not rows:
        raise ValidationError("no replications")
    return float(np.mean([abs(r.w1_theory - r.w1_empirical) for r in rows]))


def monte_carlo_user_utility(w, profile: BehaviorProfile, draws: int = 1_000_000, seed: int = 0, batch: int = 250_000) -> Tuple[float, float]:
    """Simulated frequency that producer 1 outranks producer -1, with its standard error."""
    if draws < 10_000:
        raise ValidationError("draws must be >= 10^4")
    w = _weights(w)
    rng = stream(seed, TAG_MONTE_CARLO)
    sd = np.sqrt(profile.variance)
    wins = 0
    done = 0
    while done < draws:
        n = min(batch, draws - done)
        eps_high = rng.standard_normal((n, profile.k)) * sd
        eps_low = rng.standard_normal((n, profile.k)) * sd
        wins += int(np.count_nonzero((profile.vf + eps_high - eps_low) @ w > 0))
        done += n
    est = wins / draws
    return est, float(np.sqrt(est * (1.0 - est) / draws))
