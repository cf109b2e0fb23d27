"""Synthetic stand-in for the noisy aggregate URL engagement dataset.

Each URL has a latent value. Per-view reaction probabilities come from a
softmax over the six mutually exclusive reactions plus "no reaction", with
reaction log-odds ``log(base_rate) + alignment * latent + idiosyncratic``.
"loves" has the largest alignment, so it tracks latent value best and works
as the value anchor. Counts are multinomial given true group views; the
published table adds Gaussian noise with known per-column sigmas to views and
to every count, so observed values can be negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from weightcraft.errors import ValidationError
from weightcraft.parallel import TAG_DATAGEN, parallel_map, stream

BEHAVIORS = ("likes", "loves", "hahas", "wows", "sorrys", "angers")
ANCHOR = "loves"
K = len(BEHAVIORS)

AGES = ("18-24", "25-34", "35-44", "45-54", "55-64", "65+")
GENDERS = ("F", "M")
POLS = (-2, -1, 0, 1, 2)


def group_attributes(group_id: int) -> Tuple[str, str, int]:
    """Demographic cell (age, gender, political leaning) for a group index."""
    g = int(group_id)
    return AGES[g % len(AGES)], GENDERS[(g // len(AGES)) % len(GENDERS)], POLS[(g // (len(AGES) * len(GENDERS))) % len(POLS)]


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian noise sigmas; defaults are the published privacy noise levels."""

    sigma_views: float = 2228.0
    sigma_likes: float = 22.0
    sigma_reaction: float = 10.0

    def __post_init__(self):
        # Zero is allowed so noiseless worlds can be generated for testing.
        if min(self.sigma_views, self.sigma_likes, self.sigma_reaction) < 0:
            raise ValidationError("noise sigmas must be nonnegative")

    def count_sigmas(self) -> np.ndarray:
        return np.array([self.sigma_likes] + [self.sigma_reaction] * (K - 1))


@dataclass(frozen=True)
class DatagenConfig:
    n_urls: int = 2000
    n_groups: int = 12
    n_periods: int = 12
    view_scale: float = 250_000.0  # median total views of a URL in one period
    view_sigma: float = 0.7  # log-sd of URL popularity
    popularity_value_slope: float = 0.6  # log-views per unit latent value
    period_view_sigma: float = 0.3  # log-sd of month-to-month popularity swings
    group_concentration: float = 5.0  # Dirichlet concentration of group view shares
    base_rates: Tuple[float, ...] = (0.03, 0.004, 0.004, 0.002, 0.0015, 0.004)
    value_alignment: Tuple[float, ...] = (-0.1, 1.0, -0.6, 0.2, -0.4, -0.2)
    idiosyncratic_sd: float = 0.5  # per-URL log-odds noise unrelated to value
    group_logit_sd: float = 0.0  # per-(URL, period, group) log-odds noise
    period_drift_sd: float = 0.05  # per-(URL, period) log-odds drift
    misinfo_intercept: float = -2.0
    misinfo_slope: float = 1.5
    quality_noise_sd: float = 0.5
    min_view_fraction: float = 0.4  # eligibility threshold as a fraction of view_scale
    seed: int = 0

    def __post_init__(self):
        for name in ("n_urls", "n_groups", "n_periods"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if len(self.base_rates) != K or len(self.value_alignment) != K:
            raise ValidationError(f"base_rates and value_alignment need {K} entries")
        if any(r <= 0 for r in self.base_rates) or sum(self.base_rates) >= 1:
            raise ValidationError("base_rates must be positive and sum below 1")
        if self.view_scale <= 0 or self.group_concentration <= 0:
            raise ValidationError("view_scale and group_concentration must be positive")
        for name in ("view_sigma", "period_view_sigma", "idiosyncratic_sd", "group_logit_sd", "period_drift_sd", "quality_noise_sd"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")
        if self.min_view_fraction < 0:
            raise ValidationError("min_view_fraction must be nonnegative")

    @property
    def min_views(self) -> float:
        return self.min_view_fraction * self.view_scale


@dataclass
class EngagementTable:
    """Row-aligned arrays sorted by (url_id, period, group_id)."""

    url_id: np.ndarray
    period: np.ndarray
    group_id: np.ndarray
    views: np.ndarray
    counts: np.ndarray  # (rows, 6) in BEHAVIORS order
    noise: Optional[NoiseSpec]
    min_views: float = 0.0
    view_scale: float = float("nan")
    behavior_names: Tuple[str, ...] = BEHAVIORS

    def __post_init__(self):
        n = len(self.url_id)
        if not (len(self.period) == len(self.group_id) == len(self.views) == n):
            raise ValidationError("engagement columns differ in length")
        if self.counts.shape != (n, len(self.behavior_names)):
            raise ValidationError(f"counts must have shape ({n}, {len(self.behavior_names)})")

    @property
    def periods(self) -> np.ndarray:
        return np.unique(self.period)

    def __len__(self) -> int:
        return len(self.url_id)


@dataclass
class GroundTruth:
    url_id: np.ndarray
    beta_true: np.ndarray  # (n_urls, 6), drift-free per-view reaction probabilities
    latent_value: np.ndarray
    misinfo: np.ndarray
    domain_quality: np.ndarray

    def index(self) -> dict:
        return {int(u): i for i, u in enumerate(self.url_id)}


def _softmax_with_null(logits: np.ndarray, null_logit: float) -> np.ndarray:
    top = np.maximum(logits.max(axis=-1, keepdims=True), null_logit)
    e = np.exp(logits - top)
    return e / (e.sum(axis=-1, keepdims=True) + np.exp(null_logit - top))


def _generate_url(config: DatagenConfig, noise: NoiseSpec, u: int):
    rng = stream(config.seed, TAG_DATAGEN, u)
    P, G = config.n_periods, config.n_groups
    align = np.asarray(config.value_alignment)
    base_logit = np.log(np.asarray(config.base_rates))
    null_logit = float(np.log1p(-sum(config.base_rates)))

    latent = rng.standard_normal()
    url_logit = base_logit + align * latent + config.idiosyncratic_sd * rng.standard_normal(K)
    beta_true = _softmax_with_null(url_logit, null_logit)
    misinfo = rng.random() < 1.0 / (1.0 + np.exp(-(config.misinfo_intercept - config.misinfo_slope * latent)))
    quality = latent + config.quality_noise_sd * rng.standard_normal()

    popularity = config.view_scale * np.exp(
        config.view_sigma * rng.standard_normal() + config.popularity_value_slope * latent
    )
    total_views = popularity * np.exp(config.period_view_sigma * rng.standard_normal(P))
    shares = rng.dirichlet(np.full(G, config.group_concentration), size=P)
    group_views = rng.poisson(total_views[:, None] * shares)  # (P, G)

    logits = (
        url_logit
        + config.period_drift_sd * rng.standard_normal((P, 1, K))
        + config.group_logit_sd * rng.standard_normal((P, G, K))
    )
    probs = _softmax_with_null(logits, null_logit)
    pvals = np.concatenate([probs, 1.0 - probs.sum(axis=-1, keepdims=True)], axis=-1)
    pvals = np.clip(pvals, 0.0, None)
    pvals /= pvals.sum(axis=-1, keepdims=True)
    true_counts = rng.multinomial(group_views, pvals)[..., :K]  # (P, G, K)

    obs_views = group_views + noise.sigma_views * rng.standard_normal((P, G))
    obs_counts = true_counts + noise.count_sigmas() * rng.standard_normal((P, G, K))
    return latent, beta_true, misinfo, quality, obs_views, obs_counts


def generate_dataset(config: DatagenConfig = DatagenConfig(), noise: NoiseSpec = NoiseSpec(), threads: Optional[int] = 1):
    """Draw an engagement table and its ground truth; deterministic per ``config.seed``."""
    P, G, U = config.n_periods, config.n_groups, config.n_urls
    results = parallel_map(lambda u: _generate_url(config, noise, u), range(U), threads)

    latent = np.array([r[0] for r in results])
    beta_true = np.stack([r[1] for r in results])
    misinfo = np.array([r[2] for r in results], dtype=bool)
    quality = np.array([r[3] for r in results])
    views = np.stack([r[4] for r in results])  # (U, P, G)
    counts = np.stack([r[5] for r in results])  # (U, P, G, K)

    uu, pp, gg = np.meshgrid(np.arange(U), np.arange(P), np.arange(G), indexing="ij")
    table = EngagementTable(
        url_id=uu.ravel(),
        period=pp.ravel(),
        group_id=gg.ravel(),
        views=views.ravel(),
        counts=counts.reshape(-1, K),
        noise=noise,
        min_views=config.min_views,
        view_scale=config.view_scale,
    )
    truth = GroundTruth(np.arange(U), beta_true, latent, misinfo, quality)
    return table, truth
