"""Engagement-probability, value-faithfulness and variance estimators.

Engagement probabilities are through-origin Deming slopes fitted over a URL's
demographic-group rows: ``y_g = beta * xbar_g`` with ``x_g = xbar_g + e_x`` and
``y_g = ybar_g + e_y`` under known Gaussian noise. Profiling the latent
``xbar_g`` out of the likelihood leaves the one-dimensional loss

    L(beta) = sum_g (y_g - beta x_g)^2 / (sigma_y^2 + beta^2 sigma_x^2),

whose stationary points solve a quadratic. The constrained estimate is the
best of those roots inside [0, 1] and the two endpoints.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from weightcraft.datagen import ANCHOR, BEHAVIORS, K, EngagementTable
from weightcraft.errors import DimensionError, ModelError, NormalizationError, ValidationError
from weightcraft.model import WeightVector, normalize, sanitize_vf
from weightcraft.parallel import TAG_BOOTSTRAP, stream

log = logging.getLogger(__name__)


class DegenerateColumnWarning(UserWarning):
    pass


# --- Deming regression -------------------------------------------------------


def profile_loss(beta, sxx, syy, sxy, var_x, var_y):
    """Profile loss written with sufficient statistics; broadcasts over inputs."""
    beta = np.asarray(beta, dtype=float)
    num = syy - 2.0 * beta * sxy + beta * beta * sxx
    den = var_y + beta * beta * var_x
    with np.errstate(divide="ignore", invalid="ignore"):
        loss = num / den
    loss = np.where(num <= 0, 0.0, loss)
    return np.where(np.isnan(loss), np.inf, loss)


def deming_from_sums(sxx, syy, sxy, var_x, var_y) -> np.ndarray:
    """Vectorized constrained through-origin Deming slope.

    Setting dL/dbeta = 0 gives ``sxy var_x b^2 + (sxx var_y - syy var_x) b - sxy var_y = 0``.
    With both variances zero the ordinary least-squares limit (var_x -> 0) is used.
    """
    sxx, syy, sxy, var_x, var_y = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (sxx, syy, sxy, var_x, var_y))
    )
    both_zero = (var_x == 0) & (var_y == 0)
    var_y = np.where(both_zero, 1.0, var_y)

    a = sxy * var_x
    b = sxx * var_y - syy * var_x
    c = -sxy * var_y
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
        q = -0.5 * (b + np.where(b >= 0, disc, -disc))
        quad_1 = q / a
        quad_2 = c / q
        linear = -c / b
    is_quad = a != 0
    r1 = np.where(is_quad, quad_1, linear)
    r2 = np.where(is_quad, quad_2, np.nan)
    lo, hi = np.fmin(r1, r2), np.fmax(r1, r2)

    # Candidates in increasing order so argmin breaks ties toward smaller beta.
    cands = np.stack([np.zeros_like(sxx), lo, hi, np.ones_like(sxx)], axis=-1)
    valid = np.isfinite(cands) & (cands >= 0.0) & (cands <= 1.0)
    cands = np.where(valid, cands, 0.0)
    loss = profile_loss(cands, *(v[..., None] for v in (sxx, syy, sxy, var_x, var_y)))
    loss = np.where(valid, loss, np.inf)
    pick = np.argmin(loss, axis=-1)
    return np.take_along_axis(cands, pick[..., None], axis=-1)[..., 0]


def deming_fit(x, y, sigma_x: float, sigma_y: float) -> float:
    """Slope in [0, 1] of ``y = beta x`` with Gaussian noise on both variables."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionError(f"x and y lengths differ: {x.size} vs {y.size}")
    if x.size == 0:
        raise ValidationError("deming_fit needs at least one observation")
    if sigma_x < 0 or sigma_y < 0:
        raise ValidationError("noise sigmas must be nonnegative")
    return float(deming_from_sums(x @ x, y @ y, x @ y, sigma_x**2, sigma_y**2))


# --- per-period fits ---------------------------------------------------------


def _require_noise(table: EngagementTable):
    if table.noise is None:
        raise ValidationError("noise metadata (sigma_views, sigma_likes, sigma_reaction) is required")
    return table.noise


def _blocks(table: EngagementTable, period: int):
    """Row indices of a period grouped into contiguous per-URL blocks."""
    rows = np.flatnonzero(table.period == period)
    if rows.size == 0:
        raise ValidationError(f"period {period} not present in table")
    urls = table.url_id[rows]
    order = np.argsort(urls, kind="stable")
    rows, urls = rows[order], urls[order]
    starts = np.flatnonzero(np.r_[True, urls[1:] != urls[:-1]])
    return rows, urls[starts], starts


@dataclass
class PeriodData:
    """Per-URL sufficient statistics of one period, restricted to eligible URLs."""

    url_ids: np.ndarray
    views: np.ndarray  # total observed views per URL
    totals: np.ndarray  # (n, 6) total observed counts per URL
    sxx: np.ndarray
    syy: np.ndarray  # (n, 6)
    sxy: np.ndarray  # (n, 6)
    group_rows: list  # per URL: row indices into the table


def period_data(table: EngagementTable, period: int, min_views: Optional[float] = None) -> PeriodData:
    rows, url_ids, starts = _blocks(table, period)
    x = table.views[rows]
    y = table.counts[rows]
    views = np.add.reduceat(x, starts)
    totals = np.add.reduceat(y, starts, axis=0)
    sxx = np.add.reduceat(x * x, starts)
    syy = np.add.reduceat(y * y, starts, axis=0)
    sxy = np.add.reduceat(x[:, None] * y, starts, axis=0)
    threshold = table.min_views if min_views is None else min_views
    keep = views >= threshold
    bounds = np.r_[starts, rows.size]
    group_rows = [rows[bounds[i] : bounds[i + 1]] for i in np.flatnonzero(keep)]
    return PeriodData(url_ids[keep], views[keep], totals[keep], sxx[keep], syy[keep], sxy[keep], group_rows)


def _fit_period(table: EngagementTable, data: PeriodData) -> np.ndarray:
    noise = _require_noise(table)
    return deming_from_sums(
        data.sxx[:, None], data.syy, data.sxy, noise.sigma_views**2, noise.count_sigmas() ** 2
    )


def estimate_engagement_probs(table: EngagementTable, period: int, min_views: Optional[float] = None) -> Dict[int, np.ndarray]:
    """Deming estimate of each eligible URL's per-view probability for every behavior."""
    _require_noise(table)
    data = period_data(table, period, min_views)
    beta = _fit_period(table, data)
    return {int(u): beta[i] for i, u in enumerate(data.url_ids)}


def bootstrap_variance(
    table: EngagementTable,
    period: int,
    n_urls: int = 1000,
    n_samples: int = 100,
    seed: int = 0,
    min_views: Optional[float] = None,
) -> np.ndarray:
    """Mean over sampled URLs of the bootstrap variance of each Deming slope.

    URLs are drawn uniformly without replacement; each URL's group rows are
    resampled with replacement ``n_samples`` times from its own stream keyed
    by (seed, period, url_id).
    """
    noise = _require_noise(table)
    if n_samples < 2:
        raise ValidationError("n_samples must be >= 2")
    data = period_data(table, period, min_views)
    available = data.url_ids.size
    if available == 0:
        raise ModelError(f"period {period} has no eligible URLs")
    if not 1 <= n_urls <= available:
        raise ValidationError(f"n_urls={n_urls} must be in [1, {available}] for period {period}")
    pick = np.sort(stream(seed, TAG_BOOTSTRAP, period).choice(available, size=n_urls, replace=False))

    var_x = noise.sigma_views**2
    var_y = noise.count_sigmas() ** 2
    by_size: Dict[int, list] = {}
    for i in pick:
        by_size.setdefault(data.group_rows[i].size, []).append(i)

    total = np.zeros(K)
    for n_groups, members in sorted(by_size.items()):
        idx = np.stack(
            [
                data.group_rows[i][
                    stream(seed, TAG_BOOTSTRAP, period, int(data.url_ids[i])).integers(0, n_groups, size=(n_samples, n_groups))
                ]
                for i in members
            ]
        )  # (urls, m, G) table rows
        x = table.views[idx]
        y = table.counts[idx]
        sxx = np.einsum("umg,umg->um", x, x)[..., None]
        syy = np.einsum("umgk,umgk->umk", y, y)
        sxy = np.einsum("umg,umgk->umk", x, y)
        beta = deming_from_sums(sxx, syy, sxy, var_x, var_y)  # (urls, m, K)
        # Shift by the first resample so identical resamples give exactly zero.
        total += (beta - beta[:, :1]).var(axis=1, ddof=1).sum(axis=0)
    return total / n_urls


def estimate_vf_correlation(
    table: EngagementTable,
    period: int,
    anchor: str = ANCHOR,
    min_views: Optional[float] = None,
    return_flags: bool = False,
):
    """Pearson correlation of each behavior's URL-total count with the anchor's.

    Columns with zero variance get 0 and a ``DegenerateColumnWarning``.
    """
    data = period_data(table, period, min_views)
    a = table.behavior_names.index(anchor)
    if data.url_ids.size < 2:
        raise ValidationError("value-faithfulness by correlation needs at least two URLs")
    vf, flags = correlation_vf(data.totals, a)
    if flags[a]:
        raise ValidationError(f"anchor column {anchor!r} is constant across URLs")
    return (vf, flags) if return_flags else vf


def correlation_vf(totals: np.ndarray, anchor_index: int):
    centered = totals - totals.mean(axis=0)
    norms = np.sqrt((centered * centered).sum(axis=0))
    flags = norms == 0
    vf = np.zeros(totals.shape[1])
    ok = ~flags
    if not flags[anchor_index]:
        vf[ok] = (centered[:, ok].T @ centered[:, anchor_index]) / (norms[ok] * norms[anchor_index])
        vf[anchor_index] = 1.0
    if flags.any():
        warnings.warn(
            f"zero-variance columns {np.flatnonzero(flags).tolist()} given value-faithfulness 0",
            DegenerateColumnWarning,
            stacklevel=2,
        )
    return np.clip(vf, -1.0, 1.0), flags


@dataclass(frozen=True)
class SurveyRecord:
    behaviors: Tuple[bool, ...]
    valued: bool


def estimate_vf_survey(records: Sequence[SurveyRecord]) -> np.ndarray:
    """Share of records with behavior j among valued items minus among unvalued, both over all n."""
    if len(records) == 0:
        raise ValidationError("survey estimate needs at least one record")
    o = np.array([r.behaviors for r in records], dtype=bool)
    v = np.array([r.valued for r in records], dtype=bool)
    if o.ndim != 2:
        raise DimensionError("survey records must share one behavior count")
    n = len(records)
    return (o[v].sum(axis=0) - o[~v].sum(axis=0)) / n


def total_value(counts, vf) -> float:
    counts = np.asarray(counts, dtype=float)
    vf = np.asarray(vf, dtype=float)
    if counts.shape != vf.shape:
        raise DimensionError("counts and vf lengths differ")
    return float(counts @ vf)


# --- weight schemes ----------------------------------------------------------


def weights_user_optimal_empirical(vf_hat, variance_hat) -> WeightVector:
    """``Sigma^-1 vf`` with negative value-faithfulness clamped to 0, L1-normalized."""
    variance_hat = np.asarray(variance_hat, dtype=float)
    if not np.all(variance_hat > 0):
        raise ValidationError("variance estimates must be positive")
    return normalize(sanitize_vf(vf_hat) / variance_hat, 1)


def weights_vf_only(vf_hat) -> WeightVector:
    return normalize(sanitize_vf(vf_hat), 1)


def weights_facebook() -> WeightVector:
    """Likes weighted 1, each emoji reaction 5, divided by 26."""
    return WeightVector(np.array([1.0, 5.0, 5.0, 5.0, 5.0, 5.0]) / 26.0, 1)


# --- report ------------------------------------------------------------------


@dataclass
class EstimationReport:
    period: int
    beta_hat: Dict[int, np.ndarray]
    vf_hat: np.ndarray
    variance_hat: np.ndarray
    n_boot_urls: int
    n_boot_samples: int
    vf_flags: Tuple[bool, ...] = field(default_factory=lambda: (False,) * K)


def estimate_period(
    table: EngagementTable,
    period: int,
    n_boot_urls: int = 1000,
    n_boot_samples: int = 100,
    seed: int = 0,
    min_views: Optional[float] = None,
) -> EstimationReport:
    """All estimates for one period. ``n_boot_urls`` is capped at the eligible URL count."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        vf, flags = estimate_vf_correlation(table, period, min_views=min_views, return_flags=True)
    if flags.any():
        log.warning("period %d: constant columns %s set to value-faithfulness 0", period, np.flatnonzero(flags).tolist())
    beta = estimate_engagement_probs(table, period, min_views)
    n_urls = min(n_boot_urls, len(beta))
    variance = bootstrap_variance(table, period, n_urls, n_boot_samples, seed, min_views)
    for name, f, s in zip(BEHAVIORS, vf, variance):
        log.info("period %d %-7s vf_hat=% .4f variance_hat=%.3e", period, name, f, s)
    return EstimationReport(period, beta, vf, variance, n_urls, n_boot_samples, tuple(bool(f) for f in flags))
