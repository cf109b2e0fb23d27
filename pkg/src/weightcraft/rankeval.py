"""Score and rank URLs under a weight scheme; measure the top-K outcomes.

Weights are trained on month ``t-1`` estimates and applied to month ``t``
engagement estimates. The value of a top-K list is the sum over its URLs of
observed month-``t`` counts weighted by month-``t`` value-faithfulness.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from weightcraft.datagen import K, EngagementTable, GroundTruth
from weightcraft.errors import DimensionError, ValidationError
from weightcraft.estimation import (
    EstimationReport,
    estimate_period,
    period_data,
    total_value,
    weights_facebook,
    weights_user_optimal_empirical,
    weights_vf_only,
)
from weightcraft.model import WeightVector, _weights
from weightcraft.parallel import parallel_map

log = logging.getLogger(__name__)

SCHEMES = ("user_optimal", "vf_only", "facebook")


@dataclass(frozen=True)
class SchemeResult:
    scheme: str
    period: int
    weights: WeightVector
    top_k: int
    total_value: float
    misinfo_rate: float
    mean_domain_quality: float
    ranked_urls: tuple
    truncated: bool = False


def score_urls(beta_hat: Mapping[int, np.ndarray], w) -> Dict[int, float]:
    w = _weights(w)
    out = {}
    for u, b in beta_hat.items():
        b = np.asarray(b, dtype=float)
        if b.shape != w.shape:
            raise DimensionError(f"URL {u}: estimate length {b.size} differs from weight length {w.size}")
        out[u] = float(b @ w)
    return out


def rank(scores: Mapping[int, float], top_k: int) -> List[int]:
    """URLs by descending score, ties by ascending url_id."""
    return sorted(scores, key=lambda u: (-scores[u], u))[:top_k]


def scheme_weights(scheme: str, train: EstimationReport) -> WeightVector:
    if scheme == "user_optimal":
        return weights_user_optimal_empirical(train.vf_hat, train.variance_hat)
    if scheme == "vf_only":
        return weights_vf_only(train.vf_hat)
    if scheme == "facebook":
        return weights_facebook()
    raise ValidationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _outcomes(table, truth, report, ranked, min_views):
    data = period_data(table, report.period, min_views)
    row = {int(u): i for i, u in enumerate(data.url_ids)}
    value = sum(total_value(data.totals[row[u]], report.vf_hat) for u in ranked)
    idx = truth.index()
    gt = np.array([idx[u] for u in ranked], dtype=int)
    misinfo = float(truth.misinfo[gt].mean()) if gt.size else float("nan")
    quality = float(truth.domain_quality[gt].mean()) if gt.size else float("nan")
    return value, misinfo, quality


def evaluate_weights(
    table: EngagementTable,
    truth: GroundTruth,
    scheme: str,
    weights: WeightVector,
    eval_report: EstimationReport,
    top_k: int = 100,
    min_views: Optional[float] = None,
) -> SchemeResult:
    scores = score_urls(eval_report.beta_hat, weights)
    truncated = top_k > len(scores)
    if truncated:
        log.warning("period %d: top_k=%d exceeds %d eligible URLs; using all", eval_report.period, top_k, len(scores))
    ranked = rank(scores, top_k)
    value, misinfo, quality = _outcomes(table, truth, eval_report, ranked, min_views)
    return SchemeResult(scheme, eval_report.period, weights, top_k, value, misinfo, quality, tuple(ranked), truncated)


def evaluate_scheme(
    table: EngagementTable,
    truth: GroundTruth,
    scheme: str,
    train_period: int,
    eval_period: int,
    top_k: int = 100,
    reports: Optional[Mapping[int, EstimationReport]] = None,
    min_views: Optional[float] = None,
    **estimate_kwargs,
) -> SchemeResult:
    """Train weights on ``train_period`` estimates, rank ``eval_period`` URLs."""
    reports = dict(reports or {})
    for t in (train_period, eval_period):
        if t not in reports:
            reports[t] = estimate_period(table, t, min_views=min_views, **estimate_kwargs)
    w = scheme_weights(scheme, reports[train_period])
    return evaluate_weights(table, truth, scheme, w, reports[eval_period], top_k, min_views)


def oracle_result(
    table: EngagementTable,
    truth: GroundTruth,
    eval_report: EstimationReport,
    top_k: int = 100,
    min_views: Optional[float] = None,
) -> SchemeResult:
    """Upper-bound ranking that scores by ``truth.beta_true @ vf_hat`` of the evaluation month."""
    idx = truth.index()
    scores = {u: float(truth.beta_true[idx[u]] @ eval_report.vf_hat) for u in eval_report.beta_hat}
    ranked = rank(scores, top_k)
    value, misinfo, quality = _outcomes(table, truth, eval_report, ranked, min_views)
    w = np.full(K, 1.0 / K)
    return SchemeResult("oracle", eval_report.period, WeightVector(w), top_k, value, misinfo, quality, tuple(ranked), top_k > len(scores))


def estimate_all(
    table: EngagementTable,
    periods: Optional[Iterable[int]] = None,
    n_boot_urls: int = 1000,
    n_boot_samples: int = 100,
    seed: int = 0,
    min_views: Optional[float] = None,
    threads: Optional[int] = 1,
) -> Dict[int, EstimationReport]:
    periods = sorted(int(p) for p in (table.periods if periods is None else periods))
    reports = parallel_map(
        lambda t: estimate_period(table, t, n_boot_urls, n_boot_samples, seed, min_views), periods, threads
    )
    return dict(zip(periods, reports))


def run_rank_eval(
    table: EngagementTable,
    truth: GroundTruth,
    reports: Mapping[int, EstimationReport],
    schemes: Sequence[str] = SCHEMES,
    top_k: int = 100,
    min_views: Optional[float] = None,
    threads: Optional[int] = 1,
) -> List[SchemeResult]:
    """Every (scheme, month t) pair for consecutive months present in ``reports``."""
    periods = sorted(reports)
    tasks = [(s, t) for s in schemes for t in periods[1:] if t - 1 in reports]
    return parallel_map(
        lambda st: evaluate_scheme(table, truth, st[0], st[1] - 1, st[1], top_k, reports, min_views),
        tasks,
        threads,
    )


def summarize(results: Sequence[SchemeResult], weighting: str = "simple", n_eligible: Optional[Mapping[int, int]] = None) -> Dict[str, Dict[str, float]]:
    """Per-scheme mean of each outcome across months.

    ``weighting="eligible"`` weights months by eligible URL count
    (``n_eligible``) instead of a simple mean.
    """
    if weighting not in ("simple", "eligible"):
        raise ValidationError("weighting must be 'simple' or 'eligible'")
    out: Dict[str, Dict[str, float]] = {}
    for scheme in dict.fromkeys(r.scheme for r in results):
        rows = [r for r in results if r.scheme == scheme]
        if weighting == "eligible":
            if n_eligible is None:
                raise ValidationError("eligible weighting needs per-period eligible counts")
            wts = np.array([n_eligible[r.period] for r in rows], dtype=float)
        else:
            wts = np.ones(len(rows))
        wts = wts / wts.sum()
        out[scheme] = {
            key: float(np.dot(wts, [getattr(r, key) for r in rows]))
            for key in ("total_value", "misinfo_rate", "mean_domain_quality")
        }
    return out
