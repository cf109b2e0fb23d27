"""Two-producer ranking model without strategic effort.

Predictions for producer ``i`` are ``y(i) = v(i) + b(i) + eps(i)`` with
``eps(i) ~ N(0, diag(variance))``. Producer 1 (the higher-valued item) is
ranked first when ``w @ y(1) > w @ y(-1)``. Diagonal matrices are stored
as vectors throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from weightcraft.errors import (
    DegenerateNoiseError,
    DimensionError,
    NormalizationError,
    OrderingError,
    PositiveVFRequiredError,
    ValidationError,
)
from weightcraft.gaussian import normal_cdf, normal_pdf

PNorm = Union[float, str]

NORM_TOL = 1e-12


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


def _ord(p: PNorm) -> float:
    if isinstance(p, str):
        if p.lower() != "inf":
            raise ValidationError(f"p-norm must be a real >= 1 or 'inf', got {p!r}")
        return np.inf
    p = float(p)
    if not p >= 1:
        raise ValidationError(f"p-norm must be >= 1, got {p}")
    return p


def pnorm(x, p: PNorm = 1) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float), ord=_ord(p)))


@dataclass(frozen=True)
class BehaviorProfile:
    """Per-behavior value-faithfulness, prediction variance and manipulation cost."""

    vf: np.ndarray
    variance: np.ndarray
    cost: np.ndarray = None

    def __post_init__(self):
        vf = _frozen(np.atleast_1d(self.vf))
        variance = _frozen(np.atleast_1d(self.variance))
        cost = _frozen(np.ones_like(vf) if self.cost is None else np.atleast_1d(self.cost))
        if vf.ndim != 1 or vf.size < 1:
            raise DimensionError("vf must be a non-empty vector")
        if variance.shape != vf.shape or cost.shape != vf.shape:
            raise DimensionError(
                f"vf, variance and cost must share length; got {vf.size}, {variance.size}, {cost.size}"
            )
        if not np.all(np.isfinite(vf)):
            raise ValidationError("vf must be finite")
        if not np.all(variance > 0):
            raise ValidationError("variance must be positive")
        if not np.all(cost > 0):
            raise ValidationError("cost must be positive")
        object.__setattr__(self, "vf", vf)
        object.__setattr__(self, "variance", variance)
        object.__setattr__(self, "cost", cost)

    @property
    def k(self) -> int:
        return self.vf.size

    def require_positive_vf(self) -> "BehaviorProfile":
        require_positive_vf(self.vf)
        return self

    def replace(self, **changes) -> "BehaviorProfile":
        fields = {"vf": self.vf, "variance": self.variance, "cost": self.cost}
        fields.update(changes)
        return BehaviorProfile(**fields)


@dataclass(frozen=True)
class ProducerItem:
    value: float
    bias: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "bias", _frozen(np.atleast_1d(self.bias)))


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Nonnegative weights with unit p-norm. Equality is exact elementwise."""

    weights: np.ndarray
    p: PNorm = 1

    def __post_init__(self):
        w = _frozen(np.atleast_1d(self.weights))
        _ord(self.p)
        if w.ndim != 1 or w.size < 1:
            raise DimensionError("weights must be a non-empty vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("weights must be finite and nonnegative")
        if abs(pnorm(w, self.p) - 1.0) > NORM_TOL:
            raise NormalizationError(f"weights must have unit {self.p}-norm, got {pnorm(w, self.p)!r}")
        object.__setattr__(self, "weights", w)

    @property
    def k(self) -> int:
        return self.weights.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, j):
        return self.weights[j]

    def tolist(self) -> list:
        return self.weights.tolist()

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightVector):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.weights, other.weights)

    def __hash__(self) -> int:
        return hash((self.p, self.weights.tobytes()))


@dataclass(frozen=True)
class NoiseDifference:
    """Variance of ``eta(w) = w @ eps(-1) - w @ eps(1)``, i.e. ``2 w' Sigma w``."""

    sigma_sq: float = field()

    @classmethod
    def from_weights(cls, w, variance) -> "NoiseDifference":
        w = np.asarray(w, dtype=float)
        variance = np.asarray(variance, dtype=float)
        if w.shape != variance.shape:
            raise DimensionError(f"weights and variance lengths differ: {w.size} vs {variance.size}")
        sigma_sq = 2.0 * float(np.sum(w * w * variance))
        if not sigma_sq > 0:
            raise DegenerateNoiseError("w' Sigma w = 0: all weight sits on zero-variance behaviors")
        return cls(sigma_sq)

    def cdf(self, x):
        return normal_cdf(x, self.sigma_sq)

    def pdf(self, x):
        return normal_pdf(x, self.sigma_sq)


def require_positive_vf(vf) -> None:
    if not np.all(np.asarray(vf, dtype=float) > 0):
        raise PositiveVFRequiredError()


def sanitize_vf(vf) -> np.ndarray:
    """Clamp negative empirical value-faithfulness to zero before theory calls."""
    vf = np.asarray(vf, dtype=float)
    if not np.all(np.isfinite(vf)):
        raise ValidationError("value-faithfulness estimates must be finite")
    clamped = np.maximum(vf, 0.0)
    if not np.any(clamped > 0):
        raise NormalizationError("every value-faithfulness estimate is nonpositive")
    return clamped


def derive_vf(item_high: ProducerItem, item_low: ProducerItem) -> np.ndarray:
    """``vf[j] = (v(1) + b_j(1)) - (v(-1) + b_j(-1))``."""
    if item_high.bias.shape != item_low.bias.shape:
        raise DimensionError(
            f"bias vectors differ in length: {item_high.bias.size} vs {item_low.bias.size}"
        )
    if not item_high.value > item_low.value:
        raise OrderingError("the first item must have strictly higher value than the second")
    return (item_high.value + item_high.bias) - (item_low.value + item_low.bias)


def normalize(raw: Sequence[float], p: PNorm = 1) -> WeightVector:
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or raw.size == 0:
        raise DimensionError("raw weights must be a non-empty vector")
    if np.any(raw < 0) or not np.all(np.isfinite(raw)):
        raise NormalizationError("raw weights must be finite and nonnegative")
    if not np.any(raw > 0):
        raise NormalizationError("cannot normalize an all-zero weight vector")
    # Rescale by the max first so tiny or huge inputs don't under/overflow the norm.
    scaled = raw / raw.max()
    w = scaled / pnorm(scaled, p)
    err = pnorm(w, p) - 1.0
    if abs(err) > NORM_TOL:
        w = w / pnorm(w, p)
    return WeightVector(w, p)


def _weights(w) -> np.ndarray:
    return np.asarray(w.weights if isinstance(w, WeightVector) else w, dtype=float)


def rank_probability(w, vf, variance, effort_gap=None) -> float:
    """Probability producer 1 is ranked first, ``F_eta(w'vf + w'(q(1) - q(-1)))``."""
    w = _weights(w)
    vf = np.asarray(vf, dtype=float)
    if vf.shape != w.shape:
        raise DimensionError(f"weights and vf lengths differ: {w.size} vs {vf.size}")
    if not np.all(np.asarray(variance, dtype=float) > 0):
        raise ValidationError("variance must be positive")
    noise = NoiseDifference.from_weights(w, variance)
    mean_gap = float(w @ vf)
    if effort_gap is not None:
        effort_gap = np.asarray(effort_gap, dtype=float)
        if effort_gap.shape != w.shape:
            raise DimensionError("effort gap length differs from weights")
        mean_gap += float(w @ effort_gap)
    return float(noise.cdf(mean_gap))


def user_utility(w, vf, variance) -> float:
    """``0.5 * (1 + erf(w'vf / (2 sqrt(w' Sigma w))))``; zero effort."""
    return rank_probability(w, vf, variance)


def user_optimal_weights(vf, variance, p: PNorm = 1) -> WeightVector:
    """Closed-form maximizer of user utility: ``Sigma^-1 vf`` normalized to unit p-norm."""
    vf = np.asarray(vf, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if vf.shape != variance.shape:
        raise DimensionError(f"vf and variance lengths differ: {vf.size} vs {variance.size}")
    require_positive_vf(vf)
    if not np.all(variance > 0):
        raise ValidationError("variance must be positive")
    return normalize(vf / variance, p)
