"""Optimal linear weighting of engagement behaviors in recommender rankings."""

from weightcraft.errors import (
    ConfigError,
    DegenerateNoiseError,
    DimensionError,
    ModelError,
    NormalizationError,
    OrderingError,
    PositiveVFRequiredError,
    SweepAbortError,
    UndefinedAUCError,
    UnsupportedDimensionError,
    ValidationError,
    WeightcraftError,
)
from weightcraft.model import (
    BehaviorProfile,
    NoiseDifference,
    ProducerItem,
    WeightVector,
    derive_vf,
    normalize,
    rank_probability,
    user_optimal_weights,
    user_utility,
)

__version__ = "0.1.0"

__all__ = [
    "BehaviorProfile",
    "ConfigError",
    "DegenerateNoiseError",
    "DimensionError",
    "ModelError",
    "NoiseDifference",
    "NormalizationError",
    "OrderingError",
    "PositiveVFRequiredError",
    "ProducerItem",
    "SweepAbortError",
    "UndefinedAUCError",
    "UnsupportedDimensionError",
    "ValidationError",
    "WeightVector",
    "WeightcraftError",
    "derive_vf",
    "normalize",
    "rank_probability",
    "user_optimal_weights",
    "user_utility",
]
