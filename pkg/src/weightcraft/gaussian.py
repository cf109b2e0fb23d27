"""Gaussian density and CDF for the score-difference noise.

``erf``/``erfc`` come from ``scipy.special``, which evaluates the Cephes
rational approximations (piecewise minimax rational functions on
``|x| < 1`` for erf and on the tails for erfc; relative error near 1e-16).
The CDF is written with ``erfc`` so the lower tail keeps full relative
precision instead of cancelling against 1.
"""

from __future__ import annotations

import numpy as np
from scipy import special

SQRT2 = np.sqrt(2.0)


def erf(x):
    return special.erf(x)


def normal_cdf(x, var):
    """CDF of N(0, var) at ``x``."""
    x = np.asarray(x, dtype=float)
    return 0.5 * special.erfc(-x / np.sqrt(2.0 * var))


def normal_pdf(x, var):
    """Density of N(0, var) at ``x``."""
    x = np.asarray(x, dtype=float)
    return np.exp(-(x * x) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)
