"""Simultaneous confidence bands around a copula estimate.

Two constructions over a shared grid:

* LIL bands: constant half-width (1 + epsilon) * A / R_n, where
  R_n = sqrt(n / (2 log log n)) is the iterated-logarithm normalization of
  the estimator's maximal deviation. A defaults to 1/2 and epsilon to 0;
  epsilon in (-1, 0) shrinks the band below the asymptotically covering
  width, epsilon in (0, 1) widens it.
* Normal-approximation bands: pointwise half-width
  z * sqrt(sigma2(u, v) / n) from the asymptotic normality of the
  estimator, z the two-sided standard normal quantile for the requested
  confidence. Pointwise by nature, so their simultaneous coverage over a
  grid falls well below the nominal level.

``covers`` is the simultaneous-coverage predicate used by the Monte Carlo
harness: the truth surface must lie inside the band at every grid knot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from .estimator import CopulaGrid
from .specfun import normal_quantile

__all__ = [
    "NumericError",
    "BandMethod",
    "BandSpec",
    "BandSurfaces",
    "rn",
    "lil_bands",
    "normal_bands",
    "covers",
]


class NumericError(RuntimeError):
    """Numeric failure in a band computation (e.g. negative variance)."""


class BandMethod(Enum):
    LIL = "lil"
    NORMAL = "normal"


@dataclass(frozen=True)
class BandSpec:
    """Half-width parameters for one band construction.

    ``A`` and ``epsilon`` apply to the LIL method, ``confidence`` to the
    normal method; ``clamp`` truncates both surfaces to [0, 1]. Clamping
    never changes a coverage verdict because the truth itself lies in
    [0, 1].
    """

    method: BandMethod
    A: float = 0.5
    epsilon: float = 0.0
    confidence: float = 0.99
    clamp: bool = True

    def __post_init__(self):
        if not isinstance(self.method, BandMethod):
            raise ValueError("method must be a BandMethod")
        if not self.A > 0.0:
            raise ValueError("A must be positive")
        if not -1.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (-1, 1)")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")


@dataclass(frozen=True)
class BandSurfaces:
    """Lower/center/upper surfaces on a shared grid, plus run metadata."""

    lower: CopulaGrid
    center: CopulaGrid
    upper: CopulaGrid
    metadata: dict[str, Any]


def rn(n: int) -> float:
    """Iterated-logarithm normalization R_n = sqrt(n / (2 log log n))."""
    n = int(n)
    if n < 16:
        raise ValueError(
            "n >= 16 required: R_n = sqrt(n / (2 log log n)) needs log log n safely positive"
        )
    return math.sqrt(n / (2.0 * math.log(math.log(n))))


def _surfaces(center: CopulaGrid, half_width, spec: BandSpec, metadata: dict) -> BandSurfaces:
    lower = center.values - half_width
    upper = center.values + half_width
    if spec.clamp:
        lower = np.clip(lower, 0.0, 1.0)
        upper = np.clip(upper, 0.0, 1.0)
    return BandSurfaces(
        lower=CopulaGrid(center.u_knots, center.v_knots, lower),
        center=center,
        upper=CopulaGrid(center.u_knots, center.v_knots, upper),
        metadata=metadata,
    )


def lil_bands(center: CopulaGrid, n: int, spec: BandSpec) -> BandSurfaces:
    """Constant-half-width simultaneous bands center ± (1+epsilon)·A/R_n."""
    if spec.method is not BandMethod.LIL:
        raise ValueError("lil_bands requires a spec with method=LIL")
    half_width = (1.0 + spec.epsilon) * spec.A / rn(n)
    metadata = {
        "method": spec.method.value,
        "n": int(n),
        "A": spec.A,
        "epsilon": spec.epsilon,
        "clamp": spec.clamp,
        "half_width": half_width,
    }
    return _surfaces(center, half_width, spec, metadata)


def normal_bands(
    center: CopulaGrid, n: int, sigma2: CopulaGrid, spec: BandSpec
) -> BandSurfaces:
    """Pointwise bands center ± z·sqrt(sigma2/n) at the spec confidence.

    ``sigma2`` carries the asymptotic variance of sqrt(n)(Chat - C)
    evaluated on the same grid as ``center``; negative entries are
    rejected as a :class:`NumericError` since the variance is nonnegative
    by construction.
    """
    if spec.method is not BandMethod.NORMAL:
        raise ValueError("normal_bands requires a spec with method=NORMAL")
    if int(n) < 1:
        raise ValueError("n must be positive")
    if not center.same_grid(sigma2):
        raise ValueError("sigma2 grid does not match the center grid")
    if np.any(sigma2.values < 0.0):
        raise NumericError("negative sigma2 value: variance surface is invalid")
    z = normal_quantile(0.5 * (1.0 + spec.confidence))
    half_width = z * np.sqrt(sigma2.values / float(n))
    metadata = {
        "method": spec.method.value,
        "n": int(n),
        "confidence": spec.confidence,
        "clamp": spec.clamp,
        "z": z,
        "half_width_min": float(half_width.min()),
        "half_width_max": float(half_width.max()),
    }
    return _surfaces(center, half_width, spec, metadata)


def covers(bands: BandSurfaces, truth: CopulaGrid) -> bool:
    """Simultaneous coverage: truth inside the band at every grid knot."""
    if not truth.same_grid(bands.center):
        raise ValueError("truth grid does not match the band grid")
    inside = (bands.lower.values <= truth.values) & (truth.values <= bands.upper.values)
    return bool(np.all(inside))
