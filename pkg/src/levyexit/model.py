"""Deterministic tumor-growth model: drift, potential, steady states, scaling."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "ModelParams",
    "ScalingParams",
    "SteadyStates",
    "RegimeError",
    "drift",
    "potential",
    "steady_states",
    "is_bistable",
    "nondimensionalize",
    "zero_drift",
    "drift_function",
]

# Typical experimental ranges (1/day); outside values warn but are accepted.
LAMBDA_RANGE = (0.2, 1.5)
K1_RANGE = (0.1, 18.0)
K2_RANGE = (0.2, 18.0)


class RegimeError(ValueError):
    """Raised when parameters do not admit three distinct steady states."""


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless immune-response parameters (theta, beta)."""

    theta: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.theta > 0 and self.beta > 0):
            raise ValueError(
                f"theta and beta must be positive, got theta={self.theta}, beta={self.beta}"
            )

    @property
    def bistable(self) -> bool:
        return self.theta < 1.0 and self.beta < (1.0 + self.theta) ** 2 / (4.0 * self.theta)


@dataclass(frozen=True)
class ScalingParams:
    """Raw kinetic constants: proliferation, binding, dissociation (1/day), cytotoxic level."""

    lambda_rate: float
    k1: float
    k2: float
    e_total: float

    def __post_init__(self) -> None:
        for name in ("lambda_rate", "k1", "k2", "e_total"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)}")
        for name, value, (lo, hi) in (
            ("lambda_rate", self.lambda_rate, LAMBDA_RANGE),
            ("k1", self.k1, K1_RANGE),
            ("k2", self.k2, K2_RANGE),
        ):
            if not lo <= value <= hi:
                warnings.warn(
                    f"{name}={value} outside the typical experimental range [{lo}, {hi}]",
                    UserWarning,
                    stacklevel=3,
                )


class SteadyStates(NamedTuple):
    extinction: float  # x1 = 0
    threshold: float  # x2, unstable
    tumor: float  # x3, stable


class Nondimensionalization(NamedTuple):
    params: ModelParams
    time_scale: float  # dimensionless time t = lambda * t'
    density_scale: float  # k1/k2, so that x = (k1/k2) * X


def _check_pole(x: np.ndarray) -> None:
    if np.any(x <= -1.0):
        raise ValueError("x <= -1 hits the pole of the immune kinetics term")


def drift(x, p: ModelParams):
    """Growth rate f(x) = x(1 - theta x) - beta x/(x+1), defined for x > -1.

    Accepts scalars or arrays and returns the matching shape.
    """
    xa = np.asarray(x, dtype=float)
    _check_pole(xa)
    out = xa * (1.0 - p.theta * xa) - p.beta * xa / (xa + 1.0)
    return float(out) if out.ndim == 0 else out


def potential(x, p: ModelParams):
    """Potential U(x) with U' = -drift; U(0) = 0."""
    xa = np.asarray(x, dtype=float)
    _check_pole(xa)
    out = -0.5 * xa**2 + p.theta * xa**3 / 3.0 + p.beta * xa - p.beta * np.log1p(xa)
    return float(out) if out.ndim == 0 else out


def steady_states(p: ModelParams) -> SteadyStates:
    """Roots of the drift: extinction 0 and the two positive branch roots.

    Raises RegimeError when the discriminant is nonpositive or theta >= 1,
    because then the exit interval between the stable states degenerates.
    """
    disc = (1.0 + p.theta) ** 2 - 4.0 * p.beta * p.theta
    if p.theta >= 1.0:
        raise RegimeError(f"theta={p.theta} >= 1 admits no bistable regime")
    if disc <= 0.0:
        raise RegimeError(
            f"discriminant (1+theta)^2 - 4 beta theta = {disc:.6g} <= 0: "
            "no pair of distinct branch roots"
        )
    root = math.sqrt(disc)
    x2 = (1.0 - p.theta - root) / (2.0 * p.theta)
    x3 = (1.0 - p.theta + root) / (2.0 * p.theta)
    return SteadyStates(0.0, x2, x3)


def is_bistable(p: ModelParams) -> bool:
    """True iff theta < 1 and 0 < beta < (1+theta)^2 / (4 theta)."""
    return p.bistable


def nondimensionalize(s: ScalingParams) -> Nondimensionalization:
    """Map raw kinetic constants to (ModelParams, time scale, density scale).

    theta = k2/k1, beta = k1*E/lambda; time is measured in units of
    1/lambda and density in units of k2/k1 (x = (k1/k2) X).
    """
    params = ModelParams(theta=s.k2 / s.k1, beta=s.k1 * s.e_total / s.lambda_rate)
    return Nondimensionalization(params, s.lambda_rate, s.k1 / s.k2)


def zero_drift(x):
    """Zero drift, for pure-noise benchmark problems."""
    xa = np.asarray(x, dtype=float)
    out = np.zeros_like(xa)
    return float(out) if out.ndim == 0 else out


def drift_function(obj) -> Callable:
    """Coerce ModelParams or a callable f(x) into a vectorized drift callable."""
    if isinstance(obj, ModelParams):
        return lambda x: drift(x, obj)
    if callable(obj):
        return obj
    raise TypeError(f"expected ModelParams or a callable drift, got {type(obj)!r}")
