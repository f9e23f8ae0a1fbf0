"""Regression models for the unemployment/inflation relation and their SSE."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .special_functions import (
    DEFAULT_POLICY,
    DomainError,
    MLTwoParams,
    SeriesPolicy,
    ml_two,
)


class ModelKind(str, Enum):
    POWER = "power"
    EXPONENTIAL = "exponential"
    MITTAG_LEFFLER = "mittag_leffler"


@dataclass(frozen=True)
class PowerParams:
    """y = b * x**c - a"""

    a: float
    b: float
    c: float


@dataclass(frozen=True)
class ExpParams:
    """y = b * exp(c*x) - a"""

    a: float
    b: float
    c: float


@dataclass(frozen=True)
class MLModelParams:
    """y = C * x**(beta-1) * E_{alpha,beta}(a * x**alpha)

    alpha and beta are only checked when the model is evaluated.
    """

    alpha: float
    beta: float
    a: float
    C: float


@dataclass(frozen=True)
class PhillipsOriginalParams:
    """Phillips' 1958 fit y + a = b * x**c."""

    a: float = 0.900
    b: float = 9.638
    c: float = -1.394


PARAM_TYPES = {
    ModelKind.POWER: PowerParams,
    ModelKind.EXPONENTIAL: ExpParams,
    ModelKind.MITTAG_LEFFLER: MLModelParams,
}

PARAM_NAMES = {kind: tuple(cls.__dataclass_fields__) for kind, cls in PARAM_TYPES.items()}


def _positive_x(x):
    xa = np.asarray(x, dtype=float)
    if not np.all(xa > 0):
        raise DomainError("model requires x > 0")
    return xa


def _out(value, x):
    return float(value) if np.ndim(x) == 0 else value


def eval_power(p: PowerParams, x):
    xa = _positive_x(x)
    return _out(p.b * np.power(xa, p.c) - p.a, x)


def eval_exponential(p: ExpParams, x):
    xa = np.asarray(x, dtype=float)
    if np.any(p.c * xa > 700):
        raise OverflowError("c*x > 700 overflows the exponential model")
    return _out(p.b * np.exp(p.c * xa) - p.a, x)


def eval_ml_model(p: MLModelParams, x, policy: SeriesPolicy = DEFAULT_POLICY):
    if not (p.alpha > 0 and p.beta > 0):
        raise DomainError(f"need alpha > 0 and beta > 0, got alpha={p.alpha}, beta={p.beta}")
    xa = _positive_x(x)
    logx = np.log(xa)
    arg = p.a * np.exp(p.alpha * logx)
    ml = ml_two(MLTwoParams(p.alpha, p.beta), arg, policy)
    return _out(p.C * np.exp((p.beta - 1.0) * logx) * ml, x)


def eval_phillips_original(p: PhillipsOriginalParams, x):
    xa = _positive_x(x)
    return _out(p.b * np.power(xa, p.c) - p.a, x)


def evaluator(kind: ModelKind, policy: SeriesPolicy = DEFAULT_POLICY) -> Callable:
    """Return ``f(params, x)`` for the given model kind."""
    kind = ModelKind(kind)
    if kind is ModelKind.POWER:
        return eval_power
    if kind is ModelKind.EXPONENTIAL:
        return eval_exponential
    return lambda p, x: eval_ml_model(p, x, policy)


def make_params(kind: ModelKind, values: Sequence[float]):
    return PARAM_TYPES[ModelKind(kind)](*(float(v) for v in values))


def params_vector(params) -> tuple[float, ...]:
    return astuple(params)


def sse(model: Callable, params, points: Iterable[tuple[float, float]]) -> float:
    """Sum of squared vertical offsets between points and the model curve."""
    pts = list(points)
    if not pts:
        return 0.0
    xs = np.array([p[0] for p in pts], dtype=float)
    ys = np.array([p[1] for p in pts], dtype=float)
    resid = ys - np.asarray(model(params, xs), dtype=float)
    # exact summation keeps the value independent of point order
    return math.fsum((resid * resid).tolist())
