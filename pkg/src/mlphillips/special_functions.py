"""Gamma, Pochhammer symbols and the Mittag-Leffler family on the real line.

All Mittag-Leffler variants are evaluated by their power series

    E(z) = sum_k c_k z^k / Gamma(alpha*k + beta)

with a per-variant coefficient sequence ``c_k`` (1 for the two-parameter
function, ``(gamma)_k / k!`` for Prabhakar's, ``(gamma)_{qk} / k!`` for the
four-parameter one).  Terms are formed in log space so that neither ``z**k``
nor ``Gamma`` overflow, summed exactly per point, and re-evaluated in extended
precision when the cancellation estimate says double precision is not enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Union

import mpmath
import numba
import numpy as np

ArrayLike = Union[float, np.ndarray]

__all__ = [
    "SpecialFunctionError",
    "DomainError",
    "PoleError",
    "SeriesError",
    "ArgumentGuardError",
    "NonConvergenceError",
    "SeriesOverflowError",
    "CancellationError",
    "SeriesPolicy",
    "DEFAULT_POLICY",
    "MLTwoParams",
    "PrabhakarParams",
    "ShuklaParams",
    "gamma",
    "log_gamma",
    "reciprocal_gamma",
    "pochhammer",
    "generalized_pochhammer",
    "ml_one",
    "ml_two",
    "ml_prabhakar",
    "ml_shukla",
]


class SpecialFunctionError(ArithmeticError):
    pass


class DomainError(SpecialFunctionError, ValueError):
    """Parameter or argument outside the function's real domain."""


class PoleError(SpecialFunctionError, ValueError):
    """Gamma evaluated at zero or a negative integer."""


class SeriesError(SpecialFunctionError):
    """Base class for failures of the series evaluator."""


class ArgumentGuardError(SeriesError):
    """|z| exceeds the policy's argument-magnitude guard."""


class NonConvergenceError(SeriesError):
    """The series did not meet its truncation rule within ``max_terms``."""


class CancellationError(SeriesError):
    """Cancellation exceeds the policy tolerance and extended precision is off."""


class SeriesOverflowError(SeriesError, OverflowError):
    """The series value is not representable as a double."""


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation and accuracy controls for the series evaluator.

    ``cancellation_tol`` bounds the estimated relative error of the double
    precision sum (``sum|t_k| / |sum t_k|`` times the per-term rounding).  Above
    it the point is recomputed with mpmath when ``extended_precision`` is on,
    otherwise CancellationError is raised.  A point whose absolute error
    estimate is at most ``cancellation_abs_tol`` is accepted regardless; the
    default 0 disables that escape.
    """

    rel_tol: float = 1e-15
    abs_tol: float = 1e-300
    max_terms: int = 10000
    max_abs_arg: float = 100.0
    extended_precision: bool = True
    cancellation_tol: float = 1e-9
    cancellation_abs_tol: float = 0.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")
        if not self.max_abs_arg > 0:
            raise ValueError("max_abs_arg must be positive")
        if not self.cancellation_tol > 0:
            raise ValueError("cancellation_tol must be positive")
        if not self.cancellation_abs_tol >= 0:
            raise ValueError("cancellation_abs_tol must be non-negative")


DEFAULT_POLICY = SeriesPolicy()


@dataclass(frozen=True)
class MLTwoParams:
    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(
                f"need alpha > 0 and beta > 0, got alpha={self.alpha}, beta={self.beta}"
            )


@dataclass(frozen=True)
class PrabhakarParams:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(
                f"need alpha > 0 and beta > 0, got alpha={self.alpha}, beta={self.beta}"
            )
        if self.gamma == 0 or not math.isfinite(self.gamma):
            raise DomainError(f"gamma must be finite and non-zero, got {self.gamma}")


@dataclass(frozen=True)
class ShuklaParams:
    alpha: float
    beta: float
    gamma: float
    q: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.gamma > 0):
            raise DomainError(
                "need alpha, beta, gamma > 0, got "
                f"alpha={self.alpha}, beta={self.beta}, gamma={self.gamma}"
            )
        if not (0 < self.q < 1 or (self.q >= 1 and float(self.q).is_integer())):
            raise DomainError(f"q must lie in (0, 1) or be a positive integer, got {self.q}")


# ---------------------------------------------------------------------------
# Gamma

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LANCZOS_TAIL = np.array(_LANCZOS_COEF[1:])
_LANCZOS_IDX = np.arange(1.0, len(_LANCZOS_COEF))
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_GAMMA_MAX_ARG = 171.6


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _sinpi(x: float) -> float:
    """sin(pi*x) with argument reduction, exact zeros at integers."""
    if abs(x) < 0.5:
        return math.sin(math.pi * x)
    r = math.fmod(x, 2.0)
    if r < 0:
        r += 2.0
    if r == 0.0 or r == 1.0:
        return 0.0
    if r > 1.0:
        return -_sinpi(r - 1.0)
    if r > 0.5:
        r = 1.0 - r
    return math.sin(math.pi * r)


def _lanczos_sum(xm1: float) -> float:
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (xm1 + i)
    return acc


def gamma(x: float) -> float:
    """Gamma function for real ``x``.

    Raises PoleError at zero and the negative integers and OverflowError once
    the result leaves double range (x > 171.6).
    """
    x = float(x)
    if math.isnan(x):
        return math.nan
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x > _GAMMA_MAX_ARG:
        raise OverflowError(f"Gamma({x}) overflows double precision")
    if x.is_integer():
        return _FACTORIALS[int(x) - 1]
    if x < 0.5:
        s = _sinpi(x)
        return math.pi / (s * gamma(1.0 - x))
    if x >= _STIRLING_MIN:
        return _gamma_stirling(x)
    xm1 = x - 1.0
    t = xm1 + _LANCZOS_G + 0.5
    # t**(xm1+0.5) is split in two halves so that x up to 171.6 does not overflow
    half = t ** (0.5 * (xm1 + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * _lanczos_sum(xm1)


# (n-1)! for n = 1..171, correctly rounded
_FACTORIALS = tuple(float(math.factorial(n)) for n in range(171))

# The truncated leading Lanczos coefficient leaves a relative error that tends
# to 1.9e-13 as x grows, so large arguments use the Stirling series instead.
_STIRLING_MIN = 10.0
_STIRLING_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)


def _stirling_correction(x: float) -> float:
    x2 = x * x
    acc = 0.0
    for c in reversed(_STIRLING_COEF):
        acc = acc / x2 + c
    return acc / x


def _gamma_stirling(x: float) -> float:
    half = x ** (0.5 * (x - 0.5))
    return _SQRT_2PI * half * (half * math.exp(-x)) * math.exp(_stirling_correction(x))


def _log_gamma_scalar(x: float) -> float:
    if x < 0.5:
        if _is_nonpositive_integer(x):
            return math.inf
        return math.log(math.pi / abs(_sinpi(x))) - _log_gamma_scalar(1.0 - x)
    xm1 = x - 1.0
    t = xm1 + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (xm1 + 0.5) * math.log(t) - t + math.log(_lanczos_sum(xm1))


def _log_gamma_positive(x: np.ndarray) -> np.ndarray:
    """Vectorised log Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    small = x < 0.5
    xx = np.where(small, x + 1.0, x)
    xm1 = xx - 1.0
    acc = _LANCZOS_COEF[0] + (_LANCZOS_TAIL / (xm1[..., None] + _LANCZOS_IDX)).sum(axis=-1)
    t = xm1 + _LANCZOS_G + 0.5
    out = _LOG_SQRT_2PI + (xm1 + 0.5) * np.log(t) - t + np.log(acc)
    if small.any():
        # Gamma(x) = Gamma(x+1)/x
        out = np.where(small, out - np.log(np.where(small, x, 1.0)), out)
    return out


def log_gamma(x: ArrayLike) -> ArrayLike:
    """log|Gamma(x)|; +inf at the poles."""
    if np.ndim(x) == 0:
        return _log_gamma_scalar(float(x))
    return np.vectorize(_log_gamma_scalar, otypes=[float])(x)


def _gamma_sign(x: float) -> float:
    if x > 0:
        return 1.0
    return -1.0 if math.floor(x) % 2 else 1.0


def reciprocal_gamma(x: float) -> float:
    """1/Gamma(x); exactly 0 at the poles of Gamma."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    if 0.5 <= x <= _GAMMA_MAX_ARG or (x < 0.5 and 1.0 - x <= _GAMMA_MAX_ARG):
        return 1.0 / gamma(x)
    lg = _log_gamma_scalar(x)
    if -lg > 709.0:
        return _gamma_sign(x) * math.inf
    return _gamma_sign(x) * math.exp(-lg)


def pochhammer(gamma: float, k: int) -> float:
    """Rising factorial (gamma)_k = gamma (gamma+1) ... (gamma+k-1)."""
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    out = 1.0
    for j in range(int(k)):
        out *= gamma + j
    return out


def generalized_pochhammer(gamma: float, q: float, k: int) -> float:
    """(gamma)_{qk} = Gamma(gamma + q*k) / Gamma(gamma).

    When ``q*k`` is an integer this is the ordinary rising factorial and is
    computed by the product.  Otherwise a ratio of log-Gamma values is used.
    """
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    n = q * k
    if float(n).is_integer() and n >= 0:
        return pochhammer(gamma, int(n))
    top = gamma + n
    if _is_nonpositive_integer(top):
        raise PoleError(f"Gamma({top}) is a pole in (gamma)_qk")
    if _is_nonpositive_integer(gamma):
        return 0.0
    sign = _gamma_sign(top) * _gamma_sign(gamma)
    return sign * math.exp(_log_gamma_scalar(top) - _log_gamma_scalar(gamma))


# ---------------------------------------------------------------------------
# Series engine

# Per-term relative rounding of exp(L) grows with |L|; this is the multiplier
# applied to |L| in the cancellation estimate.
_EPS = np.finfo(float).eps
_FIRST_BLOCK = 64


def _check_argument(z: np.ndarray, policy: SeriesPolicy) -> None:
    worst = float(np.max(np.abs(z))) if z.size else 0.0
    if not math.isfinite(worst):
        raise DomainError("series argument must be finite")
    if worst > policy.max_abs_arg:
        raise ArgumentGuardError(
            f"|z| = {worst:g} exceeds max_abs_arg = {policy.max_abs_arg:g}; "
            "the double precision series is unreliable there"
        )


@numba.njit(cache=True)
def _sum_terms(L, s, logz, negz, zero, rel_tol, abs_tol):  # pragma: no cover - compiled
    """Compensated partial sums with the two-small-terms stopping rule.

    Returns (totals, abs_sums, max_abs_exponent, done, overflow) per point.
    """
    n_terms = L.shape[0]
    n = logz.shape[0]
    totals = np.empty(n)
    abs_sums = np.empty(n)
    big = np.empty(n)
    done = np.zeros(n, dtype=np.bool_)
    overflow = False
    for i in range(n):
        acc = 0.0
        comp = 0.0
        a_sum = 0.0
        b = 0.0
        prev_small = False
        for k in range(n_terms):
            if zero[i] and k > 0:
                t = 0.0
            else:
                e = L[k] + k * logz[i]
                if e == -np.inf:
                    t = 0.0
                else:
                    t = math.exp(e) * s[k]
                    if negz[i] and k % 2 == 1:
                        t = -t
                    if abs(e) > b:
                        b = abs(e)
            if not math.isfinite(t):
                overflow = True
                break
            # Neumaier's variant of Kahan summation
            nxt = acc + t
            if abs(acc) >= abs(t):
                comp += (acc - nxt) + t
            else:
                comp += (t - nxt) + acc
            acc = nxt
            a_sum += abs(t)
            small = abs(t) < rel_tol * abs(acc + comp) + abs_tol
            if k >= 2 and small and prev_small:
                done[i] = True
                break
            prev_small = small
        totals[i] = acc + comp
        abs_sums[i] = a_sum
        big[i] = b
    return totals, abs_sums, big, done, overflow


def _series(
    log_coef: Callable[[int], tuple[np.ndarray, np.ndarray]],
    mp_coefs: Callable[[], Iterator["mpmath.mpf"]],
    z: ArrayLike,
    policy: SeriesPolicy,
) -> ArrayLike:
    """Sum ``sum_k s_k exp(L_k) z^k`` for every entry of ``z``.

    ``log_coef(n)`` returns ``(L, s)`` for k = 0..n-1, the log-magnitude and
    sign of ``c_k / Gamma(alpha k + beta)``.  ``mp_coefs()`` yields the same
    quantities in order as mpmath numbers for the extended precision path.
    """
    scalar = np.ndim(z) == 0
    zv = np.atleast_1d(np.asarray(z, dtype=float))
    shape = zv.shape
    zv = zv.ravel()
    _check_argument(zv, policy)
    if zv.size == 0:
        return np.empty(shape)

    zero = zv == 0.0
    logz = np.log(np.abs(np.where(zero, 1.0, zv)))
    negz = zv < 0

    n_terms = min(_FIRST_BLOCK, policy.max_terms)
    while True:
        L, s = log_coef(n_terms)
        totals, abs_sum, big_exp, done, overflow = _sum_terms(
            L, s, logz, negz, zero, policy.rel_tol, policy.abs_tol
        )
        if overflow:
            raise SeriesOverflowError("series terms overflow double precision")
        if done.all():
            break
        if n_terms >= policy.max_terms:
            raise NonConvergenceError(
                f"series did not converge within {policy.max_terms} terms"
            )
        n_terms = min(2 * n_terms, policy.max_terms)

    if not np.all(np.isfinite(totals)):
        raise SeriesOverflowError("series sum overflows double precision")
    rounding = 4.0 * _EPS * (1.0 + big_exp)
    with np.errstate(divide="ignore", invalid="ignore"):
        est = np.where(
            totals != 0.0, rounding * abs_sum / np.abs(totals), np.where(abs_sum > 0, np.inf, 0.0)
        )
    out = totals
    lossy = np.flatnonzero(
        (est > policy.cancellation_tol) & (rounding * abs_sum > policy.cancellation_abs_tol)
    )
    if lossy.size and not policy.extended_precision:
        i = lossy[0]
        raise CancellationError(
            f"estimated relative error {est[i]:.2g} at z = {zv[i]:g} exceeds "
            f"cancellation_tol = {policy.cancellation_tol:g}"
        )
    for i in lossy:
        out[i] = _series_mp(mp_coefs, float(zv[i]), float(abs_sum[i]), float(totals[i]), policy)

    if scalar:
        return float(out[0])
    return out.reshape(shape)


def _series_mp(mp_coefs, z: float, abs_sum: float, approx: float, policy: SeriesPolicy) -> float:
    """Re-sum one point at a working precision sized to the cancellation.

    ``mp_coefs()`` yields c_k / Gamma(alpha k + beta) for k = 0, 1, ... at the
    current mpmath precision.
    """
    ratio = abs_sum / max(abs(approx), 1e-300)
    dps = 30 + max(0, int(math.ceil(math.log10(max(ratio, 1.0)))))
    while True:
        with mpmath.workdps(dps):
            zm = mpmath.mpf(z)
            power = mpmath.mpf(1)
            total = mpmath.mpf(0)
            abs_total = mpmath.mpf(0)
            eps = mpmath.mpf(10) ** (-dps)
            prev_small = False
            converged = False
            for k, c in zip(range(policy.max_terms), mp_coefs()):
                t = c * power
                power *= zm
                total += t
                abs_total += abs(t)
                is_small = abs(t) <= eps * abs(total) or t == 0
                if k >= 2 and is_small and prev_small:
                    converged = True
                    break
                prev_small = is_small
            if not converged:
                raise NonConvergenceError(
                    f"extended precision series did not converge within {policy.max_terms} terms"
                )
            # digits lost to cancellation must leave at least 20 correct ones
            if total != 0 and abs_total / abs(total) < mpmath.mpf(10) ** (dps - 20):
                value = float(total)
                if not math.isfinite(value):
                    raise SeriesOverflowError("series sum overflows double precision")
                return value
        if dps > 2000:
            return float(total)
        dps *= 2


def _two_param_coef(alpha: float, beta: float):
    def log_coef(n):
        k = np.arange(n, dtype=float)
        return -_log_gamma_positive(alpha * k + beta), np.ones(n)

    def mp_coefs():
        a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
        k = 0
        while True:
            yield mpmath.rgamma(a * k + b)
            k += 1

    return log_coef, mp_coefs


def _ratio_coef(alpha: float, beta: float, log_ratio, mp_ratio):
    """Coefficients whose c_k is built from a running product of ratios.

    ``mp_ratio(j)`` is c_{j+1} / c_j in mpmath arithmetic.
    """

    def log_coef(n):
        k = np.arange(n, dtype=float)
        log_r, sign_r = log_ratio(n - 1)
        log_c = np.concatenate(([0.0], np.cumsum(log_r)))
        sign_c = np.concatenate(([1.0], np.cumprod(sign_r)))
        return log_c - _log_gamma_positive(alpha * k + beta), sign_c

    def mp_coefs():
        a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
        c = mpmath.mpf(1)
        k = 0
        while True:
            yield c * mpmath.rgamma(a * k + b)
            c *= mp_ratio(k)
            k += 1

    return log_coef, mp_coefs


def ml_two(params: MLTwoParams, z: ArrayLike, policy: SeriesPolicy = DEFAULT_POLICY) -> ArrayLike:
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z).

    ``z`` may be a scalar or an array; the result has the same shape.
    """
    log_coef, mp_coefs = _two_param_coef(float(params.alpha), float(params.beta))
    return _series(log_coef, mp_coefs, z, policy)


def ml_one(alpha: float, z: ArrayLike, policy: SeriesPolicy = DEFAULT_POLICY) -> ArrayLike:
    """One-parameter Mittag-Leffler function E_alpha(z) = E_{alpha,1}(z)."""
    return ml_two(MLTwoParams(alpha, 1.0), z, policy)


def ml_prabhakar(
    params: PrabhakarParams, z: ArrayLike, policy: SeriesPolicy = DEFAULT_POLICY
) -> ArrayLike:
    """Prabhakar's three-parameter function sum (gamma)_k z^k / (Gamma(alpha k + beta) k!)."""
    g = float(params.gamma)

    def log_ratio(m):
        j = np.arange(m, dtype=float)
        r = (g + j) / (j + 1.0)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(r)), np.sign(r)

    def mp_ratio(j):
        return (mpmath.mpf(g) + j) / (j + 1)

    log_coef, mp_coefs = _ratio_coef(float(params.alpha), float(params.beta), log_ratio, mp_ratio)
    return _series(log_coef, mp_coefs, z, policy)


def ml_shukla(params: ShuklaParams, z: ArrayLike, policy: SeriesPolicy = DEFAULT_POLICY) -> ArrayLike:
    """Four-parameter function sum (gamma)_{qk} z^k / (Gamma(alpha k + beta) k!)."""
    alpha, beta, g, q = (float(params.alpha), float(params.beta), float(params.gamma), float(params.q))

    if q.is_integer():
        qi = int(q)

        def log_ratio(m):
            # c_{j+1}/c_j = prod_{i<q} (gamma + q j + i) / (j + 1)
            j = np.arange(m, dtype=float)
            r = np.ones(m)
            for i in range(qi):
                r = r * (g + q * j + i)
            r = r / (j + 1.0)
            return np.log(r), np.ones(m)

        def mp_ratio(j):
            r = mpmath.mpf(1)
            for i in range(qi):
                r *= mpmath.mpf(g) + qi * j + i
            return r / (j + 1)

        log_coef, mp_coefs = _ratio_coef(alpha, beta, log_ratio, mp_ratio)
    else:

        def log_coef(n):
            k = np.arange(n, dtype=float)
            lc = (
                _log_gamma_positive(g + q * k)
                - _log_gamma_positive(np.array([g]))[0]
                - _log_gamma_positive(k + 1.0)
            )
            return lc - _log_gamma_positive(alpha * k + beta), np.ones(n)

        def mp_coefs():
            a, b, gm, qm = (mpmath.mpf(v) for v in (alpha, beta, g, q))
            inv_gamma_g = mpmath.rgamma(gm)
            inv_fact = mpmath.mpf(1)
            k = 0
            while True:
                yield mpmath.gamma(gm + qm * k) * inv_gamma_g * inv_fact * mpmath.rgamma(a * k + b)
                k += 1
                inv_fact /= k

    return _series(log_coef, mp_coefs, z, policy)
