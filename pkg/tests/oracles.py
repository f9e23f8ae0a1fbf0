"""Independent references built on MPFR (gmpy2) and the standard library.

Nothing here imports the package under test.
"""

from __future__ import annotations

import math

import gmpy2
from gmpy2 import mpfr

LOG2_10 = math.log2(10.0)


def _log_term_peak(alpha: float, beta: float, z: float, extra_log) -> float:
    """Largest natural log of |c_k z^k / Gamma(alpha k + beta)| over k (double estimate)."""
    if z == 0:
        return 0.0
    lz = math.log(abs(z))
    peak, k, falling = -math.inf, 0, 0
    while falling < 50:
        v = k * lz - math.lgamma(alpha * k + beta) + extra_log(k)
        if v > peak:
            peak, falling = v, 0
        else:
            falling += 1
        k += 1
    return peak


def _sum(alpha, beta, z, coef, bits):
    """Sum the series in MPFR at ``bits`` of precision until terms vanish."""
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        za, a, b = mpfr(z), mpfr(alpha), mpfr(beta)
        total = mpfr(0)
        power = mpfr(1)
        k = 0
        small = 0
        while True:
            term = coef(k) * power / gmpy2.gamma(a * k + b)
            total += term
            if term == 0 or (total != 0 and abs(term) < abs(total) * mpfr(2) ** (-bits)):
                small += 1
                if small >= 2 and k > 2:
                    return total
            else:
                small = 0
            power *= za
            k += 1


def ml_series(alpha, beta, z, digits=50, coef=None, coef_log=None, mixed_signs=False):
    """E(z) = sum_k c_k z^k / Gamma(alpha k + beta) to ``digits`` significant digits.

    ``coef(k)`` returns c_k as an mpfr (default 1); ``coef_log(k)`` its natural
    log magnitude as a float, used only to size the working precision.
    When terms can differ in sign (z < 0 or ``mixed_signs``) the precision also
    covers the cancellation between the largest term and the sum.  The result
    is accepted once two precisions agree.
    """
    coef = coef or (lambda k: mpfr(1))
    coef_log = coef_log or (lambda k: 0.0)
    margin = 0.0
    if z < 0 or mixed_signs:
        margin = max(_log_term_peak(alpha, beta, z, coef_log), 0.0) / math.log(2)
    bits = int((digits + 10) * LOG2_10 + margin + 64)
    while True:
        lo = _sum(alpha, beta, z, coef, bits)
        hi = _sum(alpha, beta, z, coef, bits + 64)
        if hi == 0 or abs(lo - hi) <= abs(hi) * mpfr(10) ** (-(digits + 5)):
            return hi
        bits *= 2


def prabhakar_coef(gamma_):
    g = mpfr(gamma_)

    def coef(k):
        return gmpy2.gamma(g + k) / (gmpy2.gamma(g) * gmpy2.fac(k))

    def coef_log(k):
        return math.lgamma(gamma_ + k) - math.lgamma(gamma_) - math.lgamma(k + 1)

    return coef, coef_log


def shukla_coef(gamma_, q):
    g, qq = mpfr(gamma_), mpfr(q)

    def coef(k):
        return gmpy2.gamma(g + qq * k) / (gmpy2.gamma(g) * gmpy2.fac(k))

    def coef_log(k):
        return math.lgamma(gamma_ + q * k) - math.lgamma(gamma_) - math.lgamma(k + 1)

    return coef, coef_log


def gamma_mp(x: float):
    with gmpy2.context(gmpy2.get_context(), precision=200):
        return gmpy2.gamma(mpfr(x))


def rel_err(value: float, ref) -> float:
    with gmpy2.context(gmpy2.get_context(), precision=200):
        ref = mpfr(ref)
        if ref == 0:
            return abs(value)
        return float(abs((mpfr(value) - ref) / ref))


def magnitude(ref) -> str:
    """Sign and decimal exponent of a reference that may exceed the double range."""
    with gmpy2.context(gmpy2.get_context(), precision=200):
        ref = mpfr(ref)
        sign = "-" if ref < 0 else ""
        return f"{sign}1e{float(gmpy2.log10(abs(ref))):.1f}"
