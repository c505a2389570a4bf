"""Precision-parameterized arithmetic and shared special values.

All numeric work in this package runs on MPFR/MPC floats (via gmpy2) with an
explicit precision in bits.  Every public operation takes a ``precision``
argument; nothing relies on an ambient global precision.  Internally a few
guard bits are added so that per-operation rounding (relative error at most
2^(1-P) per MPFR operation) stays below the advertised accuracy of the
result.

Besides the arithmetic helpers this module provides the special values the
rest of the package consumes: exact Bernoulli numbers, the Gamma function on
the positive reals, even zeta values and the Euler-Maclaurin remainder
prefactor (2 + 2*zeta(2m)) / (2*pi)^(2m).
"""

from __future__ import annotations

import math
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

DEFAULT_PRECISION = 256

# Extra bits used inside computations so results are good to the last bit
# at the caller's precision.
GUARD_BITS = 32

Real = mpfr
Complex = mpc


class PrecisionError(ValueError):
    """Invalid argument to a numeric kernel (bad precision, domain, ...)."""


def context(precision: int) -> "gmpy2.context":
    """A gmpy2 context at ``precision`` bits, usable as a context manager."""
    if precision < 2:
        raise PrecisionError(f"precision must be >= 2 bits, got {precision}")
    return gmpy2.context(precision=precision)


def to_real(value, precision: int = DEFAULT_PRECISION) -> mpfr:
    """Convert ``value`` (number, Fraction or decimal string) to mpfr."""
    with context(precision):
        if isinstance(value, Fraction):
            return mpfr(value.numerator) / mpfr(value.denominator)
        return mpfr(value)


def to_complex(value, imag=None, precision: int = DEFAULT_PRECISION) -> mpc:
    """Convert to mpc; accepts a pair of real-convertible parts."""
    with context(precision):
        if imag is not None:
            return mpc(to_real(value, precision), to_real(imag, precision))
        if isinstance(value, Fraction):
            return mpc(to_real(value, precision))
        return mpc(value)


def round_real(value: mpfr, precision: int) -> mpfr:
    """Round a (possibly higher-precision) mpfr to ``precision`` bits."""
    return mpfr(value, precision)


def round_complex(value, precision: int) -> mpc:
    return mpc(value, precision=(precision, precision))


def pi(precision: int = DEFAULT_PRECISION) -> mpfr:
    with context(precision):
        return gmpy2.const_pi()


# ---------------------------------------------------------------------------
# Bernoulli numbers
# ---------------------------------------------------------------------------

# Cache of B_0, B_1, ... as exact Fractions, grown on demand.
_bernoulli_cache: list[Fraction] = [Fraction(1)]


def bernoulli_numbers(n_max: int) -> list[Fraction]:
    """Exact Bernoulli numbers B_0..B_n_max.

    Uses the defining recurrence sum_{k=0}^{n} binom(n+1, k) * B_k = 0,
    solved for B_n.  This yields the convention B_1 = -1/2; only even-index
    values are consumed downstream, where both conventions agree.
    """
    if n_max < 0:
        raise PrecisionError(f"n_max must be >= 0, got {n_max}")
    while len(_bernoulli_cache) <= n_max:
        n = len(_bernoulli_cache)
        acc = Fraction(0)
        for k, bk in enumerate(_bernoulli_cache):
            if bk:
                acc += math.comb(n + 1, k) * bk
        _bernoulli_cache.append(-acc / (n + 1))
    return _bernoulli_cache[: n_max + 1]


def bernoulli(n: int) -> Fraction:
    """B_n as an exact Fraction (B_1 = -1/2 convention)."""
    return bernoulli_numbers(n)[n]


# ---------------------------------------------------------------------------
# Gamma on the positive reals
# ---------------------------------------------------------------------------

def gamma_hp(x, precision: int = DEFAULT_PRECISION) -> mpfr:
    """Gamma(x) for real x > 0 with relative error <= 2^(8-precision).

    Backed by MPFR's correctly rounded gamma evaluated with guard bits, so
    the actual error is far below the advertised bound.  Nonpositive
    arguments are rejected.
    """
    with context(precision + GUARD_BITS):
        xr = to_real(x, precision + GUARD_BITS)
        if not gmpy2.is_finite(xr) or xr <= 0:
            raise PrecisionError(f"gamma_hp requires x > 0, got {x}")
        value = gmpy2.gamma(xr)
    return round_real(value, precision)


# ---------------------------------------------------------------------------
# zeta(2m) and the remainder prefactor
# ---------------------------------------------------------------------------

def zeta_even(m: int, precision: int = DEFAULT_PRECISION) -> mpfr:
    """zeta(2m) for m >= 1, via zeta(2m) = |B_2m| (2 pi)^(2m) / (2 (2m)!).

    The closed form through Bernoulli numbers is exact; the direct Dirichlet
    series converges far too slowly at small m for high-precision use.
    """
    if m < 1:
        raise PrecisionError(f"zeta_even requires m >= 1, got {m}")
    b = abs(bernoulli(2 * m))
    with context(precision + GUARD_BITS):
        two_pi = 2 * gmpy2.const_pi()
        value = (
            to_real(b, precision + GUARD_BITS)
            * two_pi ** (2 * m)
            / (2 * gmpy2.factorial(2 * m))
        )
    return round_real(value, precision)


def remainder_prefactor(m: int, precision: int = DEFAULT_PRECISION) -> mpfr:
    """(2 + 2*zeta(2m)) / (2*pi)^(2m), the Euler-Maclaurin remainder factor."""
    if m < 1:
        raise PrecisionError(f"remainder_prefactor requires m >= 1, got {m}")
    with context(precision + GUARD_BITS):
        z = zeta_even(m, precision + GUARD_BITS)
        two_pi = 2 * gmpy2.const_pi()
        value = (2 + 2 * z) / two_pi ** (2 * m)
    return round_real(value, precision)
