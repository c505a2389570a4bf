"""Series specifications and certified evaluation of sum C(n) q^s(n).

A series is described by a periodic coefficient cycle C(0..k-1) and an
exponent: either a polynomial s(n) with exact rational coefficients,
positive degree and positive leading coefficient, or an exponential a^n
with a > 1.  Such series converge for |q| < 1.

``evaluate`` returns a truncated sum together with a certified tail bound:
once the index passes the point where s is strictly increasing with
nondecreasing increments, the tail is dominated by a geometric series with
ratio |q|^delta, delta the next increment gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .hp import (
    DEFAULT_PRECISION,
    GUARD_BITS,
    context,
    round_complex,
    round_real,
    to_complex,
    to_real,
)


class SpecificationError(ValueError):
    """A series specification violates its invariants."""


class EvaluationError(ValueError):
    """Invalid arguments to a series evaluation."""


class TermBudgetError(RuntimeError):
    """The requested tolerance was not reached within the term budget.

    Carries the tail bound that *was* achieved and the number of terms used,
    so callers can distinguish "needs more terms" from a genuine failure.
    """

    def __init__(self, achieved_bound, terms_used: int):
        self.achieved_bound = achieved_bound
        self.terms_used = terms_used
        super().__init__(
            f"term budget exhausted after {terms_used} terms; "
            f"achieved tail bound {achieved_bound}"
        )


def _ceil_fraction(f: Fraction) -> int:
    return -((-f.numerator) // f.denominator)


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicCoefficients:
    """A period-k cycle of complex coefficients; C(n) = values[n mod k]."""

    values: tuple[mpc, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise SpecificationError("coefficient cycle must have period >= 1")

    @classmethod
    def of(cls, values, precision: int = DEFAULT_PRECISION) -> "PeriodicCoefficients":
        """Build a cycle from numbers, (re, im) pairs or decimal strings."""
        converted = []
        for v in values:
            if isinstance(v, tuple):
                converted.append(to_complex(v[0], v[1], precision=precision))
            else:
                converted.append(to_complex(v, precision=precision))
        return cls(tuple(converted))

    @property
    def period(self) -> int:
        return len(self.values)

    def at(self, n: int) -> mpc:
        return self.values[n % len(self.values)]

    def mean(self, precision: int = DEFAULT_PRECISION) -> mpc:
        with context(precision + GUARD_BITS):
            total = mpc(0)
            for v in self.values:
                total += v
            value = total / len(self.values)
        return round_complex(value, precision)

    def max_abs(self, precision: int = DEFAULT_PRECISION) -> mpfr:
        with context(precision):
            return max(abs(v) for v in self.values)

    def replicated(self, factor: int) -> "PeriodicCoefficients":
        """The same sequence presented with period factor*k."""
        if factor < 1:
            raise SpecificationError("replication factor must be >= 1")
        return PeriodicCoefficients(self.values * factor)

    def rotated(self, shift: int) -> "PeriodicCoefficients":
        """The cycle n -> C(n + shift)."""
        k = len(self.values)
        shift %= k
        return PeriodicCoefficients(self.values[shift:] + self.values[:shift])


# ---------------------------------------------------------------------------
# Exponents
# ---------------------------------------------------------------------------

def _poly_eval(coeffs: tuple[Fraction, ...], n) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * n + c
    return acc


def _poly_derivative(coeffs: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    return tuple(i * c for i, c in enumerate(coeffs) if i >= 1)


def _cauchy_root_bound(coeffs: tuple[Fraction, ...]) -> Fraction:
    """1 + max |a_i / a_lead|; all real roots lie below this."""
    lead = coeffs[-1]
    if not lead:
        raise ValueError("leading coefficient must be nonzero")
    if len(coeffs) == 1:
        return Fraction(0)
    return 1 + max(abs(c / lead) for c in coeffs[:-1])


@dataclass(frozen=True)
class PolynomialExponent:
    """s(n) = a_0 + a_1 n + ... + a_d n^d with exact rational coefficients.

    Degree is exact (no trailing zeros), d >= 1, and a_d > 0.  Negative
    values at small n are allowed; convergence only needs s(n) -> infinity.
    """

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 2:
            raise SpecificationError("polynomial exponent needs positive degree")
        if coeffs[-1] == 0:
            raise SpecificationError("trailing zero coefficients are forbidden")
        if coeffs[-1] <= 0:
            raise SpecificationError("leading coefficient must be positive")

    @classmethod
    def of(cls, *coefficients) -> "PolynomialExponent":
        """PolynomialExponent.of(a0, a1, ..., ad)."""
        return cls(tuple(Fraction(c) for c in coefficients))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> Fraction:
        return self.coefficients[-1]

    def value(self, n) -> Fraction:
        return _poly_eval(self.coefficients, n)

    def has_integer_coefficients(self) -> bool:
        return all(c.denominator == 1 for c in self.coefficients)

    def increment(self) -> tuple[Fraction, ...]:
        """Coefficients of g(n) = s(n+1) - s(n), degree d-1."""
        d = self.degree
        out = [Fraction(0)] * d
        for i, a in enumerate(self.coefficients):
            # (n+1)^i - n^i = sum_{j<i} binom(i, j) n^j
            for j in range(i):
                out[j] += a * math.comb(i, j)
        return tuple(out)

    def shifted(self, k: int, j: int) -> "PolynomialExponent":
        """The polynomial n -> s(k n + j), exact binomial expansion."""
        d = self.degree
        out = [Fraction(0)] * (d + 1)
        for i, a in enumerate(self.coefficients):
            for t in range(i + 1):
                out[t] += a * math.comb(i, t) * Fraction(k) ** t * Fraction(j) ** (i - t)
        return PolynomialExponent(tuple(out))

    def eventual_increase_index(self) -> int:
        """Smallest N0 we certify such that for n >= N0 the increments
        g(n) = s(n+1) - s(n) are positive and nondecreasing.

        Beyond the Cauchy root bounds of g and g' the increment polynomial
        is positive and increasing, which is all the tail certificate needs.
        """
        g = self.increment()
        bound = _cauchy_root_bound(g)
        if len(g) >= 2:
            gp = _poly_derivative(g)
            bound = max(bound, _cauchy_root_bound(gp))
        return max(0, _ceil_fraction(Fraction(bound)))

    def positive_increasing_from(self) -> int:
        """An integer T beyond which s(t) > 0 and s'(t) > 0 as a real
        function (Cauchy root bounds of s and s')."""
        bound = _cauchy_root_bound(self.coefficients)
        bound = max(bound, _cauchy_root_bound(_poly_derivative(self.coefficients)))
        return max(0, _ceil_fraction(Fraction(bound)))


@dataclass(frozen=True)
class ExponentialExponent:
    """s(n) = a^n for a real base a > 1."""

    base: mpfr

    def __post_init__(self):
        b = self.base if isinstance(self.base, mpfr) else to_real(self.base, DEFAULT_PRECISION)
        object.__setattr__(self, "base", b)
        if not b > 1:
            raise SpecificationError(f"exponential base must be > 1, got {self.base}")

    def value(self, n: int, precision: int = DEFAULT_PRECISION) -> mpfr:
        with context(precision):
            return self.base ** n


ExponentSpec = PolynomialExponent | ExponentialExponent


@dataclass(frozen=True)
class SeriesSpec:
    """Coefficient cycle plus exponent: sum_{n>=0} C(n) q^s(n)."""

    coefficients: PeriodicCoefficients
    exponent: ExponentSpec


def exponent_value(exponent: ExponentSpec, n: int, precision: int = DEFAULT_PRECISION):
    """s(n): exact Fraction for polynomials, mpfr for exponentials."""
    if n < 0:
        raise EvaluationError(f"n must be >= 0, got {n}")
    if isinstance(exponent, PolynomialExponent):
        return exponent.value(n)
    return exponent.value(n, precision)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesValue:
    """A truncated sum with certified |S - S_N| <= tail_bound."""

    value: mpc
    tail_bound: mpfr
    terms_used: int


DEFAULT_TERM_BUDGET = 10_000_000


def _forward_differences(poly: PolynomialExponent) -> list[Fraction]:
    """[s(0), Delta s(0), ..., Delta^d s(0)] by a difference table."""
    d = poly.degree
    row = [poly.value(n) for n in range(d + 1)]
    out = [row[0]]
    for _ in range(d):
        row = [b - a for a, b in zip(row, row[1:])]
        out.append(row[0])
    return out


class _PolyPowerLadder:
    """Streams q^s(0), q^s(1), ... with d multiplications per step.

    Maintains registers r_j = q^(Delta^j s(n)); advancing multiplies each
    register by the next one.  Exact finite differences keep the exponent
    arithmetic rigorous; rounding enters only through the multiplications.
    """

    def __init__(self, poly: PolynomialExponent, log_q):
        prec = gmpy2.get_context().precision
        self.regs = [gmpy2.exp(log_q * to_real(f, prec)) for f in _forward_differences(poly)]

    @property
    def current(self):
        return self.regs[0]

    @property
    def ratio(self):
        """q^(s(n+1) - s(n)) for the current index n."""
        return self.regs[1]

    def advance(self):
        regs = self.regs
        for i in range(len(regs) - 1):
            regs[i] = regs[i] * regs[i + 1]


def _validate_q(q, precision: int):
    qc = q if isinstance(q, (mpfr, mpc)) else to_complex(q, precision=precision)
    if isinstance(qc, mpc) and qc.imag == 0:
        qc = qc.real
    if not abs(qc) < 1:
        raise EvaluationError(f"|q| must be < 1, got |q| = {abs(qc)}")
    return qc


def partial_sum(spec: SeriesSpec, q, N: int, precision: int = DEFAULT_PRECISION) -> mpc:
    """sum_{n=0}^{N} C(n) q^s(n) exactly as written, at working precision."""
    if N < 0:
        raise EvaluationError(f"N must be >= 0, got {N}")
    qc = _validate_q(q, precision)
    coeffs = spec.coefficients
    work = precision + GUARD_BITS
    with context(work):
        if qc == 0:
            total = mpc(0)
            for n in range(N + 1):
                if exponent_value(spec.exponent, n, work) == 0:
                    total += coeffs.at(n)
            return round_complex(total, precision)
        log_q = gmpy2.log(qc)
        total = mpc(0)
        if isinstance(spec.exponent, PolynomialExponent):
            ladder = _PolyPowerLadder(spec.exponent, log_q)
            for n in range(N + 1):
                total += coeffs.at(n) * ladder.current
                ladder.advance()
        else:
            base = spec.exponent.base
            power = to_real(1, work)
            for n in range(N + 1):
                total += coeffs.at(n) * gmpy2.exp(log_q * power)
                power = power * base
        return round_complex(total, precision)


def evaluate(
    spec: SeriesSpec,
    q,
    eps,
    precision: int = DEFAULT_PRECISION,
    term_budget: int = DEFAULT_TERM_BUDGET,
) -> SeriesValue:
    """Evaluate sum C(n) q^s(n) with a certified tail bound <= eps.

    The certificate: past the eventual-increase index the exponent gaps
    g(n) = s(n+1) - s(n) are positive and nondecreasing, so the tail after
    term N is at most max|C| * |q|^s(N+1) / (1 - |q|^g(N+1)).
    """
    qc = _validate_q(q, precision)
    eps_r = to_real(eps, precision)
    if not eps_r > 0:
        raise EvaluationError(f"eps must be > 0, got {eps}")

    coeffs = spec.coefficients
    work = precision + max(GUARD_BITS, 64)
    with context(work):
        cmax = coeffs.max_abs(work)
        if qc == 0:
            # Only indices with s(n) = 0 contribute; they die out once s
            # passes its eventual-increase range.
            if isinstance(spec.exponent, PolynomialExponent):
                n_stop = spec.exponent.eventual_increase_index() + 1
                while spec.exponent.value(n_stop) <= 0:
                    n_stop += 1
            else:
                n_stop = 1
            total = mpc(0)
            for n in range(n_stop + 1):
                if exponent_value(spec.exponent, n, work) == 0:
                    total += coeffs.at(n)
            return SeriesValue(
                round_complex(total, precision),
                to_real(0, precision),
                n_stop + 1,
            )

        log_q = gmpy2.log(qc)
        total = mpc(0)
        tail_bound = None

        if isinstance(spec.exponent, PolynomialExponent):
            n0 = spec.exponent.eventual_increase_index()
            ladder = _PolyPowerLadder(spec.exponent, log_q)
            n = 0
            while n < term_budget:
                total += coeffs.at(n) * ladder.current
                ladder.advance()
                # After the advance the registers describe index n+1.
                if n + 1 >= n0:
                    ratio_mag = abs(ladder.ratio)
                    if ratio_mag < 1:
                        tail_bound = cmax * abs(ladder.current) / (1 - ratio_mag)
                        if tail_bound <= eps_r:
                            return SeriesValue(
                                round_complex(total, precision),
                                round_real(tail_bound, precision),
                                n + 1,
                            )
                n += 1
        else:
            base = spec.exponent.base
            power = to_real(1, work)
            n = 0
            while n < term_budget:
                total += coeffs.at(n) * gmpy2.exp(log_q * power)
                next_power = power * base
                gap = next_power * (base - 1)
                ratio_mag = abs(qc) ** gap
                if ratio_mag < 1:
                    tail_bound = cmax * abs(qc) ** next_power / (1 - ratio_mag)
                    if tail_bound <= eps_r:
                        return SeriesValue(
                            round_complex(total, precision),
                            round_real(tail_bound, precision),
                            n + 1,
                        )
                power = next_power
                n += 1

        achieved = round_real(tail_bound, precision) if tail_bound is not None else None
        raise TermBudgetError(achieved, n)
