"""q-integral approximants and the rectangle-sum squeeze harness.

Partitioning [0, 1] at the points q^n and sampling at right endpoints turns
integral_0^1 f(x) dx into (1-q) sum f(q^n) q^n, exact in the limit q -> 1-.
For f(x) = x^c the approximant has the closed form (1-q)/(1-q^(c+1)).

The same picture drives the central limit computation: for eventually
increasing x(t), y(t) of equal degree with lim y(t)/x(t) = c,

    sum_{n>=0} q^y(n) (q^x(n) - q^x(n+1))  ->  1/(1+c)   as q -> 1-,

each summand being the area of a rectangle pinched between the curves
(q^x(t), q^y(t)) and (q^x(t), q^y(t-1)).  ``lemma_sum`` evaluates the sum
with a certified tail and the two bounding integrals, so the squeeze can be
checked numerically.

Note on orientation: the limit constant is c = lim y(t)/x(t), the ratio of
the y-leading to the x-leading coefficient.  The geometric oracle fixes it:
x(t) = t, y(t) = 2t gives (1-q)/(1-q^3) -> 1/3 = 1/(1+2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .hp import (
    DEFAULT_PRECISION,
    GUARD_BITS,
    context,
    round_real,
    to_real,
)
from .series import (
    DEFAULT_TERM_BUDGET,
    PolynomialExponent,
    SpecificationError,
    TermBudgetError,
    _PolyPowerLadder,
)


def q_integral_power(c, q, precision: int = DEFAULT_PRECISION) -> mpfr:
    """(1-q)/(1-q^(c+1)): the q-integral approximant of integral_0^1 x^c dx."""
    work = precision + GUARD_BITS
    with context(work):
        c_r = to_real(c, work)
        q_r = to_real(q, work)
        if not c_r > 0:
            raise SpecificationError(f"c must be > 0, got {c}")
        if not 0 < q_r < 1:
            raise SpecificationError(f"q must be in (0, 1), got {q}")
        value = (1 - q_r) / (1 - gmpy2.exp((c_r + 1) * gmpy2.log(q_r)))
    return round_real(value, precision)


@dataclass(frozen=True)
class LemmaPair:
    """Exponent pair (x(t), y(t)) for the rectangle sum.

    Both are polynomials with positive leading coefficients and equal
    degree, so the ratio y/x has the finite positive limit c needed for the
    1/(1+c) law.
    """

    x_poly: PolynomialExponent
    y_poly: PolynomialExponent

    def __post_init__(self):
        if self.x_poly.degree != self.y_poly.degree:
            raise SpecificationError(
                "x(t) and y(t) must have the same degree for a finite limit "
                f"ratio; got {self.x_poly.degree} and {self.y_poly.degree}"
            )

    @property
    def c(self) -> Fraction:
        """lim y(t)/x(t) = (leading of y) / (leading of x)."""
        return self.y_poly.leading / self.x_poly.leading


def lemma_limit(pair: LemmaPair, precision: int = DEFAULT_PRECISION) -> mpfr:
    """The limiting value 1/(1+c) of the rectangle sum."""
    with context(precision + GUARD_BITS):
        value = 1 / (1 + to_real(pair.c, precision + GUARD_BITS))
    return round_real(value, precision)


@dataclass(frozen=True)
class LemmaSum:
    """The rectangle sum at one q, with its tail squeeze data.

    ``tail_sum`` collects the terms n >= tail_start (the eventually-monotone
    range); the proof's integrals bound it: lower_int <= tail_sum <= upper_int.
    """

    total: mpfr
    tail_bound: mpfr
    terms_used: int
    tail_start: int
    tail_sum: mpfr
    lower_int: mpfr
    upper_int: mpfr


def _adaptive_simpson(f, a, b, tol, depth: int = 48):
    fa, fm, fb = f(a), f((a + b) / 2), f(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2, depth - 1
        )

    return recurse(a, b, fa, fm, fb, whole, tol, depth)


def lemma_sum(
    pair: LemmaPair,
    q,
    eps,
    precision: int = DEFAULT_PRECISION,
    term_budget: int = DEFAULT_TERM_BUDGET,
) -> LemmaSum:
    """Evaluate sum q^y(n) (q^x(n) - q^x(n+1)) with tail certificate and
    squeeze integrals.

    The tail certificate reuses the geometric bound on q^(x(n)+y(n)).  The
    integrals run over t >= tail_start in a scaled variable so the decay
    happens on an O(1) interval; quadrature tolerance is eps/10.
    """
    work = precision + GUARD_BITS
    with context(work):
        q_r = to_real(q, work)
        if not 0 < q_r < 1:
            raise SpecificationError(f"q must be in (0, 1), got {q}")
        eps_r = to_real(eps, work)
        if not eps_r > 0:
            raise SpecificationError(f"eps must be > 0, got {eps}")

        x_poly, y_poly = pair.x_poly, pair.y_poly
        log_q = gmpy2.log(q_r)

        # Index from which both x and y are positive and increasing, so the
        # rectangle picture (and the tail certificate) applies.
        n_mono = max(x_poly.positive_increasing_from(), y_poly.positive_increasing_from())
        tail_start = n_mono + 1

        total_poly = PolynomialExponent(
            tuple(a + b for a, b in zip(x_poly.coefficients, y_poly.coefficients))
        )
        n_gap = max(total_poly.eventual_increase_index(), tail_start)

        ladder_x = _PolyPowerLadder(x_poly, log_q)
        ladder_y = _PolyPowerLadder(y_poly, log_q)
        total = mpfr(0)
        tail_sum = mpfr(0)
        tail_bound = None
        n = 0
        done = False
        while n < term_budget:
            qx = ladder_x.current
            qy = ladder_y.current
            ladder_x.advance()
            term = qy * (qx - ladder_x.current)
            total += term
            if n >= tail_start:
                tail_sum += term
            ladder_y.advance()
            if n + 1 >= n_gap:
                # Remaining terms are dominated by q^(x+y) geometrically.
                ratio = ladder_x.ratio * ladder_y.ratio
                if ratio < 1:
                    tail_bound = ladder_x.current * ladder_y.current / (1 - ratio)
                    if tail_bound <= eps_r:
                        done = True
                        n += 1
                        break
            n += 1
        if not done:
            raise TermBudgetError(
                round_real(tail_bound, precision) if tail_bound is not None else None,
                n,
            )

        # Squeeze integrals over t >= tail_start, as in the proof:
        #   integral q^y(t) d(-q^x(t)) <= tail <= integral q^y(t-1) d(-q^x(t)).
        qtol = eps_r / 10
        lead_sum = total_poly.leading
        scale = gmpy2.exp(
            -gmpy2.log(to_real(lead_sum, work) * -log_q) / total_poly.degree
        )
        x_deriv = tuple(
            i * c for i, c in enumerate(x_poly.coefficients) if i >= 1
        )

        def poly_at(coeffs, t):
            acc = mpfr(0)
            for c in reversed(coeffs):
                acc = acc * t + to_real(c, work)
            return acc

        def integrand(shift):
            def f(tau):
                t = tau * scale
                xv = poly_at(x_poly.coefficients, t)
                yv = poly_at(y_poly.coefficients, t - shift)
                xd = poly_at(x_deriv, t)
                return scale * (-log_q) * xd * gmpy2.exp(log_q * (xv + yv))
            return f

        t_lo = to_real(tail_start, work)
        # Cut once the integrand's own exponential bound drops below qtol:
        # beyond t_end the remaining mass is <= q^(x(t_end)) <= qtol/2.
        target = gmpy2.log(qtol / 2) / log_q
        t_end = t_lo + 1
        while to_real(x_poly.value(_ceil_int(t_end)), work) < target:
            t_end *= 2
        tau_lo, tau_hi = t_lo / scale, t_end / scale

        lower = _adaptive_simpson(integrand(0), tau_lo, tau_hi, qtol)
        upper = _adaptive_simpson(integrand(1), tau_lo, tau_hi, qtol)
        # The dropped mass beyond t_end is positive: widen the upper bound.
        upper += qtol / 2

    return LemmaSum(
        total=round_real(total, precision),
        tail_bound=round_real(tail_bound, precision),
        terms_used=n,
        tail_start=tail_start,
        tail_sum=round_real(tail_sum, precision),
        lower_int=round_real(lower, precision),
        upper_int=round_real(upper, precision),
    )


def _ceil_int(x: mpfr) -> int:
    return int(gmpy2.ceil(x))
