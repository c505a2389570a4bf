"""Asymptotic expansions of sum C(n) q^s(n) in x = -log q.

The route is Euler's summation formula applied to f(t) = q^s(t) = e^(-x s(t))
for a polynomial s of degree d with positive leading coefficient:

    sum_{n>=0} f(n) = integral_0^inf f(t) dt + f(0)/2
                      - sum_{k=1}^{m-1} B_2k/(2k)! f^(2k-1)(0) + R_m.

The derivatives are f^(k)(t) = P_k(lambda, t) f(t) with lambda = log q and
P_0 = 1, P_{k+1} = dP_k/dt + lambda s'(t) P_k, carried in exact rational
arithmetic.  The integral develops into an expansion in fractional powers
x^(w/d) with coefficients that are Q-linear combinations of Gamma values at
fractions l/d scaled by a_d^(-l/d); the boundary pieces develop into integer
powers of x.  Both are merged on the common exponent lattice {m/d : m >= -1}.
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
    bernoulli_numbers,
    context,
    gamma_hp,
    remainder_prefactor,
    round_complex,
    round_real,
    to_real,
)
from .series import (
    PeriodicCoefficients,
    PolynomialExponent,
    SeriesSpec,
    SpecificationError,
    evaluate,
)


class ExpansionError(ArithmeticError):
    """An internal consistency check of the expansion engine failed."""


# ---------------------------------------------------------------------------
# Symbolic derivatives of q^s(t)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DerivativePolynomial:
    """P_k with f^(k)(t) = P_k(lambda, t) f(t); terms map (r, e) -> rational
    coefficient of lambda^r t^e."""

    order: int
    terms: dict[tuple[int, int], Fraction]

    def lambda_slice(self, r: int) -> dict[int, Fraction]:
        """Coefficients {e: c} of the lambda^r part, as a polynomial in t."""
        return {e: c for (rr, e), c in self.terms.items() if rr == r}

    def at_t_zero(self) -> dict[int, Fraction]:
        """Coefficients {r: c} of P_k(lambda, 0)."""
        return {r: c for (r, e), c in self.terms.items() if e == 0}

    def max_lambda_power(self) -> int:
        return max((r for r, _ in self.terms), default=0)

    def __call__(self, lmbda, t):
        """Evaluate P_k; exact when both arguments are Fractions."""
        acc = None
        for (r, e), c in self.terms.items():
            piece = c * lmbda ** r * t ** e
            acc = piece if acc is None else acc + piece
        return acc if acc is not None else Fraction(0)


def derivative_polynomials(s: PolynomialExponent, K: int) -> list[DerivativePolynomial]:
    """P_0, ..., P_K via P_{k+1} = dP_k/dt + lambda s'(t) P_k, exactly."""
    if K < 0:
        raise SpecificationError(f"K must be >= 0, got {K}")
    sprime = [i * c for i, c in enumerate(s.coefficients) if i >= 1]
    out = [DerivativePolynomial(0, {(0, 0): Fraction(1)})]
    current = out[0].terms
    for k in range(K):
        nxt: dict[tuple[int, int], Fraction] = {}
        for (r, e), c in current.items():
            if e >= 1:
                key = (r, e - 1)
                nxt[key] = nxt.get(key, Fraction(0)) + e * c
            for i, sp in enumerate(sprime):
                if sp:
                    key = (r + 1, e + i)
                    nxt[key] = nxt.get(key, Fraction(0)) + c * sp
        nxt = {key: c for key, c in nxt.items() if c}
        out.append(DerivativePolynomial(k + 1, nxt))
        current = nxt
    return out


# ---------------------------------------------------------------------------
# Expansions on the lattice {index / d}
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionTerm:
    """coefficient * x^(index/d).  When available, ``exact`` is the exact
    rational value and ``gamma_parts`` records the symbolic form
    sum r * Gamma(l/d) * a_d^(-l/d) over pairs (l, r)."""

    index: int
    coefficient: mpc
    exact: Fraction | None = None
    gamma_parts: tuple[tuple[int, Fraction], ...] | None = None


@dataclass(frozen=True)
class AsymptoticExpansion:
    """Finite expansion sum_m c_m x^(m/d) with a remainder-order marker.

    Exponent indexes are strictly increasing and never below -1 (the only
    possible negative exponent is -1/d).  The remainder is O(x^remainder_order)
    as x -> 0+.
    """

    denominator_degree: int
    terms: tuple[ExpansionTerm, ...]
    remainder_order: Fraction

    def __post_init__(self):
        if self.denominator_degree < 1:
            raise SpecificationError("denominator degree must be >= 1")
        indexes = [t.index for t in self.terms]
        if any(b <= a for a, b in zip(indexes, indexes[1:])):
            raise SpecificationError("expansion exponents must be strictly increasing")
        if indexes and indexes[0] < -1:
            raise SpecificationError("the only allowed negative exponent is -1/d")

    def coefficient(self, index: int) -> mpc:
        for t in self.terms:
            if t.index == index:
                return t.coefficient
        return mpc(0)

    @property
    def order(self) -> Fraction | None:
        """Highest retained lattice exponent."""
        if not self.terms:
            return None
        return Fraction(self.terms[-1].index, self.denominator_degree)

    def exponent_of(self, term: ExpansionTerm) -> Fraction:
        return Fraction(term.index, self.denominator_degree)

    def __call__(self, x, precision: int = DEFAULT_PRECISION) -> mpc:
        with context(precision + GUARD_BITS):
            xr = to_real(x, precision + GUARD_BITS)
            lx = gmpy2.log(xr)
            total = mpc(0)
            for t in self.terms:
                expo = to_real(Fraction(t.index, self.denominator_degree),
                               precision + GUARD_BITS)
                total += t.coefficient * gmpy2.exp(expo * lx)
        return round_complex(total, precision)


def _scaled_tilde_numerators(s: PolynomialExponent) -> list[Fraction]:
    """-a_{d-i} for i = 1..d (the rational parts of the tilde coefficients)."""
    d = s.degree
    return [-s.coefficients[d - i] for i in range(1, d + 1)]


def _integral_gamma_series(
    s: PolynomialExponent, W: int, monomial_power: int = 0
) -> dict[int, dict[int, Fraction]]:
    """Rational skeleton of integral_0^inf t^e e^(-x s(t)) dt.

    Returns {w: {l: r}} such that the integral equals
        sum_w [ sum_l r * Gamma(l/d) * a_d^(-l/d) ] * x^((w - e - 1)/d),
    obtained by expanding the exponential of the lower-order terms after
    the substitution u = x a_d t^d and integrating term by term.  A
    multi-index (m_1..m_d) over the lower-order terms contributes weight
    w = sum i*m_i and Gamma argument l = e + 1 + sum (d-i)*m_i.
    """
    if W < 0:
        raise SpecificationError(f"W must be >= 0, got {W}")
    d = s.degree
    e = monomial_power
    numerators = _scaled_tilde_numerators(s)
    out: dict[int, dict[int, Fraction]] = {}

    def descend(i: int, weight: int, sigma: int, rat: Fraction):
        if i > d:
            w = weight
            l = e + 1 + sigma
            out.setdefault(w, {})
            out[w][l] = out[w].get(l, Fraction(0)) + rat / d
            return
        num = numerators[i - 1]
        m_i = 0
        factor = Fraction(1)
        while weight + i * m_i <= W:
            descend(i + 1, weight + i * m_i, sigma + (d - i) * m_i, rat * factor)
            if num == 0:
                break
            m_i += 1
            factor = factor * num / m_i

    descend(1, 0, 0, Fraction(1))
    return {w: {l: r for l, r in parts.items() if r} for w, parts in out.items()}


def _gamma_parts_value(parts: dict[int, Fraction], d: int, ad: Fraction, precision: int):
    """Evaluate sum_l r * Gamma(l/d) * a_d^(-l/d) numerically; exact for d=1."""
    with context(precision + GUARD_BITS):
        ad_real = to_real(ad, precision + GUARD_BITS)
        ad_root = gmpy2.exp(gmpy2.log(ad_real) / d)
        total = mpfr(0)
        for l, r in sorted(parts.items()):
            total += to_real(r, precision + GUARD_BITS) * gamma_hp(
                Fraction(l, d), precision + GUARD_BITS
            ) * ad_root ** (-l)
    exact = None
    if d == 1:
        exact = sum(
            (r * math.factorial(l - 1) / ad ** l for l, r in parts.items()),
            Fraction(0),
        )
    return round_real(total, precision), exact


def integral_expansion(
    s: PolynomialExponent, W: int, precision: int = DEFAULT_PRECISION
) -> AsymptoticExpansion:
    """Expansion of integral_0^inf q^s(t) dt through weight W.

    The result is x^(-1/d)/(d a_d^(1/d)) times a power series in x^(1/d);
    term w of the series lands on lattice index w - 1.  Coefficients carry
    their symbolic Gamma decomposition, and are exact rationals when d = 1.
    """
    d = s.degree
    skeleton = _integral_gamma_series(s, W)
    terms = []
    for w in sorted(skeleton):
        parts = skeleton[w]
        if not parts:
            continue
        value, exact = _gamma_parts_value(parts, d, s.leading, precision)
        terms.append(
            ExpansionTerm(
                index=w - 1,
                coefficient=round_complex(mpc(value), precision),
                exact=exact,
                gamma_parts=tuple(sorted(parts.items())),
            )
        )
    return AsymptoticExpansion(
        denominator_degree=d,
        terms=tuple(terms),
        remainder_order=Fraction(W, d),
    )


def boundary_terms(
    s: PolynomialExponent, m: int, W: int, precision: int = DEFAULT_PRECISION
) -> AsymptoticExpansion:
    """q^s(0) * [1/2 - sum_{k=1}^{m-1} B_2k/(2k)! P_{2k-1}(-x, 0)] as a power
    series in x, truncated at x^W.  All coefficients are exact rationals."""
    if m < 1:
        raise SpecificationError(f"depth m must be >= 1, got {m}")
    if W < 0:
        raise SpecificationError(f"W must be >= 0, got {W}")
    d = s.degree
    bern = bernoulli_numbers(2 * (m - 1)) if m > 1 else []
    polys = derivative_polynomials(s, 2 * m - 3) if m >= 2 else []

    # Polynomial part in x: 1/2 - sum_k B_2k/(2k)! * P_{2k-1}(-x, 0).
    poly = [Fraction(0)] * (W + 1)
    poly[0] = Fraction(1, 2)
    for k in range(1, m):
        factor = bern[2 * k] / math.factorial(2 * k)
        for r, c in polys[2 * k - 1].at_t_zero().items():
            if r <= W:
                poly[r] -= factor * c * (-1) ** r

    # Multiply by e^(-s(0) x).
    s0 = s.value(0)
    expo = [Fraction(0)] * (W + 1)
    acc = Fraction(1)
    for j in range(W + 1):
        expo[j] = acc
        acc = acc * (-s0) / (j + 1)
    coeffs = [
        sum((poly[i] * expo[j - i] for i in range(j + 1)), Fraction(0))
        for j in range(W + 1)
    ]

    terms = []
    with context(precision + GUARD_BITS):
        for j, c in enumerate(coeffs):
            if c == 0:
                continue
            terms.append(
                ExpansionTerm(
                    index=j * d,
                    coefficient=round_complex(mpc(to_real(c, precision + GUARD_BITS)), precision),
                    exact=c,
                )
            )
    return AsymptoticExpansion(
        denominator_degree=d,
        terms=tuple(terms),
        remainder_order=Fraction(W + 1),
    )


def euler_maclaurin_order(m: int, d: int) -> Fraction:
    """Order of the depth-m remainder: the boundary data at 0 vanishes for
    lambda-powers r with 2m-1 > r*d, so R_m = O(x^ceil((2m-1)/d))."""
    return Fraction(-((-(2 * m - 1)) // d))


def series_expansion(
    spec: SeriesSpec,
    m: int = 4,
    W: int | None = None,
    precision: int = DEFAULT_PRECISION,
    mean_tol=None,
) -> AsymptoticExpansion:
    """Asymptotic expansion of sum C(n) q^s(n) through lattice exponent W/d.

    Splits the series by residue class j mod k, expands each shifted
    polynomial s(nk+j) via integral plus boundary terms, scales by C(j) and
    merges.  For mean-zero C the x^(-1/d) contributions cancel exactly (the
    cancellation is asserted); otherwise the leading term survives.
    """
    if not isinstance(spec.exponent, PolynomialExponent):
        raise SpecificationError("series_expansion requires a polynomial exponent")
    if m < 1:
        raise SpecificationError(f"depth m must be >= 1, got {m}")
    s = spec.exponent
    d = s.degree
    if W is None:
        W = 2 * d + 2
    if W < 0:
        raise SpecificationError(f"W must be >= 0, got {W}")
    coeffs = spec.coefficients
    k = coeffs.period
    work = precision + GUARD_BITS

    acc: dict[int, mpc] = {}
    with context(work):
        for j in range(k):
            c_j = coeffs.values[j]
            if c_j == 0:
                continue
            s_j = s.shifted(k, j)
            integral = integral_expansion(s_j, W + 1, work)
            boundary = boundary_terms(s_j, m, W // d, work)
            for part in (integral, boundary):
                for term in part.terms:
                    if term.index > W:
                        continue
                    acc[term.index] = acc.get(term.index, mpc(0)) + c_j * term.coefficient

        mu = coeffs.mean(work)
        tol = (
            to_real(mean_tol, work)
            if mean_tol is not None
            else mpfr(2) ** (16 - precision)
        )
        if abs(mu) <= tol and -1 in acc:
            scale = k * coeffs.max_abs(work) * gamma_hp(Fraction(1, d), work) / (
                d * gmpy2.exp(gmpy2.log(to_real(s.leading, work)) / d)
            )
            allowed = mpfr(2) ** (48 - precision) * (1 + scale) + (k + 1) * tol * scale
            if not abs(acc[-1]) <= allowed:
                raise ExpansionError(
                    "mean-zero leading terms failed to cancel: "
                    f"|coefficient of x^(-1/d)| = {abs(acc[-1])}"
                )

        terms = tuple(
            ExpansionTerm(index=i, coefficient=round_complex(acc[i], precision))
            for i in sorted(acc)
        )
    remainder = min(Fraction(W + 1, d), euler_maclaurin_order(m, d))
    return AsymptoticExpansion(
        denominator_degree=d,
        terms=terms,
        remainder_order=remainder,
    )


def remainder_bound(
    s: PolynomialExponent, m: int, x, precision: int = DEFAULT_PRECISION
) -> mpfr:
    """Asymptotic size estimate of the depth-m remainder at x = -log q:

        (2 + 2 zeta(2m))/(2 pi)^(2m) * | integral_0^inf P_2m(-x, t) e^(-x s(t)) dt |.

    Each t-monomial of P_2m integrates to a shifted Gamma expansion.  The
    expansions are asymptotic, so this is an order-of-magnitude estimate,
    not a rigorous bound.
    """
    if m < 1:
        raise SpecificationError(f"m must be >= 1, got {m}")
    work = precision + GUARD_BITS
    with context(work):
        xr = to_real(x, work)
        if not xr > 0:
            raise SpecificationError(f"x must be > 0, got {x}")
        d = s.degree
        p2m = derivative_polynomials(s, 2 * m)[2 * m]
        lx = gmpy2.log(xr)
        total = mpfr(0)
        w_depth = 2 * d + 2
        monomial_cache: dict[int, mpfr] = {}
        for (r, e), c in sorted(p2m.terms.items()):
            if e not in monomial_cache:
                skeleton = _integral_gamma_series(s, w_depth, monomial_power=e)
                value = mpfr(0)
                for w, parts in skeleton.items():
                    coeff, _ = _gamma_parts_value(parts, d, s.leading, work)
                    expo = to_real(Fraction(w - e - 1, d), work)
                    value += coeff * gmpy2.exp(expo * lx)
                monomial_cache[e] = value
            total += to_real(c, work) * (-xr) ** r * monomial_cache[e]
        bound = remainder_prefactor(m, work) * abs(total)
    return round_real(bound, precision)


# ---------------------------------------------------------------------------
# Residual verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    """Residuals |series - expansion| over a grid, with a log-log slope."""

    points: tuple[tuple[mpfr, mpfr], ...]  # (x, residual)
    slope: mpfr | None
    points_used: int
    remainder_order: Fraction
    floor: mpfr


def verify_expansion(
    spec: SeriesSpec,
    expansion: AsymptoticExpansion,
    xs=None,
    precision: int = DEFAULT_PRECISION,
    eps=None,
) -> ResidualReport:
    """Compare the expansion against direct summation on a grid of x.

    Reports the empirical slope of log residual vs log x (for comparison
    with the expansion's remainder order).  Points whose residual sinks
    below the evaluation floor are excluded from the slope fit.
    """
    work = precision + GUARD_BITS
    with context(work):
        if xs is None:
            lo, hi, count = to_real("1e-3", work), to_real("1e-2", work), 8
            ratio = gmpy2.exp(gmpy2.log(hi / lo) / (count - 1))
            xs_r = [lo * ratio ** i for i in range(count)]
        else:
            xs_r = [to_real(xv, work) for xv in xs]
        if any(not 0 < xv <= to_real("0.1", work) for xv in xs_r):
            raise SpecificationError("verification grid must lie inside (0, 0.1]")
        eps_r = to_real(eps, work) if eps is not None else mpfr(2) ** -min(140, 2 * precision // 3)
        floor = 16 * eps_r

        points = []
        usable = []
        for xv in xs_r:
            q = gmpy2.exp(-xv)
            direct = evaluate(spec, q, eps_r, precision=work).value
            resid = abs(direct - expansion(xv, precision=work))
            points.append((round_real(xv, precision), round_real(resid, precision)))
            if resid > floor:
                usable.append((gmpy2.log(xv), gmpy2.log(resid)))

        slope = None
        if len(usable) >= 2:
            n = len(usable)
            sx = sum(u for u, _ in usable)
            sy = sum(v for _, v in usable)
            sxx = sum(u * u for u, _ in usable)
            sxy = sum(u * v for u, v in usable)
            denom = n * sxx - sx * sx
            if denom != 0:
                slope = round_real((n * sxy - sx * sy) / denom, precision)

    return ResidualReport(
        points=tuple(points),
        slope=slope,
        points_used=len(usable),
        remainder_order=expansion.remainder_order,
        floor=round_real(floor, precision),
    )
