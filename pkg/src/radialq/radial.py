"""Radial limits of sum C(n) q^s(n) at roots of unity.

For mean-zero periodic coefficients and a polynomial exponent the limit as
q -> 1- exists and equals

    (-C(1) - 2 C(2) - ... - (k-1) C(k-1)) / k,

independent of the polynomial.  A limit at another root of unity xi reduces
to a limit at 1 by twisting the coefficients, C~(n) = C(n) xi^s(n), which is
again periodic when s has integer coefficients.  A nonzero twisted mean
makes the series diverge like a negative fractional power of x = -log q;
an exponential exponent produces oscillation instead (lacunary module).

``extrapolate_limit`` provides the independent numeric route: evaluate the
(twisted) series on a geometric grid of x and least-squares fit the
fractional-power expansion sum c_w x^(w/d), returning c_0.
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
    gamma_hp,
    round_complex,
    round_real,
    to_real,
)
from .lacunary import LacunaryReport, MeanNotZeroError, oscillation_report
from .series import (
    ExponentialExponent,
    PeriodicCoefficients,
    PolynomialExponent,
    SeriesSpec,
    SpecificationError,
    evaluate,
)


class FitError(ValueError):
    """The extrapolation fit is singular or under-determined."""


@dataclass(frozen=True)
class RootOfUnity:
    """xi = e^(2 pi i p / N) as an exact reduced fraction p/N of the circle."""

    p: int
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise SpecificationError(f"root order N must be >= 1, got {self.N}")
        p = self.p % self.N
        g = math.gcd(p, self.N)
        if g > 1:
            raise SpecificationError(
                f"p/N must be in lowest terms, got {self.p}/{self.N}"
            )
        object.__setattr__(self, "p", p)

    @classmethod
    def reduced(cls, p: int, N: int) -> "RootOfUnity":
        """Construct from any integer pair, reducing p/N mod 1."""
        if N < 1:
            raise SpecificationError(f"root order N must be >= 1, got {N}")
        p %= N
        g = math.gcd(p, N)
        return cls(p // g, N // g)

    @property
    def is_one(self) -> bool:
        return self.N == 1

    def value(self, precision: int = DEFAULT_PRECISION) -> mpc:
        with context(precision + GUARD_BITS):
            angle = 2 * gmpy2.const_pi() * self.p / self.N
            val = mpc(gmpy2.cos(angle), gmpy2.sin(angle))
        return round_complex(val, precision)


ONE = RootOfUnity(0, 1)


def mean(coeffs: PeriodicCoefficients, precision: int = DEFAULT_PRECISION) -> mpc:
    """(C(0) + ... + C(k-1)) / k."""
    return coeffs.mean(precision)


def default_mean_tolerance(precision: int) -> mpfr:
    # Forgives representation noise in numerically-entered coefficients;
    # exact inputs produce exactly zero means.
    return mpfr(2) ** (16 - precision)


def closed_form_limit(
    coeffs: PeriodicCoefficients,
    precision: int = DEFAULT_PRECISION,
    mean_tol=None,
) -> mpc:
    """The radial limit ((k-1)C(0) + (k-2)C(1) + ... + 1*C(k-2)) / k.

    Requires mean zero (within ``mean_tol``).  Both algebraic forms of the
    limit are computed and cross-checked; they differ by exactly
    (k-1) * mean, so agreement is guaranteed for admissible input.
    """
    tol = to_real(mean_tol, precision) if mean_tol is not None else default_mean_tolerance(precision)
    mu = coeffs.mean(precision)
    if not abs(mu) <= tol:
        raise MeanNotZeroError(mu)
    k = coeffs.period
    with context(precision + GUARD_BITS):
        primary = mpc(0)
        for j in range(k - 1):
            primary += (k - 1 - j) * coeffs.values[j]
        primary /= k
        alternate = mpc(0)
        for j in range(1, k):
            alternate -= j * coeffs.values[j]
        alternate /= k
        slack = (k + 2) * tol + mpfr(2) ** (8 - precision) * (1 + abs(primary))
        if not abs(primary - alternate) <= slack:
            raise ArithmeticError(
                "closed-form limit cross-check failed: "
                f"{primary} vs {alternate}"
            )
    return round_complex(primary, precision)


def twist(
    coeffs: PeriodicCoefficients,
    s: PolynomialExponent,
    xi: RootOfUnity,
    precision: int = DEFAULT_PRECISION,
) -> PeriodicCoefficients:
    """The twisted cycle C~(n) = C(n) xi^s(n) with period lcm(k, N).

    The root-of-unity power is reduced in exact integer arithmetic,
    p*s(n) mod N, before any floating evaluation; s(n+N) = s(n) mod N for
    integer-coefficient s, which makes C~ periodic.
    """
    if not s.has_integer_coefficients():
        raise SpecificationError(
            "twisting requires integer polynomial coefficients; "
            f"got {s.coefficients}"
        )
    k = coeffs.period
    new_period = math.lcm(k, xi.N)
    with context(precision + GUARD_BITS):
        angle_unit = 2 * gmpy2.const_pi() / xi.N
        powers = [
            mpc(gmpy2.cos(angle_unit * r), gmpy2.sin(angle_unit * r))
            for r in range(xi.N)
        ]
        values = []
        for n in range(new_period):
            s_n = int(s.value(n))
            r = (xi.p * s_n) % xi.N
            values.append(round_complex(coeffs.at(n) * powers[r], precision))
    return PeriodicCoefficients(tuple(values))


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

CONJECTURAL_LEADING_TERM = "conjectural leading term"


@dataclass(frozen=True)
class LeadingTerm:
    """coefficient * x^exponent in x = -log q."""

    coefficient: mpc
    exponent: Fraction
    label: str = CONJECTURAL_LEADING_TERM


@dataclass(frozen=True)
class RadialLimit:
    """Trichotomy of radial behaviour at a root of unity.

    Exactly one payload is populated: ``value`` for a convergent limit,
    ``leading_term`` for power-law divergence, ``evidence`` for oscillation.
    """

    kind: str  # "converges" | "diverges" | "oscillates"
    value: mpc | None = None
    leading_term: LeadingTerm | None = None
    evidence: LacunaryReport | None = None
    twisted: PeriodicCoefficients | None = None
    twisted_mean: mpc | None = None

    def __post_init__(self):
        payloads = {
            "converges": self.value,
            "diverges": self.leading_term,
            "oscillates": self.evidence,
        }
        if self.kind not in payloads:
            raise ValueError(f"unknown kind {self.kind!r}")
        populated = [k for k, v in payloads.items() if v is not None]
        if populated != [self.kind]:
            raise ValueError(
                f"result of kind {self.kind!r} must populate exactly its own "
                f"payload, got {populated}"
            )


def classify_radial_limit(
    spec: SeriesSpec,
    xi: RootOfUnity = ONE,
    precision: int = DEFAULT_PRECISION,
    mean_tol=None,
    r_max: int = 8,
) -> RadialLimit:
    """Classify the radial limit of the series at xi.

    Polynomial exponent: twist, then mean zero gives the closed-form limit;
    a nonzero twisted mean mu gives divergence with (conjectural) leading
    term mu * Gamma(1/d) / (d * a_d^(1/d)) * x^(-1/d).  Exponential
    exponent: oscillation, with the lacunary report as evidence.
    """
    tol = to_real(mean_tol, precision) if mean_tol is not None else default_mean_tolerance(precision)

    if isinstance(spec.exponent, ExponentialExponent):
        if not xi.is_one:
            raise SpecificationError(
                "radial limits at xi != 1 are not defined for exponential "
                "exponents (the twist is not periodic)"
            )
        report = oscillation_report(spec.coefficients, spec.exponent.base,
                                    r_max=r_max, precision=precision)
        return RadialLimit(kind="oscillates", evidence=report)

    s = spec.exponent
    twisted = twist(spec.coefficients, s, xi, precision) if not xi.is_one else spec.coefficients
    mu = twisted.mean(precision)
    if abs(mu) <= tol:
        value = closed_form_limit(twisted, precision, mean_tol=tol)
        return RadialLimit(kind="converges", value=value,
                           twisted=twisted, twisted_mean=mu)
    d = s.degree
    with context(precision + GUARD_BITS):
        lead = to_real(s.leading, precision + GUARD_BITS)
        coeff = mu * gamma_hp(Fraction(1, d), precision + GUARD_BITS) / (
            d * gmpy2.rootn(lead, d)
        )
    return RadialLimit(
        kind="diverges",
        leading_term=LeadingTerm(round_complex(coeff, precision), Fraction(-1, d)),
        twisted=twisted,
        twisted_mean=mu,
    )


# ---------------------------------------------------------------------------
# Numeric extrapolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """A geometric grid of count points x in [x_min, x_max]."""

    x_min: Fraction
    x_max: Fraction
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise FitError(f"grid needs at least 2 points, got {self.count}")
        if not 0 < self.x_min < self.x_max:
            raise FitError(f"need 0 < x_min < x_max, got [{self.x_min}, {self.x_max}]")

    @classmethod
    def of(cls, x_min, x_max, count: int) -> "Grid":
        return cls(Fraction(str(x_min)) if isinstance(x_min, float) else Fraction(x_min),
                   Fraction(str(x_max)) if isinstance(x_max, float) else Fraction(x_max),
                   count)

    def points(self, precision: int) -> list[mpfr]:
        with context(precision):
            lo = to_real(self.x_min, precision)
            hi = to_real(self.x_max, precision)
            ratio = gmpy2.exp(gmpy2.log(hi / lo) / (self.count - 1))
            out = [lo]
            for _ in range(self.count - 1):
                out.append(out[-1] * ratio)
            return out


# Grids matched to how fast the series enters its asymptotic regime: low
# degrees need many terms per point (cost ~ x^(-1/d)) but converge to the
# fit basis quickly; high degrees are cheap to sum, so smaller x is used to
# keep the expansion parameter x^(1/d) small.
_DEFAULT_GRIDS: dict[int, tuple[str, str, int]] = {
    1: ("1e-4", "1e-2", 12),
    2: ("1e-5", "1e-2", 12),
    3: ("1e-7", "1e-3", 14),
    4: ("1e-8", "1e-4", 14),
}
_HIGH_DEGREE_GRID = ("1e-10", "1e-5", 16)


def default_grid(degree: int) -> Grid:
    lo, hi, count = _DEFAULT_GRIDS.get(degree, _HIGH_DEGREE_GRID)
    return Grid(Fraction(lo), Fraction(hi), count)


@dataclass(frozen=True)
class Extrapolation:
    estimate: mpc
    error_estimate: mpfr
    coefficients: tuple[mpc, ...]
    grid: Grid
    fit_order: int


def _solve_normal_equations(columns, rhs, precision):
    """Least squares via column-scaled normal equations, Gaussian elimination."""
    ncols = len(columns)
    npts = len(rhs)
    norms = []
    for col in columns:
        norms.append(gmpy2.sqrt(sum(c * c for c in col)))
    scaled = [[c / norms[w] for c in columns[w]] for w in range(ncols)]
    ata = [[sum(scaled[i][t] * scaled[j][t] for t in range(npts)) for j in range(ncols)]
           for i in range(ncols)]
    atb = [sum(scaled[i][t] * rhs[t] for t in range(npts)) for i in range(ncols)]

    # Gaussian elimination with partial pivoting; real SPD matrix, complex rhs.
    n = ncols
    a = [row[:] for row in ata]
    b = atb[:]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0:
            raise FitError("singular fit matrix; reduce fit_order or add grid points")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            if factor == 0:
                continue
            for c in range(col, n):
                a[r][c] -= factor * a[col][c]
            b[r] -= factor * b[col]
    coeffs = [mpc(0)] * n
    for r in range(n - 1, -1, -1):
        acc = b[r]
        for c in range(r + 1, n):
            acc -= a[r][c] * coeffs[c]
        coeffs[r] = acc / a[r][r]
    return [coeffs[w] / norms[w] for w in range(ncols)]


def extrapolate_limit(
    spec: SeriesSpec,
    xi: RootOfUnity = ONE,
    grid: Grid | None = None,
    fit_order: int | None = None,
    precision: int = DEFAULT_PRECISION,
    eps=None,
) -> Extrapolation:
    """Estimate the radial limit numerically.

    Evaluates the (twisted) series at q = e^(-x) over a geometric grid and
    least-squares fits sum_{w<=fit_order} c_w x^(w/d); the constant c_0 is
    the limit estimate and the rms fit residual the error estimate.
    """
    if not isinstance(spec.exponent, PolynomialExponent):
        raise SpecificationError("extrapolation requires a polynomial exponent")
    s = spec.exponent
    d = s.degree
    coeffs = (
        twist(spec.coefficients, s, xi, precision) if not xi.is_one else spec.coefficients
    )
    working_spec = SeriesSpec(coeffs, s)
    grid = grid or default_grid(d)
    order = fit_order if fit_order is not None else 2 * d
    ncols = order + 1
    if ncols > grid.count:
        raise FitError(
            f"fit of order {order} needs more than {grid.count} grid points"
        )

    work = precision + GUARD_BITS
    with context(work):
        eps_r = to_real(eps, work) if eps is not None else mpfr(2) ** -min(100, 2 * precision // 5)
        xs = grid.points(work)
        ys = []
        for x in xs:
            q = gmpy2.exp(-x)
            ys.append(evaluate(working_spec, q, eps_r, precision=work).value)
        columns = []
        for w in range(ncols):
            expo = to_real(Fraction(w, d), work)
            columns.append([gmpy2.exp(expo * gmpy2.log(x)) for x in xs])
        fitted = _solve_normal_equations(columns, ys, work)
        residuals = []
        for t in range(len(xs)):
            model = sum(fitted[w] * columns[w][t] for w in range(ncols))
            residuals.append(abs(ys[t] - model))
        dof = max(1, len(xs) - ncols)
        rms = gmpy2.sqrt(sum(r * r for r in residuals) / dof)
    return Extrapolation(
        estimate=round_complex(fitted[0], precision),
        error_estimate=round_real(rms, precision),
        coefficients=tuple(round_complex(c, precision) for c in fitted),
        grid=grid,
        fit_order=order,
    )
