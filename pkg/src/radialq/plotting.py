"""Rectangle and convergence plot data, with a static SVG rendering.

The rectangle picture underlies the limit computation: for residue j the
terms of the series pair into rectangles with corners on two bounding
curves.  ``rectangles`` emits the corner data (CSV-ready) and the curves;
``render_svg`` draws them inside the unit square.  No interactive output,
just files.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .hp import DEFAULT_PRECISION, GUARD_BITS, context, round_real, to_real
from .lacunary import slopes
from .series import (
    ExponentialExponent,
    PolynomialExponent,
    SeriesSpec,
    SpecificationError,
    evaluate,
)


@dataclass(frozen=True)
class Rectangle:
    n: int
    x_left: mpfr
    x_right: mpfr
    height: mpfr


@dataclass(frozen=True)
class RectangleData:
    rectangles: tuple[Rectangle, ...]
    # Bounding curves as sampled polylines [(x, y), ...]
    lower_curve: tuple[tuple[mpfr, mpfr], ...]
    upper_curve: tuple[tuple[mpfr, mpfr], ...]
    labels: tuple[str, str]


def _interpolate_exact(values: list[Fraction]) -> list[Fraction]:
    """Coefficients of the unique polynomial of degree < len(values) through
    (i, values[i]), by exact Lagrange interpolation."""
    n = len(values)
    coeffs = [Fraction(0)] * n
    for i in range(n):
        # basis polynomial prod_{j != i} (t - j)/(i - j)
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(n):
            if j == i:
                continue
            basis = [Fraction(0)] + basis[:]
            for t in range(len(basis) - 1):
                basis[t] -= Fraction(j) * basis[t + 1]
            denom *= i - j
        for t in range(len(basis)):
            coeffs[t] += values[i] * basis[t] / denom
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _poly_at_real(coeffs, t, work):
    acc = mpfr(0)
    for c in reversed(coeffs):
        acc = acc * t + to_real(c, work)
    return acc


def rectangles_polynomial(
    spec: SeriesSpec,
    q,
    j: int = 0,
    count: int = 12,
    curve_samples: int = 200,
    precision: int = DEFAULT_PRECISION,
) -> RectangleData:
    """Rectangle decomposition for residue j of a polynomial-exponent series.

    x(n) accumulates the pivot-residue exponent differences
    s(lk + k - 1) - s(lk + j); y(n) = s(nk + j) - x(n).  Both are
    polynomials in n, recovered exactly by interpolation so the bounding
    curves (q^x(t), q^y(t)) and (q^x(t), q^y(t-1)) can be drawn.
    """
    if not isinstance(spec.exponent, PolynomialExponent):
        raise SpecificationError("rectangle data needs a polynomial exponent")
    s = spec.exponent
    k = spec.coefficients.period
    if k < 2:
        raise SpecificationError("rectangle decomposition needs period >= 2")
    if not 0 <= j <= k - 2:
        raise SpecificationError(f"residue j must be in [0, {k - 2}], got {j}")
    d = s.degree

    # Exact x(n) at n = 0..d+1, then interpolate (degree d polynomial).
    needed = max(count + 2, d + 2)
    x_vals = [Fraction(0)]
    for n in range(needed):
        x_vals.append(x_vals[-1] + s.value(n * k + k - 1) - s.value(n * k + j))
    x_coeffs = _interpolate_exact(x_vals[: d + 2])
    y_coeffs_full = s.shifted(k, j).coefficients
    y_coeffs = [b - a for b, a in
                zip(y_coeffs_full, list(x_coeffs) + [Fraction(0)] * (d + 1 - len(x_coeffs)))]

    work = precision + GUARD_BITS
    with context(work):
        q_r = to_real(q, work)
        if not 0 < q_r < 1:
            raise SpecificationError(f"q must be in (0, 1), got {q}")
        log_q = gmpy2.log(q_r)

        def qpow(value):
            return gmpy2.exp(log_q * value)

        rects = []
        for n in range(count):
            x_n = to_real(x_vals[n], work)
            x_n1 = to_real(x_vals[n + 1], work)
            y_n = to_real(s.value(n * k + j) - x_vals[n], work)
            rects.append(
                Rectangle(
                    n=n,
                    x_left=round_real(qpow(x_n1), precision),
                    x_right=round_real(qpow(x_n), precision),
                    height=round_real(qpow(y_n), precision),
                )
            )

        lower, upper = [], []
        t_max = to_real(count, work)
        step = t_max / curve_samples
        for i in range(curve_samples + 1):
            t = step * i
            xq = qpow(_poly_at_real(x_coeffs, t, work))
            lower.append((round_real(xq, precision),
                          round_real(qpow(_poly_at_real(y_coeffs, t, work)), precision)))
            upper.append((round_real(xq, precision),
                          round_real(qpow(_poly_at_real(y_coeffs, t - 1, work)), precision)))
    return RectangleData(
        rectangles=tuple(rects),
        lower_curve=tuple(lower),
        upper_curve=tuple(upper),
        labels=("q^y(t) along q^x(t)", "q^y(t-1) along q^x(t)"),
    )


def rectangles_lacunary(
    spec: SeriesSpec,
    q,
    j: int = 0,
    count: int = 6,
    curve_samples: int = 200,
    precision: int = DEFAULT_PRECISION,
) -> RectangleData:
    """Normal-form rectangles for an exponential exponent: x-range
    [q^(a^(nk+k)), q^(a^(nk))] at height q^(a^(nk) M); the top corners lie
    on the curves y = x^M (right) and y = x^m (left)."""
    if not isinstance(spec.exponent, ExponentialExponent):
        raise SpecificationError("lacunary rectangles need an exponential exponent")
    k = spec.coefficients.period
    if k < 2:
        raise SpecificationError("rectangle decomposition needs period >= 2")
    work = precision + GUARD_BITS
    with context(work):
        a = to_real(spec.exponent.base, work)
        sl = slopes(a, k, j, work)
        q_r = to_real(q, work)
        if not 0 < q_r < 1:
            raise SpecificationError(f"q must be in (0, 1), got {q}")
        log_q = gmpy2.log(q_r)
        rects = []
        for n in range(count):
            e_right = a ** (n * k)
            e_left = a ** (n * k + k)
            rects.append(
                Rectangle(
                    n=n,
                    x_left=round_real(gmpy2.exp(log_q * e_left), precision),
                    x_right=round_real(gmpy2.exp(log_q * e_right), precision),
                    height=round_real(gmpy2.exp(log_q * e_right * sl.M), precision),
                )
            )
        lower, upper = [], []
        for i in range(1, curve_samples + 1):
            x = to_real(i, work) / curve_samples
            lx = gmpy2.log(x)
            lower.append((round_real(x, precision),
                          round_real(gmpy2.exp(sl.M * lx), precision)))
            upper.append((round_real(x, precision),
                          round_real(gmpy2.exp(sl.m * lx), precision)))
    return RectangleData(
        rectangles=tuple(rects),
        lower_curve=tuple(lower),
        upper_curve=tuple(upper),
        labels=("y = x^M", "y = x^m"),
    )


def convergence_data(
    spec: SeriesSpec,
    x_min,
    x_max,
    count: int,
    precision: int = DEFAULT_PRECISION,
    eps=None,
):
    """(x, series value) pairs at q = e^-x over a geometric grid of x."""
    work = precision + GUARD_BITS
    with context(work):
        lo = to_real(x_min, work)
        hi = to_real(x_max, work)
        if not 0 < lo < hi:
            raise SpecificationError(f"need 0 < x_min < x_max, got [{x_min}, {x_max}]")
        eps_r = to_real(eps, work) if eps is not None else mpfr(2) ** -(precision // 4)
        ratio = gmpy2.exp(gmpy2.log(hi / lo) / (count - 1))
        out = []
        x = lo
        for _ in range(count):
            val = evaluate(spec, gmpy2.exp(-x), eps_r, precision=work)
            out.append((round_real(x, precision), val.value))
            x = x * ratio
    return out


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

_SVG_SIZE = 640
_MARGIN = 40


def _px(u: float) -> str:
    return f"{_MARGIN + u * (_SVG_SIZE - 2 * _MARGIN):.2f}"


def _py(v: float) -> str:
    return f"{_MARGIN + (1 - v) * (_SVG_SIZE - 2 * _MARGIN):.2f}"


def render_rectangles_svg(data: RectangleData) -> str:
    """Static SVG of the rectangles and their bounding curves in [0,1]^2."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_SIZE}" '
        f'height="{_SVG_SIZE}" viewBox="0 0 {_SVG_SIZE} {_SVG_SIZE}">',
        f'<rect x="{_px(0)}" y="{_py(1)}" width="{float(_px(1)) - float(_px(0)):.2f}" '
        f'height="{float(_py(0)) - float(_py(1)):.2f}" fill="none" stroke="#444"/>',
    ]
    for r in data.rectangles:
        left, right, height = float(r.x_left), float(r.x_right), float(r.height)
        if right - left <= 0 or height <= 0:
            continue
        parts.append(
            f'<rect x="{_px(left)}" y="{_py(height)}" '
            f'width="{(right - left) * (_SVG_SIZE - 2 * _MARGIN):.2f}" '
            f'height="{height * (_SVG_SIZE - 2 * _MARGIN):.2f}" '
            f'fill="#8ecae6" fill-opacity="0.45" stroke="#1d3557" stroke-width="0.8"/>'
        )
    for curve, colour in ((data.lower_curve, "#d62828"), (data.upper_curve, "#2a9d8f")):
        pts = " ".join(
            f"{_px(float(x))},{_py(min(1.0, float(y)))}" for x, y in curve if 0 <= float(x) <= 1
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.2"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_convergence_svg(points, reference=None) -> str:
    """Re(value) against log10 x, with an optional horizontal reference."""
    import math

    xs = [math.log10(float(x)) for x, _ in points]
    ys = [float(v.real) for _, v in points]
    lo_x, hi_x = min(xs), max(xs)
    lo_y, hi_y = min(ys + ([float(reference)] if reference is not None else [])), max(
        ys + ([float(reference)] if reference is not None else [])
    )
    span_y = (hi_y - lo_y) or 1.0
    span_x = (hi_x - lo_x) or 1.0

    def nx(x):
        return (x - lo_x) / span_x

    def ny(y):
        return (y - lo_y) / span_y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_SIZE}" '
        f'height="{_SVG_SIZE}" viewBox="0 0 {_SVG_SIZE} {_SVG_SIZE}">',
        f'<rect x="{_px(0)}" y="{_py(1)}" width="{float(_px(1)) - float(_px(0)):.2f}" '
        f'height="{float(_py(0)) - float(_py(1)):.2f}" fill="none" stroke="#444"/>',
    ]
    if reference is not None:
        ry = ny(float(reference))
        parts.append(
            f'<line x1="{_px(0)}" y1="{_py(ry)}" x2="{_px(1)}" y2="{_py(ry)}" '
            f'stroke="#d62828" stroke-dasharray="6,4" stroke-width="1"/>'
        )
    pts = " ".join(f"{_px(nx(x))},{_py(ny(y))}" for x, y in zip(xs, ys))
    parts.append(
        f'<polyline points="{pts}" fill="none" stroke="#1d3557" stroke-width="1.5"/>'
    )
    for x, y in zip(xs, ys):
        parts.append(
            f'<circle cx="{_px(nx(x))}" cy="{_py(ny(y))}" r="3" fill="#1d3557"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
