"""Oscillation analysis for series with exponentially growing exponents.

For sum C(n) q^(a^n) with periodic mean-zero C and a > 1, the radial limit
at 1 can fail to exist.  The demonstration decomposes the series by residue
class, rescales each piece so its partial-sum rectangles are pinched between
the curves y = x^M and y = x^m with

    M(a) = (a^(k+j) - a^(k-1)) / (a^(k-1) - a^j),
    m(a) = (a^j - a^(-1)) / (a^(k-1) - a^j),

and builds two parameter subsequences q_r -> 1 along which the rescaled sum
stays above, respectively below, two explicit constants.  When the
separating inequality

    1 - x0'(1 - x0'^M)  <  (x0^(m/M) - x0) x0^m

holds, the two subsequences certify two distinct cluster points.  The
report records the inequality verdict per residue plus empirical cluster
estimates obtained by evaluating the series along the mapped subsequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .hp import DEFAULT_PRECISION, GUARD_BITS, context, round_complex, round_real, to_real
from .series import (
    ExponentialExponent,
    PeriodicCoefficients,
    SeriesSpec,
    SpecificationError,
    evaluate,
)


class MeanNotZeroError(SpecificationError):
    """The coefficient cycle must have mean zero; carries the actual mean."""

    def __init__(self, mean):
        self.mean = mean
        super().__init__(f"coefficient mean must be zero, got {mean}")


@dataclass(frozen=True)
class Slopes:
    """Exponent slopes for one residue, plus the rectangle x-normalization."""

    M: mpfr
    m: mpfr
    x_scale: mpfr  # x_j(0) = (a^(k-1) - a^j) / (a^k - 1)


def slopes(a, k: int, j: int, precision: int = DEFAULT_PRECISION) -> Slopes:
    """M(a), m(a) and x_j(0) for residue j of a period-k cycle."""
    if not 0 <= j <= k - 2:
        raise SpecificationError(f"residue j must satisfy 0 <= j <= k-2, got j={j}, k={k}")
    with context(precision + GUARD_BITS):
        ar = to_real(a, precision + GUARD_BITS)
        if not ar > 1:
            raise SpecificationError(f"base must be > 1, got {a}")
        denom = ar ** (k - 1) - ar ** j
        big = (ar ** (k + j) - ar ** (k - 1)) / denom
        small = (ar ** j - 1 / ar) / denom
        scale = denom / (ar ** k - 1)
    return Slopes(
        round_real(big, precision),
        round_real(small, precision),
        round_real(scale, precision),
    )


def fixed_points(M, m, tol=None, precision: int = DEFAULT_PRECISION):
    """Solve x^m = 1-x on (0, 1/2] and x^M = 1-x on [1/2, 1) by bisection.

    Requires 0 < m <= 1 <= M (the degenerate M = m = 1 yields 1/2 twice and
    is allowed for testing).  Roots exist by monotonicity; the sign change
    is asserted before bisecting.
    """
    work = precision + GUARD_BITS
    with context(work):
        big = to_real(M, work)
        small = to_real(m, work)
        if not (0 < small <= 1 <= big):
            raise SpecificationError(f"need 0 < m <= 1 <= M, got m={m}, M={M}")
        tol_r = to_real(tol, work) if tol is not None else mpfr(2) ** -(precision // 2)

        def bisect(expo, lo, hi):
            f = lambda x: x ** expo - (1 - x)
            flo, fhi = f(lo), f(hi)
            if flo == 0:
                return lo
            if fhi == 0:
                return hi
            if not (flo < 0 < fhi):
                raise SpecificationError(
                    f"no sign change for x^{expo} = 1 - x on [{lo}, {hi}]"
                )
            while hi - lo > tol_r:
                mid = (lo + hi) / 2
                if f(mid) < 0:
                    lo = mid
                else:
                    hi = mid
            return (lo + hi) / 2

        half = to_real(1, work) / 2
        tiny = mpfr(2) ** -(work * 4)
        x0 = bisect(small, tiny, half)
        x0_prime = bisect(big, half, 1 - tiny)
    return round_real(x0, precision), round_real(x0_prime, precision)


def oscillation_sequences(x0, x0_prime, M, m, r_max: int, precision: int = DEFAULT_PRECISION):
    """The two parameter subsequences q_r = x0^((m/M)^r), r = 1..r_max.

    Defined by q_1^M = x0^m and q_r^M = q_{r-1}^m, so the exponent shrinks
    geometrically and both sequences increase strictly to 1.
    """
    if r_max < 1:
        raise SpecificationError(f"r_max must be >= 1, got {r_max}")
    work = precision + GUARD_BITS
    with context(work):
        ratio = to_real(m, work) / to_real(M, work)
        lx0 = gmpy2.log(to_real(x0, work))
        lx0p = gmpy2.log(to_real(x0_prime, work))
        seq, seq_prime = [], []
        power = mpfr(1)
        for _ in range(r_max):
            power = power * ratio
            seq.append(round_real(gmpy2.exp(power * lx0), precision))
            seq_prime.append(round_real(gmpy2.exp(power * lx0p), precision))
    return seq, seq_prime


@dataclass(frozen=True)
class ResidueOscillation:
    """Slopes, fixed points and the separating inequality for one residue."""

    j: int
    M: mpfr
    m: mpfr
    x_scale: mpfr
    x0: mpfr
    x0_prime: mpfr
    lower_value: mpfr
    upper_value: mpfr
    inequality_holds: bool


@dataclass(frozen=True)
class LacunaryReport:
    """Outcome of the oscillation demonstration for sum C(n) q^(a^n)."""

    a: mpfr
    k: int
    rotation: int  # cycle rotation applied so C(k-1) != 0
    pivot_j: int   # residue whose subsequences produced the samples
    per_residue: tuple[ResidueOscillation, ...]
    samples_high: tuple[tuple[mpfr, mpc], ...]  # (q, series value)
    samples_low: tuple[tuple[mpfr, mpc], ...]
    cluster_high: mpc
    cluster_low: mpc
    separation: mpfr
    inequality_all: bool
    verdict: str  # "oscillation-demonstrated" | "inconclusive"

    @property
    def samples(self) -> tuple[tuple[mpfr, mpc], ...]:
        return self.samples_high + self.samples_low


def _required_precision(a, k: int, r_max: int, precision: int) -> int:
    # q_r approaches 1 like 1 - const * a^(-k r); keep enough bits that the
    # mapped parameters stay strictly below 1.
    extra = int(math.ceil(r_max * k * math.log2(float(to_real(a, 64)))))
    return precision + GUARD_BITS + max(64, extra + 64)


def oscillation_report(
    coeffs: PeriodicCoefficients,
    a,
    r_max: int = 8,
    precision: int = DEFAULT_PRECISION,
    eps=None,
) -> LacunaryReport:
    """Run the full oscillation demonstration at base a.

    Requires mean-zero coefficients.  If C(k-1) = 0 the cycle is rotated so
    the nonzero coefficient with the largest index moves to position k-1
    (recorded in the report).  For each residue the separating inequality is
    checked; the series itself is evaluated along the mapped subsequences of
    the residue with the largest |C(j)|, and the report carries the two
    empirical cluster estimates (tail means of the samples).
    """
    mean = coeffs.mean(precision)
    if not abs(mean) <= mpfr(2) ** (16 - precision):
        raise MeanNotZeroError(mean)

    k = coeffs.period
    if k < 2:
        raise SpecificationError("oscillation analysis needs period >= 2")

    work = _required_precision(a, k, r_max, precision)
    with context(work):
        a_r = to_real(a, work)
        if not a_r > 1:
            raise SpecificationError(f"base must be > 1, got {a}")

        # Rotate so the last nonzero coefficient sits at index k-1.
        values = coeffs.values
        last_nonzero = max((i for i, v in enumerate(values) if v != 0), default=None)
        if last_nonzero is None:
            raise SpecificationError("all coefficients are zero")
        rotation = (last_nonzero + 1) % k
        working = coeffs.rotated(rotation) if rotation else coeffs

        per_residue = []
        for j in range(k - 1):
            sl = slopes(a_r, k, j, work)
            x0, x0p = fixed_points(sl.M, sl.m, precision=work)
            lower = (x0 ** (sl.m / sl.M) - x0) * x0 ** sl.m
            upper = 1 - x0p * (1 - x0p ** sl.M)
            per_residue.append(
                ResidueOscillation(
                    j=j,
                    M=round_real(sl.M, precision),
                    m=round_real(sl.m, precision),
                    x_scale=round_real(sl.x_scale, precision),
                    x0=round_real(x0, precision),
                    x0_prime=round_real(x0p, precision),
                    lower_value=round_real(lower, precision),
                    upper_value=round_real(upper, precision),
                    inequality_holds=bool(upper < lower),
                )
            )

        pivot = max(
            range(k - 1),
            key=lambda j: (abs(working.values[j]), -j),
        )
        sl = slopes(a_r, k, pivot, work)
        x0, x0p = fixed_points(sl.M, sl.m, precision=work)
        seq, seq_prime = oscillation_sequences(x0, x0p, sl.M, sl.m, r_max, work)

        spec = SeriesSpec(working, ExponentialExponent(a_r))
        eps_r = to_real(eps, work) if eps is not None else mpfr(2) ** -(precision // 2)
        inv_scale = 1 / sl.x_scale

        def sample(points):
            out = []
            for q_hat in points:
                q_mapped = gmpy2.exp(inv_scale * gmpy2.log(q_hat))
                if not q_mapped < 1:
                    raise SpecificationError(
                        f"mapped parameter reached 1 at precision {work}; increase precision"
                    )
                val = evaluate(spec, q_mapped, eps_r, precision=work)
                out.append((round_real(q_mapped, precision), round_complex(val.value, precision)))
            return tuple(out)

        samples_high = sample(seq)
        samples_low = sample(seq_prime)

        tail = (r_max + 1) // 2
        cluster_high = round_complex(
            sum((v for _, v in samples_high[-tail:]), mpc(0)) / tail, precision
        )
        cluster_low = round_complex(
            sum((v for _, v in samples_low[-tail:]), mpc(0)) / tail, precision
        )
        separation = round_real(abs(cluster_high - cluster_low), precision)

    inequality_all = all(r.inequality_holds for r in per_residue)
    return LacunaryReport(
        a=round_real(a_r, precision),
        k=k,
        rotation=rotation,
        pivot_j=pivot,
        per_residue=tuple(per_residue),
        samples_high=samples_high,
        samples_low=samples_low,
        cluster_high=cluster_high,
        cluster_low=cluster_low,
        separation=separation,
        inequality_all=inequality_all,
        verdict="oscillation-demonstrated" if inequality_all else "inconclusive",
    )
